#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "qpg/rng.hpp"

namespace qpg {

using Amplitude = std::complex<double>;

/// Dense n-qubit state. Basis index i encodes the bitstring b_{n-1} ... b_0
/// with b_k = (i >> k) & 1, so qubit n-1 is the most significant bit.
class Statevector {
 public:
  static constexpr int kMaxQubits = 24;
  /// Drift of the squared norm beyond this is treated as a bug.
  static constexpr double kNormTolerance = 1e-9;

  /// |0...0> on n qubits.
  explicit Statevector(int n_qubits);

  /// Takes ownership of explicit amplitudes; size must be a power of two.
  static Statevector from_amplitudes(std::vector<Amplitude> amplitudes);

  int num_qubits() const { return n_qubits_; }
  std::size_t dim() const { return amps_.size(); }
  std::span<const Amplitude> amplitudes() const { return amps_; }
  const Amplitude& operator[](std::size_t i) const { return amps_[i]; }

  void apply_ry(int qubit, double angle);
  void apply_rz(int qubit, double angle);
  void apply_h(int qubit);
  void apply_cz(int q1, int q2);
  void apply_cx(int control, int target);

  double norm_squared() const;

  /// |c_i|^2 for every basis state. Throws std::logic_error on norm drift.
  std::vector<double> probabilities() const;

  /// i.i.d. computational-basis measurements, returned as basis indices.
  std::vector<std::uint64_t> sample(std::size_t shots, Rng& rng) const;

  /// <Z_{q1} Z_{q2} ...> for the qubits set in mask.
  double z_expectation(std::uint64_t mask) const;

 private:
  Statevector(int n_qubits, std::vector<Amplitude> amplitudes);
  void check_qubit(int qubit) const;
  void check_pair(int q1, int q2) const;

  int n_qubits_;
  std::vector<Amplitude> amps_;
};

inline Statevector zero_state(int n_qubits) { return Statevector(n_qubits); }

/// Draws one index from a discrete distribution given its probabilities.
std::size_t sample_index(std::span<const double> probs, Rng& rng);

}  // namespace qpg
