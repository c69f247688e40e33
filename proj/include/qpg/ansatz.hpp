#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qpg/qsim.hpp"
#include "qpg/rng.hpp"

namespace qpg {

enum class Entangler { CZ, CX };

std::string to_string(Entangler e);
Entangler entangler_from_string(const std::string& name);

/// Hardware-efficient data re-uploading circuit:
///   V_0, then for l = 1..d: E_l, V_l
/// V_l: Rz(theta) then Ry(theta) on every qubit, then the all-to-all entangler.
/// E_l: Ry(lambda * s_q) then Rz(lambda' * s_q) on every qubit.
/// With hadamard_prefix the circuit starts with a Hadamard on every qubit.
struct ModelConfig {
  int n_qubits = 1;
  int depth = 1;
  Entangler entangler = Entangler::CZ;
  bool hadamard_prefix = false;

  void validate() const;
  bool operator==(const ModelConfig&) const = default;
};

struct ParamCounts {
  std::size_t theta;
  std::size_t lambda;
  std::size_t total() const { return theta + lambda; }
  bool operator==(const ParamCounts&) const = default;
};

/// (2 n (d+1), 2 n d)
ParamCounts param_counts(const ModelConfig& config);

/// Variational angles theta and encoding scale factors lambda.
///
/// Layout of theta: index 2 (l n + q) + g for layer l in [0, d], qubit q,
/// gate g (0 = Rz, 1 = Ry). Layout of lambda: 2 ((l-1) n + q) + g for
/// encoding layer l in [1, d], g (0 = Ry, 1 = Rz).
struct ParamSet {
  std::vector<double> theta;
  std::vector<double> lambda;

  std::size_t size() const { return theta.size() + lambda.size(); }
  double& at(std::size_t flat_index);
  double at(std::size_t flat_index) const;

  /// theta block followed by lambda block.
  std::vector<double> flat() const;
  static ParamSet from_flat(const ModelConfig& config, std::span<const double> values);
  static ParamSet zeros(const ModelConfig& config);
};

enum class ThetaInit { Uniform, Normal };

/// theta ~ U(-pi, pi] (or N(0, stddev) for Normal), lambda = 1.
ParamSet init_params(const ModelConfig& config, ThetaInit scheme, Rng& rng,
                     double stddev = 0.1);

enum class GateKind { H, RY, RZ, CZ, CX };

struct Gate {
  GateKind kind;
  int q0;
  int q1 = -1;
  int param = -1;    // flat index into (theta, lambda), -1 if unparameterized
  int feature = -1;  // encoding gates multiply their parameter by features[feature]
};

/// Compiled gate sequence for one model configuration.
class Circuit {
 public:
  explicit Circuit(const ModelConfig& config);

  const ModelConfig& config() const { return config_; }
  std::span<const Gate> gates() const { return gates_; }
  ParamCounts counts() const { return counts_; }

  Statevector prepare(const ParamSet& params, std::span<const double> features) const;
  /// Same, with params given as a flat (theta, lambda) vector.
  Statevector prepare(std::span<const double> flat_params, std::span<const double> features) const;

  std::size_t rotation_count() const;
  std::size_t entangler_count() const;

 private:
  ModelConfig config_;
  ParamCounts counts_;
  std::vector<Gate> gates_;
};

Statevector prepare_state(const ModelConfig& config, const ParamSet& params,
                          std::span<const double> features);

struct ShiftTerm {
  ParamSet params;
  double coefficient;
};
using ShiftPlan = std::vector<ShiftTerm>;

/// Parameter-shift evaluation plan for d<.>/d Theta_index.
///
/// A variational angle gives theta_j +- pi/2 with coefficients +-1/2. A
/// scaling factor feeding feature s shifts its encoding angle lambda * s by
/// +- pi/2 (lambda +- pi / (2 s)) with coefficients +- s / 2; for s = 0 both
/// coefficients are 0.
ShiftPlan shift_plan(const ModelConfig& config, const ParamSet& params,
                     std::size_t param_index, std::span<const double> features);

/// Maps a prepared state to a vector of real observables (probabilities,
/// expectation values, ...).
using StateFunctional = std::function<std::vector<double>(const Statevector&)>;

/// Jacobian of `observe` with respect to every parameter, via shift_plan.
/// Result is indexed [parameter][output].
std::vector<std::vector<double>> shift_jacobian(const Circuit& circuit, const ParamSet& params,
                                                std::span<const double> features,
                                                const StateFunctional& observe);

void write_params(std::ostream& out, const ModelConfig& config, const ParamSet& params,
                  std::span<const double> extra = {});

struct ParamCheckpoint {
  ModelConfig config;
  ParamSet params;
  std::vector<double> extra;
};

ParamCheckpoint read_params(std::istream& in);

}  // namespace qpg
