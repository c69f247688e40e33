#include "qpg/qsim.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace qpg {

Statevector::Statevector(int n_qubits) : n_qubits_(n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::out_of_range("Statevector: qubit count " + std::to_string(n_qubits) +
                            " outside [1, " + std::to_string(kMaxQubits) + "]");
  }
  amps_.assign(std::size_t{1} << n_qubits, Amplitude{0.0, 0.0});
  amps_[0] = Amplitude{1.0, 0.0};
}

Statevector::Statevector(int n_qubits, std::vector<Amplitude> amplitudes)
    : n_qubits_(n_qubits), amps_(std::move(amplitudes)) {}

Statevector Statevector::from_amplitudes(std::vector<Amplitude> amplitudes) {
  const auto size = amplitudes.size();
  if (size < 2 || !std::has_single_bit(size)) {
    throw std::invalid_argument("Statevector: amplitude count must be a power of two >= 2");
  }
  const int n = std::countr_zero(size);
  if (n > kMaxQubits) throw std::out_of_range("Statevector: too many qubits");
  Statevector sv(n, std::move(amplitudes));
  if (std::abs(sv.norm_squared() - 1.0) > kNormTolerance) {
    throw std::invalid_argument("Statevector: amplitudes are not normalized");
  }
  return sv;
}

void Statevector::check_qubit(int qubit) const {
  if (qubit < 0 || qubit >= n_qubits_) {
    throw std::out_of_range("Statevector: qubit index " + std::to_string(qubit) +
                            " out of range for " + std::to_string(n_qubits_) + " qubits");
  }
}

void Statevector::check_pair(int q1, int q2) const {
  check_qubit(q1);
  check_qubit(q2);
  if (q1 == q2) throw std::invalid_argument("Statevector: two-qubit gate on identical qubits");
}

// Pair iteration: for every index i with bit `qubit` clear, (i, i | stride)
// is one amplitude pair. Pairs are disjoint, so the update order is irrelevant.
template <typename F>
static void for_each_pair(std::vector<Amplitude>& amps, int qubit, F&& f) {
  const std::size_t stride = std::size_t{1} << qubit;
  const std::size_t n = amps.size();
  for (std::size_t block = 0; block < n; block += 2 * stride) {
    for (std::size_t i = block; i < block + stride; ++i) {
      f(amps[i], amps[i + stride]);
    }
  }
}

void Statevector::apply_ry(int qubit, double angle) {
  check_qubit(qubit);
  const double c = std::cos(angle / 2);
  const double s = std::sin(angle / 2);
  for_each_pair(amps_, qubit, [c, s](Amplitude& a0, Amplitude& a1) {
    const Amplitude x0 = a0;
    const Amplitude x1 = a1;
    a0 = c * x0 - s * x1;
    a1 = s * x0 + c * x1;
  });
}

void Statevector::apply_rz(int qubit, double angle) {
  check_qubit(qubit);
  const Amplitude lo = std::polar(1.0, -angle / 2);
  const Amplitude hi = std::polar(1.0, angle / 2);
  for_each_pair(amps_, qubit, [lo, hi](Amplitude& a0, Amplitude& a1) {
    a0 *= lo;
    a1 *= hi;
  });
}

void Statevector::apply_h(int qubit) {
  check_qubit(qubit);
  static constexpr double r = 0.70710678118654752440;
  for_each_pair(amps_, qubit, [](Amplitude& a0, Amplitude& a1) {
    const Amplitude x0 = a0;
    a0 = r * (x0 + a1);
    a1 = r * (x0 - a1);
  });
}

void Statevector::apply_cz(int q1, int q2) {
  check_pair(q1, q2);
  const std::size_t mask = (std::size_t{1} << q1) | (std::size_t{1} << q2);
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if ((i & mask) == mask) amps_[i] = -amps_[i];
  }
}

void Statevector::apply_cx(int control, int target) {
  check_pair(control, target);
  const std::size_t cbit = std::size_t{1} << control;
  const std::size_t tbit = std::size_t{1} << target;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(amps_[i], amps_[i | tbit]);
  }
}

double Statevector::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return total;
}

std::vector<double> Statevector::probabilities() const {
  std::vector<double> probs(amps_.size());
  double total = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    probs[i] = std::norm(amps_[i]);
    total += probs[i];
  }
  if (std::abs(total - 1.0) > kNormTolerance) {
    throw std::logic_error("Statevector: norm drifted to " + std::to_string(total));
  }
  return probs;
}

double Statevector::z_expectation(std::uint64_t mask) const {
  double value = 0.0;
  for (std::size_t i = 0; i < amps_.size(); ++i) {
    const double p = std::norm(amps_[i]);
    value += (std::popcount(static_cast<std::uint64_t>(i) & mask) & 1) ? -p : p;
  }
  return value;
}

std::size_t sample_index(std::span<const double> probs, Rng& rng) {
  if (probs.empty()) throw std::invalid_argument("sample_index: empty distribution");
  const double total = std::accumulate(probs.begin(), probs.end(), 0.0);
  double u = rng.uniform() * total;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  // Rounding left u marginally positive: return the last non-zero entry.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) return i;
  }
  return probs.size() - 1;
}

std::vector<std::uint64_t> Statevector::sample(std::size_t shots, Rng& rng) const {
  if (shots == 0) throw std::invalid_argument("Statevector::sample: shots must be >= 1");
  const auto probs = probabilities();
  std::vector<double> cdf(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cdf.begin());
  std::vector<std::uint64_t> out;
  out.reserve(shots);
  for (std::size_t k = 0; k < shots; ++k) {
    const double u = rng.uniform() * cdf.back();
    auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    if (it == cdf.end()) --it;
    out.push_back(static_cast<std::uint64_t>(it - cdf.begin()));
  }
  return out;
}

}  // namespace qpg
