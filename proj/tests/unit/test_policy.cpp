#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qpg/policy.hpp"

using namespace qpg;

namespace {

std::vector<double> random_features(int n, Rng& rng) {
  std::vector<double> s(static_cast<std::size_t>(n));
  for (auto& v : s) v = rng.uniform(-1, 1);
  return s;
}

std::vector<double> random_params(const Policy& p, Rng& rng) {
  auto v = init_policy_params(p, ThetaInit::Uniform, rng);
  const auto lay = p.layout();
  for (std::size_t i = lay.theta; i < v.size(); ++i) v[i] = rng.uniform(-2, 2);
  return v;
}

void check_fd(const Policy& policy, const std::vector<double>& s, const std::vector<double>& params) {
  const double h = 1e-5;
  for (int a = 0; a < policy.num_actions(); ++a) {
    const auto g = policy.log_prob_grad(s, a, params);
    REQUIRE(g.size() == params.size());
    for (std::size_t j = 0; j < params.size(); ++j) {
      auto plus = params, minus = params;
      plus[j] += h;
      minus[j] -= h;
      const double fd = (std::log(policy.probs(s, plus)[static_cast<std::size_t>(a)]) -
                         std::log(policy.probs(s, minus)[static_cast<std::size_t>(a)])) /
                        (2 * h);
      CHECK(std::abs(g[j] - fd) < 1e-5 * std::max(1.0, std::abs(fd)));
    }
  }
}

}  // namespace

TEST_CASE("raw policy probabilities sum basis probabilities by action") {
  Rng rng(1);
  ModelConfig m{3, 2};
  RawVqcPolicy pol(m, PostProcessing::global_recursive(3, 4));
  const auto params = random_params(pol, rng);
  const auto s = random_features(3, rng);
  const auto pi = pol.probs(s, params);
  const auto basis = Circuit(m).prepare(params, s).probabilities();
  std::vector<double> want(4, 0.0);
  for (Bits b = 0; b < 8; ++b) want[static_cast<std::size_t>(pol.postfn().decode(b))] += basis[b];
  double total = 0;
  for (int a = 0; a < 4; ++a) {
    CHECK(pi[static_cast<std::size_t>(a)] == doctest::Approx(want[static_cast<std::size_t>(a)]).epsilon(1e-14));
    total += pi[static_cast<std::size_t>(a)];
  }
  CHECK(total == doctest::Approx(1.0));
}

TEST_CASE("zero parameters put all mass on the action of 0...0") {
  ModelConfig m{4, 1};
  RawVqcPolicy pol(m, PostProcessing::msb_local(4));
  const std::vector<double> params(pol.layout().total(), 0.0);
  const auto pi = pol.probs(std::vector<double>{0.1, 0.2, 0.3, 0.4}, params);
  CHECK(pi[0] == doctest::Approx(1.0));
  CHECK(pi[1] == 0.0);
  CHECK_THROWS_AS(pol.log_prob_grad(std::vector<double>{0.1, 0.2, 0.3, 0.4}, 1, params), std::domain_error);
}

TEST_CASE("raw log-gradient matches finite differences") {
  Rng rng(2);
  for (int trial = 0; trial < 6; ++trial) {
    ModelConfig m{3, 2, trial % 2 ? Entangler::CX : Entangler::CZ};
    RawVqcPolicy pol(m, trial < 3 ? PostProcessing::global_recursive(3, 4) : PostProcessing::msb_local(3));
    check_fd(pol, random_features(3, rng), random_params(pol, rng));
  }
}

TEST_CASE("softmax log-gradient matches finite differences") {
  Rng rng(3);
  for (int trial = 0; trial < 6; ++trial) {
    ModelConfig m{3, 2};
    RestrictedSoftmaxPolicy pol(m, 2 + trial % 3, 0.5 + trial, trial % 2 ? 0b101 : 0);
    check_fd(pol, random_features(3, rng), random_params(pol, rng));
  }
}

TEST_CASE("parity decoding equals the Z^n expectation form") {
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig m{4, 2};
    RawVqcPolicy pol(m, PostProcessing::qlocal_parity(4, 4));
    const auto params = random_params(pol, rng);
    const auto s = random_features(4, rng);
    const double z = Circuit(m).prepare(params, s).z_expectation(0b1111);
    const auto pi = pol.probs(s, params);
    CHECK(std::abs(pi[0] - (z + 1) / 2) < 1e-12);
    CHECK(std::abs(pi[1] - (-z + 1) / 2) < 1e-12);
  }
}

TEST_CASE("msb and q-local decoding equal Z on the leading qubits") {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    ModelConfig m{4, 1};
    const auto params = random_params(RawVqcPolicy(m, PostProcessing::msb_local(4)), rng);
    const auto s = random_features(4, rng);
    const auto state = Circuit(m).prepare(params, s);
    const auto msb = RawVqcPolicy(m, PostProcessing::msb_local(4)).probs(s, params);
    CHECK(std::abs(msb[0] - (state.z_expectation(0b1000) + 1) / 2) < 1e-12);
    for (int q = 1; q <= 4; ++q) {
      const auto pi = RawVqcPolicy(m, PostProcessing::qlocal_parity(4, q)).probs(s, params);
      const std::uint64_t mask = ((1u << q) - 1) << (4 - q);
      CHECK(std::abs(pi[0] - (state.z_expectation(mask) + 1) / 2) < 1e-12);
    }
  }
}

TEST_CASE("shot estimates stay within a binomial band") {
  Rng rng(6);
  ModelConfig m{3, 1};
  RawVqcPolicy exact(m, PostProcessing::global_recursive(3, 2));
  RawVqcPolicy shots(m, PostProcessing::global_recursive(3, 2), EvalMode::Shots, 4000);
  const auto params = random_params(exact, rng);
  const auto s = random_features(3, rng);
  const auto p = exact.probs(s, params);
  const auto est = shots.estimate_probs(s, params, rng);
  const double sigma = std::sqrt(p[0] * (1 - p[0]) / 4000);
  CHECK(std::abs(est[0] - p[0]) < 5 * sigma + 1e-12);
  CHECK(est[0] + est[1] == doctest::Approx(1.0));
  CHECK_THROWS(RawVqcPolicy(m, PostProcessing::msb_local(3), EvalMode::Shots, 0));
}

TEST_CASE("softmax policy basics") {
  ModelConfig m{2, 1};
  RestrictedSoftmaxPolicy zero_beta(m, 4, 0.0);
  Rng rng(7);
  auto params = random_params(zero_beta, rng);
  const std::vector<double> s{0.3, -0.4};
  for (double p : zero_beta.probs(s, params)) CHECK(p == doctest::Approx(0.25));
  for (double g : zero_beta.log_prob_grad(s, 1, params)) CHECK(g == 0.0);

  RestrictedSoftmaxPolicy pol(m, 3, 2.0);
  params = random_params(pol, rng);
  const double o = pol.observable(s, params);
  const auto pi = pol.probs(s, params);
  const auto w = std::span(params).last(3);
  double z = 0;
  for (double x : w) z += std::exp(2.0 * x * o);
  for (int a = 0; a < 3; ++a) CHECK(pi[static_cast<std::size_t>(a)] == doctest::Approx(std::exp(2.0 * w[static_cast<std::size_t>(a)] * o) / z));
  CHECK_THROWS(RestrictedSoftmaxPolicy(m, 1));
  CHECK_THROWS(RestrictedSoftmaxPolicy(m, 2, 1.0, 0b100));
}

TEST_CASE("sampled actions follow the exact distribution") {
  Rng rng(8);
  ModelConfig m{2, 1};
  RawVqcPolicy pol(m, PostProcessing::global_recursive(2, 4));
  const auto params = random_params(pol, rng);
  const std::vector<double> s{0.2, 0.7};
  const auto pi = pol.probs(s, params);
  std::vector<int> counts(4, 0);
  const int draws = 20000;
  for (int i = 0; i < draws; ++i) ++counts[static_cast<std::size_t>(pol.sample_action(s, params, rng))];
  for (std::size_t a = 0; a < 4; ++a) {
    const double sigma = std::sqrt(pi[a] * (1 - pi[a]) / draws);
    CHECK(std::abs(counts[a] / double(draws) - pi[a]) < 5 * sigma + 1e-12);
  }
}

TEST_CASE("mismatched inputs are rejected") {
  ModelConfig m{3, 1};
  RawVqcPolicy pol(m, PostProcessing::msb_local(3));
  const std::vector<double> params(pol.layout().total(), 0.1);
  CHECK_THROWS(pol.probs(std::vector<double>{0.1, 0.2}, params));
  CHECK_THROWS(pol.log_prob_grad(std::vector<double>{0.1, 0.2, 0.3}, 2, params));
  CHECK_THROWS(RawVqcPolicy(m, PostProcessing::msb_local(4)));
}
