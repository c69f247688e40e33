#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "qpg/ansatz.hpp"

using namespace qpg;

namespace {

// Gate-by-gate construction straight from the documented layer layout.
Statevector reference_state(const ModelConfig& c, const ParamSet& p, const std::vector<double>& s) {
  const int n = c.n_qubits;
  Statevector sv(n);
  if (c.hadamard_prefix)
    for (int q = 0; q < n; ++q) sv.apply_h(q);
  auto v_block = [&](int l) {
    for (int q = 0; q < n; ++q) {
      sv.apply_rz(q, p.theta[static_cast<std::size_t>(2 * (l * n + q))]);
      sv.apply_ry(q, p.theta[static_cast<std::size_t>(2 * (l * n + q) + 1)]);
    }
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (c.entangler == Entangler::CZ) sv.apply_cz(i, j);
        else sv.apply_cx(i, j);
      }
  };
  v_block(0);
  for (int l = 1; l <= c.depth; ++l) {
    for (int q = 0; q < n; ++q) {
      const auto k = static_cast<std::size_t>(2 * ((l - 1) * n + q));
      sv.apply_ry(q, p.lambda[k] * s[static_cast<std::size_t>(q)]);
      sv.apply_rz(q, p.lambda[k + 1] * s[static_cast<std::size_t>(q)]);
    }
    v_block(l);
  }
  return sv;
}

double prob0(const Statevector& s) { return std::norm(s[0]); }

}  // namespace

TEST_CASE("parameter counts follow 2n(d+1) and 2nd") {
  CHECK(param_counts({4, 1}) == ParamCounts{16, 8});
  CHECK(param_counts({3, 4}) == ParamCounts{30, 24});
  CHECK_THROWS(param_counts({0, 1}));
  CHECK_THROWS(param_counts({2, 0}));
}

TEST_CASE("zero parameters prepare |0...0>") {
  for (auto ent : {Entangler::CZ, Entangler::CX}) {
    ModelConfig c{3, 2, ent};
    const auto s = prepare_state(c, ParamSet::zeros(c), std::vector<double>{0.3, -0.2, 0.9});
    CHECK(prob0(s) == doctest::Approx(1.0));
  }
}

TEST_CASE("circuit matches the layer-by-layer reference") {
  Rng rng(21);
  for (auto ent : {Entangler::CZ, Entangler::CX}) {
    for (bool h : {false, true}) {
      ModelConfig c{3, 2, ent, h};
      auto p = init_params(c, ThetaInit::Uniform, rng);
      for (auto& l : p.lambda) l = rng.uniform(-2, 2);
      std::vector<double> s{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
      const auto a = prepare_state(c, p, s);
      const auto b = reference_state(c, p, s);
      for (std::size_t i = 0; i < a.dim(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-13);
    }
  }
}

TEST_CASE("scaling parameters act linearly on the encoding angle") {
  Rng rng(5);
  ModelConfig c{3, 1};
  auto p = init_params(c, ThetaInit::Uniform, rng);
  for (auto& l : p.lambda) l = rng.uniform(-2, 2);
  const std::vector<double> s{0.4, -0.7, 0.25};
  for (int q = 0; q < 3; ++q) {
    auto doubled = p;
    doubled.lambda[static_cast<std::size_t>(2 * q)] *= 2;
    doubled.lambda[static_cast<std::size_t>(2 * q + 1)] *= 2;
    auto s2 = s;
    s2[static_cast<std::size_t>(q)] *= 2;
    const auto a = prepare_state(c, doubled, s);
    const auto b = prepare_state(c, p, s2);
    for (std::size_t i = 0; i < a.dim(); ++i) CHECK(std::abs(a[i] - b[i]) < 1e-12);
  }
}

TEST_CASE("gate counts") {
  Circuit c3({3, 4, Entangler::CX});
  CHECK(c3.entangler_count() == 15);
  CHECK(c3.rotation_count() == 30 + 24);
  Circuit c4({4, 1});
  CHECK(c4.entangler_count() == 12);
}

TEST_CASE("init_params ranges") {
  Rng rng(3);
  ModelConfig c{4, 2};
  const auto u = init_params(c, ThetaInit::Uniform, rng);
  for (double t : u.theta) {
    CHECK(t > -std::numbers::pi);
    CHECK(t <= std::numbers::pi);
  }
  for (double l : u.lambda) CHECK(l == 1.0);
  const auto nrm = init_params(c, ThetaInit::Normal, rng, 0.1);
  for (double t : nrm.theta) CHECK(std::abs(t) < 0.6);  // 6 sigma
}

TEST_CASE("shift plan coefficients") {
  ModelConfig c{2, 1};
  auto p = ParamSet::zeros(c);
  const std::vector<double> s{0.5, 0.0};
  const auto t = shift_plan(c, p, 0, s);
  REQUIRE(t.size() == 2);
  CHECK(t[0].coefficient == 0.5);
  CHECK(t[1].coefficient == -0.5);
  CHECK(t[0].params.theta[0] == doctest::Approx(std::numbers::pi / 2));
  // lambda index 0 feeds qubit 0 (s = 0.5): shift pi / (2 s) = pi.
  const auto l0 = shift_plan(c, p, 8, s);
  CHECK(l0[0].coefficient == 0.25);
  CHECK(l0[0].params.lambda[0] == doctest::Approx(std::numbers::pi));
  // lambda index 2 feeds qubit 1 with s = 0.
  const auto l2 = shift_plan(c, p, 10, s);
  CHECK(l2[0].coefficient == 0.0);
  CHECK(l2[1].coefficient == 0.0);
  CHECK_THROWS_AS(shift_plan(c, p, 12, s), std::out_of_range);
}

TEST_CASE("shift jacobian matches central finite differences") {
  Rng rng(9);
  for (int trial = 0; trial < 10; ++trial) {
    ModelConfig c{3, 2, trial % 2 ? Entangler::CX : Entangler::CZ};
    Circuit circ(c);
    auto p = init_params(c, ThetaInit::Uniform, rng);
    for (auto& l : p.lambda) l = rng.uniform(-2, 2);
    std::vector<double> s{rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
    const StateFunctional observe = [](const Statevector& sv) { return sv.probabilities(); };
    const auto jac = shift_jacobian(circ, p, s, observe);
    const double h = 1e-5;
    for (std::size_t j = 0; j < p.size(); ++j) {
      auto plus = p, minus = p;
      plus.at(j) += h;
      minus.at(j) -= h;
      const auto a = circ.prepare(plus, s).probabilities();
      const auto b = circ.prepare(minus, s).probabilities();
      for (std::size_t k = 0; k < a.size(); ++k) {
        CHECK(jac[j][k] == doctest::Approx((a[k] - b[k]) / (2 * h)).epsilon(1e-6).scale(1));
      }
    }
  }
}

TEST_CASE("parameter checkpoint round trip is exact") {
  Rng rng(4);
  ModelConfig c{3, 2, Entangler::CX, true};
  const auto p = init_params(c, ThetaInit::Uniform, rng);
  const std::vector<double> extra{0.1, 1.0 / 3.0};
  std::stringstream io;
  write_params(io, c, p, extra);
  const auto back = read_params(io);
  CHECK(back.config == c);
  CHECK(back.params.theta == p.theta);
  CHECK(back.params.lambda == p.lambda);
  CHECK(back.extra == extra);
}

TEST_CASE("malformed checkpoints are rejected") {
  std::stringstream no_header("0.5\n");
  CHECK_THROWS(read_params(no_header));
  std::stringstream short_body("# qpg-params n=1 d=1 entangler=cz hadamard=0 extra=0\n0.1\n");
  CHECK_THROWS(read_params(short_body));
}

TEST_CASE("wrong parameter or feature counts throw") {
  Circuit c({2, 1});
  CHECK_THROWS(c.prepare(std::vector<double>(3, 0.0), std::vector<double>{0, 0}));
  CHECK_THROWS(c.prepare(std::vector<double>(12, 0.0), std::vector<double>{0}));
}
