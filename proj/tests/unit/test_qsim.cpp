#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <numbers>

#include "qpg/qsim.hpp"

using namespace qpg;
using cd = std::complex<double>;
using Mat = Eigen::MatrixXcd;

namespace {

// Dense operator for a one-qubit gate on `qubit`, built by Kronecker products
// with qubit n-1 as the leftmost factor.
Mat embed(const Eigen::Matrix2cd& g, int qubit, int n) {
  Mat out = Mat::Identity(1, 1);
  for (int q = n - 1; q >= 0; --q) {
    const Mat f = q == qubit ? Mat(g) : Mat(Mat::Identity(2, 2));
    Mat next(out.rows() * 2, out.cols() * 2);
    for (int r = 0; r < out.rows(); ++r)
      for (int c = 0; c < out.cols(); ++c) next.block(2 * r, 2 * c, 2, 2) = out(r, c) * f;
    out = next;
  }
  return out;
}

Eigen::Matrix2cd ry(double t) {
  Eigen::Matrix2cd m;
  m << std::cos(t / 2), -std::sin(t / 2), std::sin(t / 2), std::cos(t / 2);
  return m;
}

Eigen::Matrix2cd rz(double t) {
  Eigen::Matrix2cd m;
  m << std::polar(1.0, -t / 2), 0, 0, std::polar(1.0, t / 2);
  return m;
}

Mat controlled_diag(int n, int a, int b, bool cx) {
  const int dim = 1 << n;
  Mat m = Mat::Zero(dim, dim);
  for (int i = 0; i < dim; ++i) {
    const bool ca = (i >> a) & 1, cb = (i >> b) & 1;
    if (cx) {
      const int j = ca ? i ^ (1 << b) : i;
      m(j, i) = 1;
    } else {
      m(i, i) = (ca && cb) ? -1 : 1;
    }
  }
  return m;
}

Eigen::VectorXcd as_vector(const Statevector& s) {
  Eigen::VectorXcd v(static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.dim(); ++i) v[static_cast<Eigen::Index>(i)] = s[i];
  return v;
}

}  // namespace

TEST_CASE("zero state is |0...0>") {
  const auto s = zero_state(3);
  CHECK(s.dim() == 8);
  CHECK(s[0] == cd(1, 0));
  for (std::size_t i = 1; i < 8; ++i) CHECK(s[i] == cd(0, 0));
  CHECK(s.norm_squared() == doctest::Approx(1.0));
}

TEST_CASE("gate kernels agree with dense Kronecker operators") {
  const int n = 3;
  Rng rng(7);
  Statevector s(n);
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(8);
  v[0] = 1;
  for (int round = 0; round < 20; ++round) {
    const int q = static_cast<int>(rng.below(n));
    int p = static_cast<int>(rng.below(n - 1));
    if (p >= q) ++p;
    const double t = rng.uniform(-4, 4);
    switch (round % 5) {
      case 0: s.apply_ry(q, t); v = embed(ry(t), q, n) * v; break;
      case 1: s.apply_rz(q, t); v = embed(rz(t), q, n) * v; break;
      case 2: {
        s.apply_h(q);
        Eigen::Matrix2cd h;
        h << 1, 1, 1, -1;
        v = embed(h / std::sqrt(2.0), q, n) * v;
        break;
      }
      case 3: s.apply_cz(q, p); v = controlled_diag(n, q, p, false) * v; break;
      case 4: s.apply_cx(q, p); v = controlled_diag(n, q, p, true) * v; break;
    }
  }
  CHECK((as_vector(s) - v).norm() < 1e-12);
}

TEST_CASE("Ry(pi) maps |0> to |1> with a positive amplitude") {
  Statevector s(1);
  s.apply_ry(0, std::numbers::pi);
  CHECK(std::abs(s[1] - cd(1, 0)) < 1e-15);
  CHECK(std::abs(s[0]) < 1e-15);
}

TEST_CASE("qubit index is bit position in the basis index") {
  Statevector s(3);
  s.apply_ry(2, std::numbers::pi);
  const auto p = s.probabilities();
  CHECK(p[4] == doctest::Approx(1.0));
}

TEST_CASE("z expectation on Bell-like state") {
  Statevector s(2);
  s.apply_h(0);
  s.apply_cx(0, 1);
  CHECK(s.z_expectation(0b11) == doctest::Approx(1.0));
  CHECK(s.z_expectation(0b01) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(s.z_expectation(0) == doctest::Approx(1.0));
}

TEST_CASE("invalid qubit arguments throw") {
  Statevector s(2);
  CHECK_THROWS_AS(s.apply_ry(2, 0.1), std::out_of_range);
  CHECK_THROWS_AS(s.apply_rz(-1, 0.1), std::out_of_range);
  CHECK_THROWS(s.apply_cz(1, 1));
  CHECK_THROWS(s.apply_cx(0, 0));
  CHECK_THROWS(Statevector(0));
  CHECK_THROWS(Statevector(Statevector::kMaxQubits + 1));
}

TEST_CASE("from_amplitudes validates size and norm") {
  CHECK_THROWS(Statevector::from_amplitudes({1, 0, 0}));
  CHECK_THROWS(Statevector::from_amplitudes({1, 1}));
  const auto s = Statevector::from_amplitudes({cd(0, 1), 0});
  CHECK(s.num_qubits() == 1);
}

TEST_CASE("sampling frequencies follow the Born rule") {
  Statevector s(2);
  s.apply_ry(0, 2 * std::acos(std::sqrt(0.3)));  // P(b0 = 0) = 0.3
  Rng rng(11);
  const std::size_t shots = 20000;
  const auto out = s.sample(shots, rng);
  REQUIRE(out.size() == shots);
  std::size_t zeros = 0;
  for (auto b : out) zeros += (b == 0);
  // 5 sigma binomial band.
  const double sigma = std::sqrt(0.3 * 0.7 / shots);
  CHECK(std::abs(static_cast<double>(zeros) / shots - 0.3) < 5 * sigma);
  CHECK_THROWS(s.sample(0, rng));
}

TEST_CASE("sampling is deterministic for a fixed seed") {
  Statevector s(3);
  for (int q = 0; q < 3; ++q) s.apply_h(q);
  Rng a(5), b(5);
  CHECK(s.sample(100, a) == s.sample(100, b));
}

TEST_CASE("unitarity preserves norm over long random circuits") {
  Statevector s(5);
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const int q = static_cast<int>(rng.below(5));
    s.apply_ry(q, rng.uniform(-3, 3));
    s.apply_rz(q, rng.uniform(-3, 3));
    s.apply_cz(q, (q + 1) % 5);
  }
  CHECK(std::abs(s.norm_squared() - 1.0) < 1e-12);
}

TEST_CASE("sample_index respects zero-probability entries") {
  Rng rng(1);
  const std::vector<double> p{0.0, 1.0, 0.0};
  for (int i = 0; i < 100; ++i) CHECK(sample_index(p, rng) == 1);
  CHECK_THROWS(sample_index(std::vector<double>{}, rng));
}
