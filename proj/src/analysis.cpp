#include "qpg/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <numbers>
#include <ostream>
#include <stdexcept>

#include "qpg/csv.hpp"
#include "qpg/parallel.hpp"
#include "qpg/qsim.hpp"

namespace qpg {

StateSampler normal_state_sampler(int n_qubits, double mean, double stddev) {
  const auto n = static_cast<std::size_t>(n_qubits);
  return {"normal(" + format_double(mean) + "," + format_double(stddev) + ")",
          [n, mean, stddev](Rng& rng) {
            std::vector<double> s(n);
            for (auto& v : s) v = rng.normal(mean, stddev);
            return s;
          }};
}

StateSampler uniform_state_sampler(int n_qubits, double lo, double hi) {
  const auto n = static_cast<std::size_t>(n_qubits);
  return {"uniform[" + format_double(lo) + "," + format_double(hi) + ")", [n, lo, hi](Rng& rng) {
            std::vector<double> s(n);
            for (auto& v : s) v = rng.uniform(lo, hi);
            return s;
          }};
}

StateSampler state_sampler_by_name(const std::string& name, int n_qubits) {
  if (name == "normal") return normal_state_sampler(n_qubits, 0.0, 0.5);
  if (name == "uniform") return uniform_state_sampler(n_qubits, -std::numbers::pi, std::numbers::pi);
  throw std::invalid_argument("unknown state sampler '" + name + "' (expected normal|uniform)");
}

ParamSampler uniform_param_sampler(const ParamLayout& layout) {
  const std::size_t p = layout.total();
  return {"uniform[-pi,pi)", [p](Rng& rng) {
            std::vector<double> v(p);
            for (auto& x : v) x = rng.uniform(-std::numbers::pi, std::numbers::pi);
            return v;
          }};
}

EmpiricalFim empirical_fim(const Policy& policy, std::span<const double> params,
                           const StateSampler& sampler, std::size_t samples, Rng& rng) {
  if (samples == 0) throw std::invalid_argument("empirical_fim: need at least one sample");
  const auto p = static_cast<Eigen::Index>(policy.layout().total());
  if (params.size() != static_cast<std::size_t>(p)) {
    throw std::invalid_argument("empirical_fim: parameter vector has wrong length");
  }
  EmpiricalFim fim{Eigen::MatrixXd::Zero(p, p), samples, sampler.name};
  Eigen::VectorXd g(p);
  for (std::size_t i = 0; i < samples; ++i) {
    const auto s = sampler.draw(rng);
    const auto pi = policy.probs(s, params);
    const int a = static_cast<int>(sample_index(pi, rng));
    const auto grad = policy.log_prob_grad(s, a, params);
    for (Eigen::Index k = 0; k < p; ++k) g[k] = grad[static_cast<std::size_t>(k)];
    fim.matrix.selfadjointView<Eigen::Lower>().rankUpdate(g);
  }
  fim.matrix = fim.matrix.selfadjointView<Eigen::Lower>();
  fim.matrix /= static_cast<double>(samples);
  return fim;
}

std::vector<double> SpectrumStats::bucket_edges() { return {0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0}; }

namespace {

std::size_t bucket_of(double value) {
  const auto edges = SpectrumStats::bucket_edges();
  std::size_t b = 0;
  while (b + 1 < edges.size() && value >= edges[b + 1]) ++b;
  return b;
}

}  // namespace

double SpectrumStats::near_zero_fraction() const {
  return eigenvalues.empty() ? 0.0
                             : static_cast<double>(near_zero_count) /
                                   static_cast<double>(eigenvalues.size());
}

void SpectrumStats::merge(const SpectrumStats& other) {
  if (other.eigenvalues.empty()) return;
  min_raw_eigenvalue = eigenvalues.empty() ? other.min_raw_eigenvalue
                                           : std::min(min_raw_eigenvalue, other.min_raw_eigenvalue);
  std::vector<double> pooled;
  pooled.reserve(eigenvalues.size() + other.eigenvalues.size());
  std::merge(eigenvalues.begin(), eigenvalues.end(), other.eigenvalues.begin(),
             other.eigenvalues.end(), std::back_inserter(pooled));
  eigenvalues = std::move(pooled);
  if (buckets.empty()) buckets.assign(bucket_edges().size(), 0);
  for (std::size_t b = 0; b < other.buckets.size(); ++b) buckets[b] += other.buckets[b];
  near_zero_count += other.near_zero_count;
}

SpectrumStats spectrum_stats(const Eigen::MatrixXd& fim) {
  if (fim.rows() != fim.cols()) throw std::invalid_argument("spectrum: matrix is not square");
  if (!fim.allFinite()) throw std::domain_error("spectrum: non-finite matrix entries");
  SpectrumStats stats;
  stats.buckets.assign(SpectrumStats::bucket_edges().size(), 0);
  if (fim.rows() == 0) return stats;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(fim, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw std::runtime_error("spectrum: eigensolver failed");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  stats.min_raw_eigenvalue = ev.minCoeff();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    double v = ev[i];
    if (v < 0.0) {
      if (v < -SpectrumStats::kClamp) {
        throw std::domain_error("spectrum: eigenvalue " + format_double(v) +
                                " below PSD tolerance");
      }
      v = 0.0;
    }
    stats.eigenvalues.push_back(v);
    ++stats.buckets[bucket_of(v)];
    if (v < SpectrumStats::kNearZero) ++stats.near_zero_count;
  }
  std::sort(stats.eigenvalues.begin(), stats.eigenvalues.end());
  return stats;
}

double asymmetry(const Eigen::MatrixXd& m) {
  if (m.size() == 0) return 0.0;
  return (m - m.transpose()).cwiseAbs().maxCoeff();
}

std::vector<EmpiricalFim> sample_fims(const Policy& policy, const ParamSampler& params,
                                      const StateSampler& states, const SurveyConfig& survey) {
  if (survey.param_sets == 0 || survey.states_per_set == 0) {
    throw std::invalid_argument("fim survey: need >= 1 parameter set and >= 1 state");
  }
  std::vector<EmpiricalFim> out(survey.param_sets);
  parallel_for(out.size(), survey.jobs, [&](std::size_t i) {
    Rng rng = Rng::derive(survey.seed, i);
    const auto theta = params.draw(rng);
    out[i] = empirical_fim(policy, theta, states, survey.states_per_set, rng);
    out[i].descriptor = "states=" + states.name + ";params=" + params.name;
  });
  return out;
}

SpectrumSurvey survey_spectrum(const std::vector<EmpiricalFim>& fims) {
  SpectrumSurvey s;
  s.pooled.buckets.assign(SpectrumStats::bucket_edges().size(), 0);
  bool first = true;
  for (const auto& f : fims) {
    s.max_asymmetry = std::max(s.max_asymmetry, asymmetry(f.matrix));
    const auto stats = spectrum_stats(f.matrix);
    s.min_eigenvalue =
        first ? stats.min_raw_eigenvalue : std::min(s.min_eigenvalue, stats.min_raw_eigenvalue);
    first = false;
    s.pooled.merge(stats);
    ++s.matrices;
  }
  return s;
}

std::vector<Eigen::MatrixXd> normalize_fims(const std::vector<EmpiricalFim>& fims) {
  if (fims.empty()) throw std::invalid_argument("effective dimension: no FIM samples");
  double trace = 0.0;
  for (const auto& f : fims) trace += f.matrix.trace();
  trace /= static_cast<double>(fims.size());
  if (!(trace > 0.0)) throw std::domain_error("effective dimension: average FIM trace is zero");
  const double dim = static_cast<double>(fims.front().matrix.rows());
  std::vector<Eigen::MatrixXd> out;
  out.reserve(fims.size());
  for (const auto& f : fims) out.push_back(f.matrix * (dim / trace));
  return out;
}

EffDimReport effective_dimension_normalized(const std::vector<Eigen::MatrixXd>& fhat,
                                            std::span<const double> data_sizes) {
  if (fhat.empty()) throw std::invalid_argument("effective dimension: no FIM samples");
  const Eigen::Index p = fhat.front().rows();
  EffDimReport report;
  report.num_params = static_cast<std::size_t>(p);
  const double log_k = std::log(static_cast<double>(fhat.size()));
  for (double n : data_sizes) {
    if (!(n > std::numbers::e)) {
      throw std::invalid_argument("effective dimension: data size must exceed e");
    }
    const double kappa = n / (2.0 * std::numbers::pi * std::log(n));
    if (!(kappa > 1.0)) {
      throw std::invalid_argument("effective dimension: data size " + format_double(n) +
                                  " gives n / (2 pi ln n) <= 1");
    }
    std::vector<double> z;
    z.reserve(fhat.size());
    for (const auto& f : fhat) {
      Eigen::MatrixXd m = Eigen::MatrixXd::Identity(p, p) + kappa * f;
      Eigen::LLT<Eigen::MatrixXd> llt(m);
      if (llt.info() != Eigen::Success) {
        throw std::domain_error("effective dimension: I + kappa F is not positive definite");
      }
      // log det = 2 sum log diag(L); half of it is the log square root.
      z.push_back(llt.matrixLLT().diagonal().array().log().sum());
    }
    const double top = *std::max_element(z.begin(), z.end());
    double acc = 0.0;
    for (double v : z) acc += std::exp(v - top);
    const double lse = top + std::log(acc);
    const double ed = 2.0 * (lse - log_k) / std::log(kappa);
    report.points.push_back({n, ed, p > 0 ? ed / static_cast<double>(p) : 0.0});
  }
  return report;
}

EffDimReport effective_dimension(const std::vector<EmpiricalFim>& fims,
                                 std::span<const double> data_sizes) {
  return effective_dimension_normalized(normalize_fims(fims), data_sizes);
}

double accuracy_bound(int num_actions) {
  if (num_actions < 2) throw std::invalid_argument("accuracy_bound: need at least 2 actions");
  auto harmonic = [](int k) {
    double h = 0.0;
    for (int i = k; i >= 1; --i) h += 1.0 / i;
    return h;
  };
  const int half = num_actions / 2;
  if (num_actions % 2 == 0) return 2.0 * harmonic(half) / num_actions;
  return (harmonic(half + 1) + harmonic(half)) / num_actions;
}

std::vector<std::vector<double>> bandit_policy_table(const ContextualBandit& env,
                                                     const FeatureEncoder& encoder,
                                                     const Policy& policy,
                                                     std::span<const double> params) {
  std::vector<std::vector<double>> table;
  table.reserve(static_cast<std::size_t>(env.num_states()));
  for (int s = 0; s < env.num_states(); ++s) {
    table.push_back(policy.probs(encoder.encode({static_cast<double>(s)}), params));
  }
  return table;
}

bool BoundComplianceReport::compliant() const {
  return std::all_of(final_accuracy.begin(), final_accuracy.end(),
                     [this](double a) { return a <= bound + slack; });
}

BoundComplianceReport bound_compliance_experiment(const ContextualBandit& env,
                                                  const Policy& policy, const Hyperparams& hyper,
                                                  std::span<const std::uint64_t> seeds,
                                                  double slack, int jobs) {
  if (!env.is_uniform()) {
    throw std::invalid_argument("bound compliance: environment is not uniform");
  }
  const auto encoder = FeatureEncoder::binary(policy.model().n_qubits, env.num_states());
  BoundComplianceReport report;
  report.bound = accuracy_bound(env.num_actions());
  report.slack = slack;
  report.seeds.assign(seeds.begin(), seeds.end());
  report.initial_accuracy.resize(seeds.size());
  report.final_accuracy.resize(seeds.size());
  parallel_for(seeds.size(), jobs, [&](std::size_t i) {
    const auto run = train_run(env, encoder, policy, hyper, seeds[i]);
    report.initial_accuracy[i] =
        env.accuracy(bandit_policy_table(env, encoder, policy, run.initial_params));
    report.final_accuracy[i] =
        env.accuracy(bandit_policy_table(env, encoder, policy, run.final_params));
  });
  return report;
}

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& matrix) {
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c) {
      if (c) out << ',';
      out << format_double(matrix(r, c));
    }
    out << '\n';
  }
}

void write_spectrum_csv(std::ostream& out, const SpectrumStats& stats) {
  const auto edges = SpectrumStats::bucket_edges();
  out << "bucket_low,bucket_high,count\n";
  for (std::size_t b = 0; b < edges.size(); ++b) {
    out << format_double(edges[b]) << ','
        << (b + 1 < edges.size() ? format_double(edges[b + 1]) : std::string("inf")) << ','
        << (b < stats.buckets.size() ? stats.buckets[b] : 0) << '\n';
  }
}

void write_effdim_csv(std::ostream& out, const EffDimReport& report) {
  out << "data_size,eff_dim,normalized\n";
  for (const auto& p : report.points) {
    out << format_double(p.data_size) << ',' << format_double(p.eff_dim) << ','
        << format_double(p.normalized) << '\n';
  }
}

}  // namespace qpg
