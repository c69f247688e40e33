#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "qpg/envs.hpp"
#include "qpg/policy.hpp"
#include "qpg/rng.hpp"
#include "qpg/train.hpp"

namespace qpg {

/// Named distribution over circuit inputs (one value per qubit).
struct StateSampler {
  std::string name;
  std::function<std::vector<double>(Rng&)> draw;
};

/// Each component ~ N(mean, stddev).
StateSampler normal_state_sampler(int n_qubits, double mean = 0.0, double stddev = 0.5);
/// Each component ~ U[lo, hi).
StateSampler uniform_state_sampler(int n_qubits, double lo, double hi);
/// "normal" (N(0, 0.5)) or "uniform" (U[-pi, pi)).
StateSampler state_sampler_by_name(const std::string& name, int n_qubits);

/// Named distribution over flat policy parameters.
struct ParamSampler {
  std::string name;
  std::function<std::vector<double>(Rng&)> draw;
};

/// Every coordinate (theta, lambda, weights) ~ U[-pi, pi).
ParamSampler uniform_param_sampler(const ParamLayout& layout);

struct EmpiricalFim {
  Eigen::MatrixXd matrix;
  std::size_t samples = 0;
  std::string descriptor;
};

/// (1/k) sum over k draws s ~ sampler, a ~ pi(. | s) of g g^T with
/// g = grad ln pi(a | s). Action probabilities are exact.
EmpiricalFim empirical_fim(const Policy& policy, std::span<const double> params,
                           const StateSampler& sampler, std::size_t samples, Rng& rng);

struct SpectrumStats {
  static constexpr double kNearZero = 1e-7;
  static constexpr double kClamp = 1e-10;
  /// Lower edges 0, 0.5, ..., 3; the last bucket is [3, inf).
  static std::vector<double> bucket_edges();

  std::vector<double> eigenvalues;  // ascending, clamped
  std::vector<std::size_t> buckets;
  std::size_t near_zero_count = 0;
  double min_raw_eigenvalue = 0.0;

  double near_zero_fraction() const;

  /// Adds another matrix's eigenvalues to the pool.
  void merge(const SpectrumStats& other);
};

/// Symmetric eigendecomposition; values in [-1e-10, 0) are clamped to 0.
/// Throws std::domain_error on non-finite entries or on eigenvalues below
/// -1e-10.
SpectrumStats spectrum_stats(const Eigen::MatrixXd& fim);

/// max |F - F^T|.
double asymmetry(const Eigen::MatrixXd& matrix);

struct SurveyConfig {
  std::size_t param_sets = 100;
  std::size_t states_per_set = 100;
  std::uint64_t seed = 0;
  int jobs = 1;
};

/// One FIM per parameter draw, each from `states_per_set` state samples.
std::vector<EmpiricalFim> sample_fims(const Policy& policy, const ParamSampler& params,
                                      const StateSampler& states, const SurveyConfig& survey);

struct SpectrumSurvey {
  SpectrumStats pooled;
  double max_asymmetry = 0.0;
  double min_eigenvalue = 0.0;
  std::size_t matrices = 0;
};

SpectrumSurvey survey_spectrum(const std::vector<EmpiricalFim>& fims);

struct EffDimPoint {
  double data_size = 0.0;
  double eff_dim = 0.0;
  double normalized = 0.0;
};

struct EffDimReport {
  std::size_t num_params = 0;
  std::vector<EffDimPoint> points;
};

/// Rescales so the average trace equals the dimension. Throws
/// std::domain_error if the average trace is zero.
std::vector<Eigen::MatrixXd> normalize_fims(const std::vector<EmpiricalFim>& fims);

/// Monte Carlo effective dimension over already-normalized matrices.
EffDimReport effective_dimension_normalized(const std::vector<Eigen::MatrixXd>& fhat,
                                            std::span<const double> data_sizes);

EffDimReport effective_dimension(const std::vector<EmpiricalFim>& fims,
                                 std::span<const double> data_sizes);

/// Upper bound on the accuracy of a softmax policy over w_a <O> in a uniform
/// environment with M actions. Odd M uses (H_ceil(M/2) + H_floor(M/2)) / M.
double accuracy_bound(int num_actions);

/// pi(. | s) for every bandit state.
std::vector<std::vector<double>> bandit_policy_table(const ContextualBandit& env,
                                                     const FeatureEncoder& encoder,
                                                     const Policy& policy,
                                                     std::span<const double> params);

struct BoundComplianceReport {
  double bound = 0.0;
  double slack = 0.0;
  std::vector<std::uint64_t> seeds;
  std::vector<double> initial_accuracy;
  std::vector<double> final_accuracy;

  bool compliant() const;
};

/// Trains `policy` on `env` per seed and records exact accuracy of the
/// initial and final parameters. Throws std::invalid_argument if the bandit
/// is not uniform.
BoundComplianceReport bound_compliance_experiment(const ContextualBandit& env,
                                                  const Policy& policy, const Hyperparams& hyper,
                                                  std::span<const std::uint64_t> seeds,
                                                  double slack = 0.02, int jobs = 1);

void write_matrix_csv(std::ostream& out, const Eigen::MatrixXd& matrix);
void write_spectrum_csv(std::ostream& out, const SpectrumStats& stats);
void write_effdim_csv(std::ostream& out, const EffDimReport& report);

}  // namespace qpg
