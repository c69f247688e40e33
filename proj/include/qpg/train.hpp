#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "qpg/envs.hpp"
#include "qpg/policy.hpp"
#include "qpg/rng.hpp"

namespace qpg {

struct Step {
  std::vector<double> features;
  int action = 0;
  double reward = 0.0;
};

struct Trajectory {
  std::vector<Step> steps;

  std::size_t size() const { return steps.size(); }
  double total_reward() const;
  std::vector<double> rewards() const;
};

struct LearningRates {
  double theta = 0.1;
  double lambda = 0.1;
  double weights = 0.1;
};

struct Hyperparams {
  LearningRates rates;
  double gamma = 0.99;
  int batch_size = 1;
  int episodes = 1000;
  ThetaInit init = ThetaInit::Uniform;
  double theta_stddev = 0.1;
  double weight_init = 1.0;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;
};

/// G_t = r_t + gamma * G_{t+1}. Throws on an empty sequence.
std::vector<double> discounted_returns(std::span<const double> rewards, double gamma);

/// Runs `batch_size` complete episodes. Episode i draws from rng stream
/// `first_stream + i`, so batches are reproducible for any `jobs`.
std::vector<Trajectory> collect_batch(const Environment& env, const FeatureEncoder& encoder,
                                      const Policy& policy, std::span<const double> params,
                                      int batch_size, std::uint64_t seed,
                                      std::uint64_t first_stream, int jobs = 1);

/// (1/B) sum_tau sum_t grad ln pi(a_t | s_t) * G_t. Ascent direction.
std::vector<double> reinforce_gradient(const std::vector<Trajectory>& batch, const Policy& policy,
                                       std::span<const double> params, double gamma,
                                       int jobs = 1);

/// Per-coordinate learning rates matching a policy parameter layout.
std::vector<double> rate_vector(const ParamLayout& layout, const LearningRates& rates);

/// Adam with the AMSGrad running maximum of the second moment, used for
/// gradient ascent.
class AdamAmsgrad {
 public:
  explicit AdamAmsgrad(std::size_t size, double beta1 = 0.9, double beta2 = 0.999,
                       double eps = 1e-8);

  void step(std::span<double> params, std::span<const double> gradient,
            std::span<const double> rates);

  std::size_t size() const { return m_.size(); }
  std::uint64_t steps() const { return t_; }
  const std::vector<double>& first_moment() const { return m_; }
  const std::vector<double>& second_moment() const { return v_; }
  const std::vector<double>& max_second_moment() const { return vmax_; }

 private:
  double beta1_, beta2_, eps_;
  std::uint64_t t_ = 0;
  std::vector<double> m_, v_, vmax_;
};

struct EpisodeRecord {
  int episode = 0;
  double reward = 0.0;
  double avg20 = 0.0;
};

struct TrainResult {
  std::vector<EpisodeRecord> records;
  /// evaluator(params) before each episode's batch update, if one was given.
  std::vector<double> evaluations;
  std::vector<double> initial_params;
  std::vector<double> final_params;
};

using Evaluator = std::function<double(std::span<const double> params)>;

/// Full REINFORCE run; a pure function of its arguments.
TrainResult train_run(const Environment& env, const FeatureEncoder& encoder, const Policy& policy,
                      const Hyperparams& hyper, std::uint64_t seed,
                      const Evaluator& evaluator = {}, int jobs = 1);

/// Mean of the last min(window, i + 1) values ending at each index.
std::vector<double> trailing_mean(std::span<const double> values, std::size_t window);

void write_learning_curve_csv(std::ostream& out, const std::vector<EpisodeRecord>& records);

/// episode,mean,std of avg20 across runs (population std).
void write_aggregate_csv(std::ostream& out, const std::vector<std::vector<EpisodeRecord>>& runs);

}  // namespace qpg
