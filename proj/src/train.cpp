#include "qpg/train.hpp"

#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <string>

#include "qpg/csv.hpp"
#include "qpg/parallel.hpp"

namespace qpg {

double Trajectory::total_reward() const {
  double total = 0.0;
  for (const auto& s : steps) total += s.reward;
  return total;
}

std::vector<double> Trajectory::rewards() const {
  std::vector<double> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.reward);
  return out;
}

void Hyperparams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("training.") + name + " must be > 0");
    }
  };
  // Zero rates are allowed: they freeze a block.
  auto non_negative = [](double v, const char* name) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw std::invalid_argument(std::string("training.") + name + " must be >= 0");
    }
  };
  non_negative(rates.theta, "lr_theta");
  non_negative(rates.lambda, "lr_lambda");
  non_negative(rates.weights, "lr_weights");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("training.gamma must be in [0, 1]");
  if (batch_size < 1) throw std::invalid_argument("training.batch_size must be >= 1");
  if (episodes < 1) throw std::invalid_argument("training.episodes must be >= 1");
  positive(theta_stddev, "theta_stddev");
}

std::vector<double> discounted_returns(std::span<const double> rewards, double gamma) {
  if (rewards.empty()) throw std::invalid_argument("discounted_returns: empty reward sequence");
  std::vector<double> out(rewards.size());
  double g = 0.0;
  for (std::size_t t = rewards.size(); t-- > 0;) {
    g = rewards[t] + gamma * g;
    out[t] = g;
  }
  return out;
}

namespace {

Trajectory run_episode(const Environment& proto, const FeatureEncoder& encoder,
                       const Policy& policy, std::span<const double> params, Rng rng) {
  auto env = proto.clone();
  Trajectory traj;
  Observation obs = env->reset(rng);
  for (int t = 0; t < env->horizon(); ++t) {
    auto features = encoder.encode(obs);
    const int action = policy.sample_action(features, params, rng);
    StepResult result = env->step(action, rng);
    traj.steps.push_back({std::move(features), action, result.reward});
    if (result.done) break;
    obs = std::move(result.observation);
  }
  return traj;
}

}  // namespace

std::vector<Trajectory> collect_batch(const Environment& env, const FeatureEncoder& encoder,
                                      const Policy& policy, std::span<const double> params,
                                      int batch_size, std::uint64_t seed,
                                      std::uint64_t first_stream, int jobs) {
  if (batch_size < 1) throw std::invalid_argument("collect_batch: batch_size must be >= 1");
  if (encoder.output_size() != policy.model().n_qubits) {
    throw std::invalid_argument("collect_batch: encoder emits " +
                                std::to_string(encoder.output_size()) + " features for " +
                                std::to_string(policy.model().n_qubits) + " qubits");
  }
  if (env.num_actions() != policy.num_actions()) {
    throw std::invalid_argument("collect_batch: environment has " +
                                std::to_string(env.num_actions()) + " actions, policy " +
                                std::to_string(policy.num_actions()));
  }
  std::vector<Trajectory> batch(static_cast<std::size_t>(batch_size));
  parallel_for(batch.size(), jobs, [&](std::size_t i) {
    batch[i] = run_episode(env, encoder, policy, params, Rng::derive(seed, first_stream + i));
  });
  return batch;
}

std::vector<double> reinforce_gradient(const std::vector<Trajectory>& batch, const Policy& policy,
                                       std::span<const double> params, double gamma, int jobs) {
  if (batch.empty()) throw std::invalid_argument("reinforce_gradient: empty batch");
  const std::size_t p = policy.layout().total();
  std::vector<std::vector<double>> per_traj(batch.size(), std::vector<double>(p, 0.0));
  parallel_for(batch.size(), jobs, [&](std::size_t i) {
    const auto& traj = batch[i];
    if (traj.steps.empty()) return;
    const auto rewards = traj.rewards();
    const auto returns = discounted_returns(rewards, gamma);
    auto& acc = per_traj[i];
    for (std::size_t t = 0; t < traj.steps.size(); ++t) {
      if (returns[t] == 0.0) continue;
      const auto& step = traj.steps[t];
      const auto g = policy.log_prob_grad(step.features, step.action, params);
      for (std::size_t k = 0; k < p; ++k) acc[k] += g[k] * returns[t];
    }
  });
  std::vector<double> grad(p, 0.0);
  for (const auto& acc : per_traj) {
    for (std::size_t k = 0; k < p; ++k) grad[k] += acc[k];
  }
  const double scale = 1.0 / static_cast<double>(batch.size());
  for (auto& g : grad) g *= scale;
  return grad;
}

std::vector<double> rate_vector(const ParamLayout& layout, const LearningRates& rates) {
  std::vector<double> out;
  out.reserve(layout.total());
  out.insert(out.end(), layout.theta, rates.theta);
  out.insert(out.end(), layout.lambda, rates.lambda);
  out.insert(out.end(), layout.weights, rates.weights);
  return out;
}

AdamAmsgrad::AdamAmsgrad(std::size_t size, double beta1, double beta2, double eps)
    : beta1_(beta1), beta2_(beta2), eps_(eps), m_(size, 0.0), v_(size, 0.0), vmax_(size, 0.0) {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0) || !(eps > 0.0)) {
    throw std::invalid_argument("adam: need beta1, beta2 in [0, 1) and eps > 0");
  }
}

void AdamAmsgrad::step(std::span<double> params, std::span<const double> gradient,
                       std::span<const double> rates) {
  if (params.size() != m_.size() || gradient.size() != m_.size() || rates.size() != m_.size()) {
    throw std::invalid_argument("adam: shape mismatch (state " + std::to_string(m_.size()) +
                                ", params " + std::to_string(params.size()) + ", gradient " +
                                std::to_string(gradient.size()) + ", rates " +
                                std::to_string(rates.size()) + ")");
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const double sqrt_bc2 = std::sqrt(bc2);
  for (std::size_t k = 0; k < params.size(); ++k) {
    const double g = gradient[k];
    m_[k] = beta1_ * m_[k] + (1.0 - beta1_) * g;
    v_[k] = beta2_ * v_[k] + (1.0 - beta2_) * g * g;
    vmax_[k] = std::max(vmax_[k], v_[k]);
    const double denom = std::sqrt(vmax_[k]) / sqrt_bc2 + eps_;
    params[k] += rates[k] / bc1 * m_[k] / denom;
  }
}

std::vector<double> trailing_mean(std::span<const double> values, std::size_t window) {
  if (window == 0) throw std::invalid_argument("trailing_mean: window must be >= 1");
  std::vector<double> out(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    const std::size_t lo = i + 1 >= window ? i + 1 - window : 0;
    double sum = 0.0;
    for (std::size_t j = lo; j <= i; ++j) sum += values[j];
    out[i] = sum / static_cast<double>(i + 1 - lo);
  }
  return out;
}

TrainResult train_run(const Environment& env, const FeatureEncoder& encoder, const Policy& policy,
                      const Hyperparams& hyper, std::uint64_t seed, const Evaluator& evaluator,
                      int jobs) {
  hyper.validate();
  Rng init_rng = Rng::derive(seed, 0);
  TrainResult result;
  std::vector<double> params =
      init_policy_params(policy, hyper.init, init_rng, hyper.theta_stddev, hyper.weight_init);
  result.initial_params = params;
  const auto rates = rate_vector(policy.layout(), hyper.rates);
  AdamAmsgrad opt(params.size());

  std::vector<double> rewards;
  rewards.reserve(static_cast<std::size_t>(hyper.episodes));
  int episode = 0;
  // Episode streams start at 1; stream 0 initialized the parameters.
  while (episode < hyper.episodes) {
    const int batch = std::min(hyper.batch_size, hyper.episodes - episode);
    if (evaluator) {
      const double value = evaluator(params);
      result.evaluations.insert(result.evaluations.end(), static_cast<std::size_t>(batch), value);
    }
    auto trajectories = collect_batch(env, encoder, policy, params, batch, seed,
                                      1 + static_cast<std::uint64_t>(episode), jobs);
    for (const auto& traj : trajectories) rewards.push_back(traj.total_reward());
    const auto grad = reinforce_gradient(trajectories, policy, params, hyper.gamma, jobs);
    opt.step(params, grad, rates);
    episode += batch;
  }
  const auto avg = trailing_mean(rewards, 20);
  result.records.reserve(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    result.records.push_back({static_cast<int>(i), rewards[i], avg[i]});
  }
  result.final_params = std::move(params);
  return result;
}

void write_learning_curve_csv(std::ostream& out, const std::vector<EpisodeRecord>& records) {
  out << "episode,reward,avg20\n";
  for (const auto& r : records) {
    out << r.episode << ',' << format_double(r.reward) << ',' << format_double(r.avg20) << '\n';
  }
}

void write_aggregate_csv(std::ostream& out, const std::vector<std::vector<EpisodeRecord>>& runs) {
  if (runs.empty()) throw std::invalid_argument("aggregate: no runs");
  const std::size_t len = runs.front().size();
  for (const auto& r : runs) {
    if (r.size() != len) throw std::invalid_argument("aggregate: runs differ in length");
  }
  const double count = static_cast<double>(runs.size());
  out << "episode,mean,std\n";
  for (std::size_t i = 0; i < len; ++i) {
    double mean = 0.0;
    for (const auto& r : runs) mean += r[i].avg20;
    mean /= count;
    double var = 0.0;
    for (const auto& r : runs) var += (r[i].avg20 - mean) * (r[i].avg20 - mean);
    out << i << ',' << format_double(mean) << ',' << format_double(std::sqrt(var / count)) << '\n';
  }
}

}  // namespace qpg
