#include "qpg/policy.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace qpg {

namespace {

void check_features(const ModelConfig& model, std::span<const double> features) {
  if (features.size() != static_cast<std::size_t>(model.n_qubits)) {
    throw std::invalid_argument("policy: expected " + std::to_string(model.n_qubits) +
                                " features, got " + std::to_string(features.size()));
  }
}

void check_action(int action, int num_actions) {
  if (action < 0 || action >= num_actions) {
    throw std::out_of_range("policy: action " + std::to_string(action) + " outside [0, " +
                            std::to_string(num_actions) + ")");
  }
}

}  // namespace

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> out(logits.begin(), logits.end());
  if (out.empty()) return out;
  const double top = *std::max_element(out.begin(), out.end());
  double total = 0.0;
  for (auto& v : out) {
    v = std::exp(v - top);
    total += v;
  }
  for (auto& v : out) v /= total;
  return out;
}

RawVqcPolicy::RawVqcPolicy(ModelConfig model, PostProcessing postfn, EvalMode mode,
                           std::size_t shots)
    : circuit_(model), postfn_(std::move(postfn)), mode_(mode), shots_(shots) {
  if (postfn_.num_qubits() != model.n_qubits) {
    throw std::invalid_argument("RawVqcPolicy: post-processing acts on " +
                                std::to_string(postfn_.num_qubits()) + " qubits, model has " +
                                std::to_string(model.n_qubits));
  }
  if (mode_ == EvalMode::Shots && shots_ == 0) {
    throw std::invalid_argument("RawVqcPolicy: shot count must be >= 1");
  }
  table_ = postfn_.table();
}

ParamLayout RawVqcPolicy::layout() const {
  const auto c = circuit_.counts();
  return {c.theta, c.lambda, 0};
}

std::string RawVqcPolicy::describe() const {
  std::ostringstream out;
  out << "raw_vqc[" << postfn_.describe() << ", "
      << (mode_ == EvalMode::Exact ? std::string("exact") : "shots=" + std::to_string(shots_))
      << ']';
  return out.str();
}

std::vector<double> RawVqcPolicy::decode_probs(const Statevector& state) const {
  std::vector<double> out(static_cast<std::size_t>(num_actions()), 0.0);
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) {
    out[static_cast<std::size_t>(table_[i])] += std::norm(amps[i]);
  }
  return out;
}

std::vector<double> RawVqcPolicy::probs(std::span<const double> features,
                                        std::span<const double> params) const {
  check_features(model(), features);
  return decode_probs(circuit_.prepare(params, features));
}

std::vector<double> RawVqcPolicy::estimate_probs(std::span<const double> features,
                                                 std::span<const double> params,
                                                 Rng& rng) const {
  if (mode_ == EvalMode::Exact) return probs(features, params);
  check_features(model(), features);
  const auto state = circuit_.prepare(params, features);
  std::vector<double> freq(static_cast<std::size_t>(num_actions()), 0.0);
  for (auto b : state.sample(shots_, rng)) freq[static_cast<std::size_t>(table_[b])] += 1.0;
  for (auto& f : freq) f /= static_cast<double>(shots_);
  return freq;
}

int RawVqcPolicy::sample_action(std::span<const double> features,
                                std::span<const double> params, Rng& rng) const {
  check_features(model(), features);
  const auto state = circuit_.prepare(params, features);
  if (mode_ == EvalMode::Shots) return table_[state.sample(1, rng).front()];
  const auto p = decode_probs(state);
  return static_cast<int>(sample_index(p, rng));
}

std::vector<std::vector<double>> RawVqcPolicy::prob_jacobian(std::span<const double> features,
                                                             std::span<const double> params) const {
  check_features(model(), features);
  const auto set = ParamSet::from_flat(model(), params);
  return shift_jacobian(circuit_, set, features,
                        [this](const Statevector& s) { return decode_probs(s); });
}

std::vector<double> RawVqcPolicy::log_prob_grad(std::span<const double> features, int action,
                                                std::span<const double> params) const {
  check_action(action, num_actions());
  const double p = probs(features, params)[static_cast<std::size_t>(action)];
  if (!(p > 0.0)) {
    throw std::domain_error("log_prob_grad: action " + std::to_string(action) +
                            " has zero probability under the current policy");
  }
  const double denom = std::max(p, kProbClamp);
  const auto jac = prob_jacobian(features, params);
  std::vector<double> grad(jac.size());
  for (std::size_t j = 0; j < jac.size(); ++j) {
    grad[j] = jac[j][static_cast<std::size_t>(action)] / denom;
  }
  return grad;
}

RestrictedSoftmaxPolicy::RestrictedSoftmaxPolicy(ModelConfig model, int num_actions, double beta,
                                                 std::uint64_t z_mask)
    : circuit_(model), num_actions_(num_actions), beta_(beta), z_mask_(z_mask) {
  if (num_actions < 2) throw std::invalid_argument("RestrictedSoftmaxPolicy: need >= 2 actions");
  const std::uint64_t all = (std::uint64_t{1} << model.n_qubits) - 1;
  if (z_mask_ == 0) z_mask_ = all;
  if ((z_mask_ & ~all) != 0) {
    throw std::invalid_argument("RestrictedSoftmaxPolicy: z_mask addresses missing qubits");
  }
}

ParamLayout RestrictedSoftmaxPolicy::layout() const {
  const auto c = circuit_.counts();
  return {c.theta, c.lambda, static_cast<std::size_t>(num_actions_)};
}

std::string RestrictedSoftmaxPolicy::describe() const {
  std::ostringstream out;
  out << "restricted_softmax[M=" << num_actions_ << ", beta=" << beta_ << ", z_mask=" << z_mask_
      << ']';
  return out.str();
}

namespace {

struct RsmView {
  std::span<const double> circuit;
  std::span<const double> weights;
};

RsmView split_rsm(const ParamLayout& layout, std::span<const double> params) {
  if (params.size() != layout.total()) {
    throw std::invalid_argument("RestrictedSoftmaxPolicy: expected " +
                                std::to_string(layout.total()) + " parameters, got " +
                                std::to_string(params.size()));
  }
  const auto circuit_size = layout.theta + layout.lambda;
  return {params.first(circuit_size), params.subspan(circuit_size)};
}

}  // namespace

double RestrictedSoftmaxPolicy::observable(std::span<const double> features,
                                           std::span<const double> params) const {
  check_features(model(), features);
  const auto view = split_rsm(layout(), params);
  return circuit_.prepare(view.circuit, features).z_expectation(z_mask_);
}

std::vector<double> RestrictedSoftmaxPolicy::probs(std::span<const double> features,
                                                   std::span<const double> params) const {
  const auto view = split_rsm(layout(), params);
  const double o = observable(features, params);
  std::vector<double> logits(view.weights.size());
  for (std::size_t a = 0; a < logits.size(); ++a) logits[a] = beta_ * view.weights[a] * o;
  return softmax(logits);
}

int RestrictedSoftmaxPolicy::sample_action(std::span<const double> features,
                                           std::span<const double> params, Rng& rng) const {
  return static_cast<int>(sample_index(probs(features, params), rng));
}

std::vector<double> RestrictedSoftmaxPolicy::log_prob_grad(std::span<const double> features,
                                                           int action,
                                                           std::span<const double> params) const {
  check_action(action, num_actions_);
  const auto view = split_rsm(layout(), params);
  const double o = observable(features, params);
  const auto pi = probs(features, params);

  double mean_w = 0.0;
  for (std::size_t a = 0; a < pi.size(); ++a) mean_w += pi[a] * view.weights[a];
  const double bracket = view.weights[static_cast<std::size_t>(action)] - mean_w;

  const auto set = ParamSet::from_flat(model(), view.circuit);
  const auto mask = z_mask_;
  const auto jac = shift_jacobian(circuit_, set, features, [mask](const Statevector& s) {
    return std::vector<double>{s.z_expectation(mask)};
  });

  std::vector<double> grad(layout().total(), 0.0);
  for (std::size_t j = 0; j < jac.size(); ++j) grad[j] = beta_ * jac[j][0] * bracket;
  for (std::size_t x = 0; x < pi.size(); ++x) {
    const double delta = static_cast<int>(x) == action ? 1.0 : 0.0;
    grad[jac.size() + x] = beta_ * o * (delta - pi[x]);
  }
  return grad;
}

std::vector<double> init_policy_params(const Policy& policy, ThetaInit scheme, Rng& rng,
                                       double theta_stddev, double weight_init) {
  auto flat = init_params(policy.model(), scheme, rng, theta_stddev).flat();
  flat.resize(flat.size() + policy.layout().weights, weight_init);
  return flat;
}

}  // namespace qpg
