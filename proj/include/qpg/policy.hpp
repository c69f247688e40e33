#pragma once

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "qpg/ansatz.hpp"
#include "qpg/decode.hpp"
#include "qpg/rng.hpp"

namespace qpg {

/// Sizes of the flat parameter blocks: theta, then lambda, then softmax weights.
struct ParamLayout {
  std::size_t theta = 0;
  std::size_t lambda = 0;
  std::size_t weights = 0;
  std::size_t total() const { return theta + lambda + weights; }
};

/// Stochastic policy over a finite action set with a flat parameter vector.
class Policy {
 public:
  virtual ~Policy() = default;

  virtual int num_actions() const = 0;
  virtual const ModelConfig& model() const = 0;
  virtual ParamLayout layout() const = 0;
  virtual std::string describe() const = 0;

  /// Exact action distribution.
  virtual std::vector<double> probs(std::span<const double> features,
                                    std::span<const double> params) const = 0;
  /// Action distribution as the policy evaluates it (may be shot-estimated).
  virtual std::vector<double> estimate_probs(std::span<const double> features,
                                             std::span<const double> params, Rng& rng) const {
    (void)rng;
    return probs(features, params);
  }
  virtual int sample_action(std::span<const double> features, std::span<const double> params,
                            Rng& rng) const = 0;
  /// d ln pi(action | s) / d params, aligned with layout().
  virtual std::vector<double> log_prob_grad(std::span<const double> features, int action,
                                            std::span<const double> params) const = 0;
};

enum class EvalMode { Exact, Shots };

/// pi(a | s) = sum of |c_b|^2 over bitstrings b with decode(b) = a.
class RawVqcPolicy final : public Policy {
 public:
  /// Denominator clamp for the log-gradient.
  static constexpr double kProbClamp = 1e-12;

  RawVqcPolicy(ModelConfig model, PostProcessing postfn, EvalMode mode = EvalMode::Exact,
               std::size_t shots = 1024);

  int num_actions() const override { return postfn_.num_actions(); }
  const ModelConfig& model() const override { return circuit_.config(); }
  ParamLayout layout() const override;
  std::string describe() const override;
  const PostProcessing& postfn() const { return postfn_; }
  EvalMode mode() const { return mode_; }
  std::size_t shots() const { return shots_; }

  std::vector<double> probs(std::span<const double> features,
                            std::span<const double> params) const override;
  /// Exact mode: same as probs(). Shots mode: indicator average over K shots.
  std::vector<double> estimate_probs(std::span<const double> features,
                                     std::span<const double> params, Rng& rng) const override;
  /// Exact mode samples probs(); shots mode measures once and decodes.
  int sample_action(std::span<const double> features, std::span<const double> params,
                    Rng& rng) const override;
  std::vector<double> log_prob_grad(std::span<const double> features, int action,
                                    std::span<const double> params) const override;

  /// d pi(a | s) / d Theta for all actions, indexed [parameter][action].
  std::vector<std::vector<double>> prob_jacobian(std::span<const double> features,
                                                 std::span<const double> params) const;

  /// Sums basis probabilities by action.
  std::vector<double> decode_probs(const Statevector& state) const;

 private:
  Circuit circuit_;
  PostProcessing postfn_;
  EvalMode mode_;
  std::size_t shots_;
  std::vector<int> table_;
};

/// pi(a | s) = softmax_a(beta * w_a * <O>), O a tensor product of Pauli-Z on
/// the qubits in z_mask. Parameters: theta, lambda, then w (one per action).
class RestrictedSoftmaxPolicy final : public Policy {
 public:
  RestrictedSoftmaxPolicy(ModelConfig model, int num_actions, double beta = 1.0,
                          std::uint64_t z_mask = 0);

  int num_actions() const override { return num_actions_; }
  const ModelConfig& model() const override { return circuit_.config(); }
  ParamLayout layout() const override;
  std::string describe() const override;
  double beta() const { return beta_; }
  std::uint64_t z_mask() const { return z_mask_; }

  /// <O> for the prepared state.
  double observable(std::span<const double> features, std::span<const double> params) const;

  std::vector<double> probs(std::span<const double> features,
                            std::span<const double> params) const override;
  int sample_action(std::span<const double> features, std::span<const double> params,
                    Rng& rng) const override;
  std::vector<double> log_prob_grad(std::span<const double> features, int action,
                                    std::span<const double> params) const override;

 private:
  Circuit circuit_;
  int num_actions_;
  double beta_;
  std::uint64_t z_mask_;
};

std::vector<double> softmax(std::span<const double> logits);

/// Initial flat parameters: theta by `scheme`, lambda = 1, weights = weight_init.
std::vector<double> init_policy_params(const Policy& policy, ThetaInit scheme, Rng& rng,
                                       double theta_stddev = 0.1, double weight_init = 1.0);

}  // namespace qpg
