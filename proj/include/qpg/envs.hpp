#pragma once

#include <array>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "qpg/rng.hpp"

namespace qpg {

using Observation = std::vector<double>;

struct StepResult {
  Observation observation;
  double reward = 0.0;
  bool done = false;
};

/// Episodic environment with a finite action set. Episodes end on a terminal
/// state or after horizon() steps, whichever comes first.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual int num_actions() const = 0;
  virtual int horizon() const = 0;
  virtual std::string describe() const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;

  virtual Observation reset(Rng& rng) = 0;
  /// Throws std::out_of_range for actions outside [0, num_actions()).
  virtual StepResult step(int action, Rng& rng) = 0;

 protected:
  void check_action(int action) const;
};

enum class BanditReward { PlusMinusOne, Accuracy01 };

/// One-step episodes: a state is drawn uniformly, the optimal action earns the
/// high reward, every other action the low one.
class ContextualBandit final : public Environment {
 public:
  ContextualBandit(int num_states, int num_actions, std::vector<int> optimal_action,
                   BanditReward scheme);

  /// Consecutive blocks of S/M states share an optimal action: a*(s) = s * M / S.
  static std::vector<int> block_map(int num_states, int num_actions);

  int num_actions() const override { return num_actions_; }
  int horizon() const override { return 1; }
  std::string describe() const override;
  std::unique_ptr<Environment> clone() const override;

  Observation reset(Rng& rng) override;
  StepResult step(int action, Rng& rng) override;

  int num_states() const { return static_cast<int>(optimal_.size()); }
  const std::vector<int>& optimal_action() const { return optimal_; }
  BanditReward scheme() const { return scheme_; }
  double reward(int state, int action) const;

  /// Every action is optimal for the same number of states. Under uniform
  /// state draws each such state set is then visited with probability 1/M.
  bool is_uniform() const;

  /// Expected reward of a policy given pi(. | s) for every state.
  double expected_reward(const std::vector<std::vector<double>>& probs_by_state) const;
  /// Probability of choosing the optimal action, averaged over states.
  double accuracy(const std::vector<std::vector<double>>& probs_by_state) const;

 private:
  int num_actions_;
  std::vector<int> optimal_;
  BanditReward scheme_;
  int state_ = 0;
};

struct FrozenLakeRewards {
  double step = -1.0;
  double hole = -100.0;
  double goal = 100.0;
};

/// Grid world of 'S' (start), 'F' (frozen), 'H' (hole), 'G' (goal) cells.
/// Actions: 0 left, 1 down, 2 right, 3 up. Moves into walls leave the agent
/// in place.
class FrozenLake final : public Environment {
 public:
  static const std::vector<std::string>& default_map();

  explicit FrozenLake(std::vector<std::string> grid = default_map(), bool slippery = false,
                      FrozenLakeRewards rewards = {}, int horizon = 100);

  int num_actions() const override { return 4; }
  int horizon() const override { return horizon_; }
  std::string describe() const override;
  std::unique_ptr<Environment> clone() const override;

  Observation reset(Rng& rng) override;
  StepResult step(int action, Rng& rng) override;

  int rows() const { return static_cast<int>(grid_.size()); }
  int cols() const { return static_cast<int>(grid_.front().size()); }
  int num_states() const { return rows() * cols(); }
  int position() const { return pos_; }
  char cell(int state) const;
  /// Deterministic successor of `state` under `action`.
  int move(int state, int action) const;

 private:
  std::vector<std::string> grid_;
  bool slippery_;
  FrozenLakeRewards rewards_;
  int horizon_;
  int start_ = 0;
  int pos_ = 0;
  int steps_ = 0;
};

std::vector<std::string> read_frozenlake_map(std::istream& in);

enum class CartPoleVersion { V0, V1 };

/// Classic cart-pole balancing: state (x, x_dot, phi, phi_dot), action 0
/// pushes left and 1 pushes right, +1 reward per step survived.
class CartPole final : public Environment {
 public:
  static constexpr double kGravity = 9.8;
  static constexpr double kCartMass = 1.0;
  static constexpr double kPoleMass = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kForce = 10.0;
  static constexpr double kTau = 0.02;
  static constexpr double kXLimit = 2.4;
  static constexpr double kAngleLimit = 12.0 * 2.0 * 3.14159265358979323846 / 360.0;

  explicit CartPole(CartPoleVersion version = CartPoleVersion::V0);

  int num_actions() const override { return 2; }
  int horizon() const override { return version_ == CartPoleVersion::V0 ? 200 : 500; }
  std::string describe() const override;
  std::unique_ptr<Environment> clone() const override;

  Observation reset(Rng& rng) override;
  StepResult step(int action, Rng& rng) override;

  const std::array<double, 4>& state() const { return state_; }
  void set_state(const std::array<double, 4>& state);

 private:
  CartPoleVersion version_;
  std::array<double, 4> state_{};
  int steps_ = 0;
};

/// Maps environment observations to one circuit input per qubit.
class FeatureEncoder {
 public:
  enum class Mode { Continuous, BinaryDiscrete };

  /// Per-dimension affine map of [lo, hi] onto [-1, 1), clipping outside values.
  static FeatureEncoder continuous(std::vector<std::pair<double, double>> bounds);
  /// State index -> n-bit binary expansion -> bit * pi on qubit k for bit k.
  static FeatureEncoder binary(int n_qubits, int num_states);
  /// Position +-2.4, angle +-12 degrees, velocities clipped at +-2.5.
  static FeatureEncoder cartpole();

  Mode mode() const { return mode_; }
  int output_size() const { return output_size_; }
  std::vector<double> encode(const Observation& observation) const;

 private:
  FeatureEncoder(Mode mode, int output_size) : mode_(mode), output_size_(output_size) {}

  Mode mode_;
  int output_size_;
  int num_states_ = 0;
  std::vector<std::pair<double, double>> bounds_;
};

}  // namespace qpg
