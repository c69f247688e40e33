#include "qpg/envs.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace qpg {

void Environment::check_action(int action) const {
  if (action < 0 || action >= num_actions()) {
    throw std::out_of_range("environment: action " + std::to_string(action) + " outside [0, " +
                            std::to_string(num_actions()) + ")");
  }
}

// ---------------------------------------------------------------- bandit

ContextualBandit::ContextualBandit(int num_states, int num_actions,
                                   std::vector<int> optimal_action, BanditReward scheme)
    : num_actions_(num_actions), optimal_(std::move(optimal_action)), scheme_(scheme) {
  if (num_states < 1 || num_actions < 2) {
    throw std::invalid_argument("bandit: need >= 1 state and >= 2 actions");
  }
  if (optimal_.size() != static_cast<std::size_t>(num_states)) {
    throw std::invalid_argument("bandit: optimal map must list one action per state");
  }
  for (int a : optimal_) {
    if (a < 0 || a >= num_actions) throw std::invalid_argument("bandit: optimal action out of range");
  }
}

std::vector<int> ContextualBandit::block_map(int num_states, int num_actions) {
  std::vector<int> map(static_cast<std::size_t>(num_states));
  for (int s = 0; s < num_states; ++s) map[static_cast<std::size_t>(s)] = s * num_actions / num_states;
  return map;
}

std::string ContextualBandit::describe() const {
  std::ostringstream out;
  out << "bandit(S=" << num_states() << ", M=" << num_actions_ << ", reward="
      << (scheme_ == BanditReward::PlusMinusOne ? "pm1" : "acc01") << ')';
  return out.str();
}

std::unique_ptr<Environment> ContextualBandit::clone() const {
  return std::make_unique<ContextualBandit>(*this);
}

Observation ContextualBandit::reset(Rng& rng) {
  state_ = static_cast<int>(rng.below(optimal_.size()));
  return {static_cast<double>(state_)};
}

double ContextualBandit::reward(int state, int action) const {
  const bool hit = optimal_.at(static_cast<std::size_t>(state)) == action;
  if (scheme_ == BanditReward::PlusMinusOne) return hit ? 1.0 : -1.0;
  return hit ? 1.0 : 0.0;
}

StepResult ContextualBandit::step(int action, Rng& /*rng*/) {
  check_action(action);
  return {{static_cast<double>(state_)}, reward(state_, action), true};
}

bool ContextualBandit::is_uniform() const {
  if (optimal_.size() % static_cast<std::size_t>(num_actions_) != 0) return false;
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_actions_), 0);
  for (int a : optimal_) ++counts[static_cast<std::size_t>(a)];
  const auto want = optimal_.size() / static_cast<std::size_t>(num_actions_);
  return std::all_of(counts.begin(), counts.end(), [want](std::size_t c) { return c == want; });
}

double ContextualBandit::expected_reward(const std::vector<std::vector<double>>& probs) const {
  if (probs.size() != optimal_.size()) throw std::invalid_argument("bandit: need probs per state");
  double total = 0.0;
  for (std::size_t s = 0; s < probs.size(); ++s) {
    for (std::size_t a = 0; a < probs[s].size(); ++a) {
      total += probs[s][a] * reward(static_cast<int>(s), static_cast<int>(a));
    }
  }
  return total / static_cast<double>(probs.size());
}

double ContextualBandit::accuracy(const std::vector<std::vector<double>>& probs) const {
  if (probs.size() != optimal_.size()) throw std::invalid_argument("bandit: need probs per state");
  double total = 0.0;
  for (std::size_t s = 0; s < probs.size(); ++s) {
    total += probs[s].at(static_cast<std::size_t>(optimal_[s]));
  }
  return total / static_cast<double>(probs.size());
}

// ---------------------------------------------------------------- frozen lake

const std::vector<std::string>& FrozenLake::default_map() {
  static const std::vector<std::string> map{"SFFF", "FHFH", "FFFH", "HFFG"};
  return map;
}

FrozenLake::FrozenLake(std::vector<std::string> grid, bool slippery, FrozenLakeRewards rewards,
                       int horizon)
    : grid_(std::move(grid)), slippery_(slippery), rewards_(rewards), horizon_(horizon) {
  if (grid_.empty() || grid_.front().empty()) throw std::invalid_argument("frozenlake: empty map");
  if (horizon_ < 1) throw std::invalid_argument("frozenlake: horizon must be >= 1");
  int starts = 0, goals = 0;
  for (std::size_t r = 0; r < grid_.size(); ++r) {
    if (grid_[r].size() != grid_.front().size()) {
      throw std::invalid_argument("frozenlake: ragged map rows");
    }
    for (std::size_t c = 0; c < grid_[r].size(); ++c) {
      const char ch = grid_[r][c];
      if (ch == 'S') {
        ++starts;
        start_ = static_cast<int>(r * grid_[r].size() + c);
      } else if (ch == 'G') {
        ++goals;
      } else if (ch != 'F' && ch != 'H') {
        throw std::invalid_argument(std::string("frozenlake: unknown cell '") + ch + "'");
      }
    }
  }
  if (starts != 1 || goals != 1) {
    throw std::invalid_argument("frozenlake: map needs exactly one S and one G");
  }
  pos_ = start_;
}

std::string FrozenLake::describe() const {
  std::ostringstream out;
  out << "frozenlake(" << rows() << "x" << cols() << (slippery_ ? ", slippery" : "") << ')';
  return out.str();
}

std::unique_ptr<Environment> FrozenLake::clone() const { return std::make_unique<FrozenLake>(*this); }

char FrozenLake::cell(int state) const {
  return grid_.at(static_cast<std::size_t>(state / cols())).at(static_cast<std::size_t>(state % cols()));
}

int FrozenLake::move(int state, int action) const {
  int r = state / cols(), c = state % cols();
  switch (action) {
    case 0: c = std::max(c - 1, 0); break;
    case 1: r = std::min(r + 1, rows() - 1); break;
    case 2: c = std::min(c + 1, cols() - 1); break;
    case 3: r = std::max(r - 1, 0); break;
    default: throw std::out_of_range("frozenlake: bad action");
  }
  return r * cols() + c;
}

Observation FrozenLake::reset(Rng& /*rng*/) {
  pos_ = start_;
  steps_ = 0;
  return {static_cast<double>(pos_)};
}

StepResult FrozenLake::step(int action, Rng& rng) {
  check_action(action);
  int taken = action;
  if (slippery_) {
    // Intended direction or one of the two perpendicular ones, each 1/3.
    const auto k = static_cast<int>(rng.below(3));
    taken = (action + 3 + k) % 4;
  }
  pos_ = move(pos_, taken);
  ++steps_;
  StepResult result{{static_cast<double>(pos_)}, rewards_.step, false};
  const char ch = cell(pos_);
  if (ch == 'H') {
    result.reward = rewards_.hole;
    result.done = true;
  } else if (ch == 'G') {
    result.reward = rewards_.goal;
    result.done = true;
  }
  if (steps_ >= horizon_) result.done = true;
  return result;
}

std::vector<std::string> read_frozenlake_map(std::istream& in) {
  std::vector<std::string> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    rows.push_back(line);
  }
  // Validates the grid.
  FrozenLake check(rows);
  return rows;
}

// ---------------------------------------------------------------- cart pole

CartPole::CartPole(CartPoleVersion version) : version_(version) {}

std::string CartPole::describe() const {
  return version_ == CartPoleVersion::V0 ? "cartpole-v0" : "cartpole-v1";
}

std::unique_ptr<Environment> CartPole::clone() const { return std::make_unique<CartPole>(*this); }

Observation CartPole::reset(Rng& rng) {
  for (auto& v : state_) v = rng.uniform(-0.05, 0.05);
  steps_ = 0;
  return {state_.begin(), state_.end()};
}

void CartPole::set_state(const std::array<double, 4>& state) {
  state_ = state;
  steps_ = 0;
}

StepResult CartPole::step(int action, Rng& /*rng*/) {
  check_action(action);
  constexpr double total_mass = kCartMass + kPoleMass;
  constexpr double pole_mass_length = kPoleMass * kHalfLength;
  auto& [x, x_dot, phi, phi_dot] = state_;
  const double force = action == 1 ? kForce : -kForce;
  const double cos_phi = std::cos(phi);
  const double sin_phi = std::sin(phi);
  const double temp = (force + pole_mass_length * phi_dot * phi_dot * sin_phi) / total_mass;
  const double phi_acc = (kGravity * sin_phi - cos_phi * temp) /
                         (kHalfLength * (4.0 / 3.0 - kPoleMass * cos_phi * cos_phi / total_mass));
  const double x_acc = temp - pole_mass_length * phi_acc * cos_phi / total_mass;
  // Explicit Euler.
  x += kTau * x_dot;
  x_dot += kTau * x_acc;
  phi += kTau * phi_dot;
  phi_dot += kTau * phi_acc;
  ++steps_;
  const bool failed = x < -kXLimit || x > kXLimit || phi < -kAngleLimit || phi > kAngleLimit;
  return {{state_.begin(), state_.end()}, 1.0, failed || steps_ >= horizon()};
}

// ---------------------------------------------------------------- encoders

FeatureEncoder FeatureEncoder::continuous(std::vector<std::pair<double, double>> bounds) {
  if (bounds.empty()) throw std::invalid_argument("encoder: no dimensions");
  for (const auto& [lo, hi] : bounds) {
    if (!(hi > lo)) throw std::invalid_argument("encoder: empty bound interval");
  }
  FeatureEncoder enc(Mode::Continuous, static_cast<int>(bounds.size()));
  enc.bounds_ = std::move(bounds);
  return enc;
}

FeatureEncoder FeatureEncoder::binary(int n_qubits, int num_states) {
  if (n_qubits < 1 || n_qubits > 30 || num_states < 1 || num_states > (1 << n_qubits)) {
    throw std::invalid_argument("encoder: " + std::to_string(num_states) +
                                " states do not fit in " + std::to_string(n_qubits) + " bits");
  }
  FeatureEncoder enc(Mode::BinaryDiscrete, n_qubits);
  enc.num_states_ = num_states;
  return enc;
}

FeatureEncoder FeatureEncoder::cartpole() {
  return continuous({{-CartPole::kXLimit, CartPole::kXLimit},
                     {-2.5, 2.5},
                     {-CartPole::kAngleLimit, CartPole::kAngleLimit},
                     {-2.5, 2.5}});
}

std::vector<double> FeatureEncoder::encode(const Observation& obs) const {
  if (mode_ == Mode::BinaryDiscrete) {
    if (obs.size() != 1) throw std::invalid_argument("encoder: discrete observation must be one index");
    const double v = obs.front();
    if (!(v >= 0.0) || v >= num_states_ || v != std::floor(v)) {
      throw std::out_of_range("encoder: state " + std::to_string(v) + " outside [0, " +
                              std::to_string(num_states_) + ")");
    }
    const auto index = static_cast<unsigned>(v);
    std::vector<double> out(static_cast<std::size_t>(output_size_));
    for (int k = 0; k < output_size_; ++k) {
      out[static_cast<std::size_t>(k)] = ((index >> k) & 1U) ? std::numbers::pi : 0.0;
    }
    return out;
  }
  if (obs.size() != bounds_.size()) {
    throw std::invalid_argument("encoder: expected " + std::to_string(bounds_.size()) +
                                " observation components, got " + std::to_string(obs.size()));
  }
  constexpr double below_one = 0.99999999999999989;  // nextafter(1, 0)
  std::vector<double> out(obs.size());
  for (std::size_t i = 0; i < obs.size(); ++i) {
    if (!std::isfinite(obs[i])) throw std::out_of_range("encoder: non-finite observation");
    const auto [lo, hi] = bounds_[i];
    const double clipped = std::clamp(obs[i], lo, hi);
    out[i] = std::min(2.0 * (clipped - lo) / (hi - lo) - 1.0, below_one);
  }
  return out;
}

}  // namespace qpg
