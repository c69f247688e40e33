#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "qpg/ansatz.hpp"
#include "qpg/decode.hpp"
#include "qpg/envs.hpp"
#include "qpg/policy.hpp"
#include "qpg/train.hpp"

namespace qpg {

/// Invalid or inconsistent configuration; the message names the field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class EnvKind { CartPole, FrozenLake, Bandit };

struct EnvironmentSpec {
  EnvKind kind = EnvKind::CartPole;
  CartPoleVersion cartpole_version = CartPoleVersion::V0;
  int bandit_states = 8;
  int bandit_actions = 4;
  std::vector<int> bandit_optimal;  // empty = block map
  BanditReward bandit_reward = BanditReward::PlusMinusOne;
  std::vector<std::string> lake_map;
  std::string lake_map_file;
  bool lake_slippery = false;
  FrozenLakeRewards lake_rewards;
  int lake_horizon = 100;
};

enum class PolicyKind { RawVqc, Softmax };

struct PolicySpec {
  PolicyKind kind = PolicyKind::RawVqc;
  /// msb | parity:<q> | global | table:<path>
  std::string postfn = "global";
  EvalMode eval = EvalMode::Exact;
  std::size_t shots = 1024;
  double beta = 1.0;
  std::uint64_t z_mask = 0;
};

struct AnalysisSpec {
  std::string state_sampler = "normal";
  std::size_t param_sets = 100;
  std::size_t states_per_set = 100;
  std::vector<double> data_sizes{5e3, 1e4, 5e4, 1e5, 5e5, 1e6};
};

struct ExperimentConfig {
  std::vector<std::uint64_t> seeds{0};
  EnvironmentSpec env;
  ModelConfig model{4, 1, Entangler::CZ, false};
  PolicySpec policy;
  Hyperparams training;
  AnalysisSpec analysis;
  /// Relative table and map paths resolve against this directory.
  std::filesystem::path base_dir = ".";

  int num_actions() const;
  std::unique_ptr<Environment> make_environment() const;
  FeatureEncoder make_encoder() const;
  PostProcessing make_postfn() const;
  std::unique_ptr<Policy> make_policy() const;

  /// Cross-field checks; throws ConfigError.
  void validate() const;
  /// Canonical INI text of every setting, defaults included.
  std::string resolved() const;
};

/// Parses INI text. Unknown sections or keys are errors.
ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir = ".");
ExperimentConfig load_config(const std::filesystem::path& path);

/// msb | parity:<q> | global | table:<path>. Throws ConfigError.
PostProcessing parse_postfn(const std::string& spec, int n_qubits, int num_actions,
                            const std::filesystem::path& base_dir = ".");

}  // namespace qpg
