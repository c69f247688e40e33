#include "qpg/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "qpg/csv.hpp"

namespace qpg {

namespace pt = boost::property_tree;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"experiment", {"seeds"}},
      {"environment",
       {"type", "version", "states", "actions", "optimal", "reward", "map", "map_file", "slippery",
        "step_reward", "hole_reward", "goal_reward", "horizon"}},
      {"model", {"qubits", "depth", "entangler", "hadamard"}},
      {"policy", {"kind", "postfn", "eval", "shots", "beta", "z_qubits"}},
      {"training",
       {"episodes", "batch_size", "gamma", "lr_theta", "lr_lambda", "lr_weights", "init",
        "theta_stddev", "weight_init"}},
      {"analysis", {"state_sampler", "param_sets", "states_per_set", "data_sizes"}},
  };
  return keys;
}

/// Typed access to one parsed file with field-level error messages.
class Reader {
 public:
  explicit Reader(const pt::ptree& tree) : tree_(tree) {
    for (const auto& [section, body] : tree) {
      const auto known = known_keys().find(section);
      if (known == known_keys().end()) {
        if (body.empty() && !body.data().empty()) {
          throw ConfigError("config: key '" + section + "' must be inside a [section]");
        }
        throw ConfigError("config: unknown section [" + section + "]");
      }
      for (const auto& [key, value] : body) {
        if (!known->second.count(key)) {
          throw ConfigError("config: unknown key '" + section + "." + key + "'");
        }
        (void)value;
      }
    }
  }

  bool has(const std::string& path) const { return tree_.get_optional<std::string>(path).has_value(); }

  std::string text(const std::string& path) const {
    return trim(tree_.get<std::string>(path));
  }

  template <typename T>
  void get(const std::string& path, T& out) const {
    if (has(path)) out = parse<T>(path, text(path));
  }

  template <typename T>
  static T parse(const std::string& path, const std::string& value) {
    try {
      if constexpr (std::is_same_v<T, std::string>) {
        return value;
      } else if constexpr (std::is_same_v<T, bool>) {
        if (value == "true" || value == "1" || value == "yes" || value == "on") return true;
        if (value == "false" || value == "0" || value == "no" || value == "off") return false;
        throw std::invalid_argument("not a boolean");
      } else if constexpr (std::is_floating_point_v<T>) {
        return parse_double(value);
      } else {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used != value.size()) throw std::invalid_argument("trailing characters");
        if constexpr (std::is_unsigned_v<T>) {
          if (v < 0) throw std::invalid_argument("negative");
        }
        return static_cast<T>(v);
      }
    } catch (const std::exception&) {
      throw ConfigError("config: " + path + " = '" + value + "' is not a valid value");
    }
  }

 private:
  const pt::ptree& tree_;
};

std::string env_name(EnvKind k) {
  switch (k) {
    case EnvKind::CartPole: return "cartpole";
    case EnvKind::FrozenLake: return "frozenlake";
    case EnvKind::Bandit: return "bandit";
  }
  return "?";
}

template <typename T>
std::string join(const std::vector<T>& values) {
  std::string out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (i) out += ',';
    if constexpr (std::is_floating_point_v<T>) {
      out += format_double(values[i]);
    } else {
      out += std::to_string(values[i]);
    }
  }
  return out;
}

}  // namespace

PostProcessing parse_postfn(const std::string& spec, int n_qubits, int num_actions,
                            const std::filesystem::path& base_dir) {
  try {
    if (spec == "msb") {
      if (num_actions != 2) throw ConfigError("policy.postfn: msb decodes to 2 actions");
      return PostProcessing::msb_local(n_qubits);
    }
    if (spec == "global") return PostProcessing::global_recursive(n_qubits, num_actions);
    if (spec.rfind("parity:", 0) == 0) {
      if (num_actions != 2) throw ConfigError("policy.postfn: parity decodes to 2 actions");
      return PostProcessing::qlocal_parity(n_qubits, Reader::parse<int>("policy.postfn", spec.substr(7)));
    }
    if (spec.rfind("table:", 0) == 0) {
      std::filesystem::path path = spec.substr(6);
      if (path.is_relative()) path = base_dir / path;
      std::ifstream in(path);
      if (!in) throw ConfigError("policy.postfn: cannot open table '" + path.string() + "'");
      auto fn = read_table(in);
      if (fn.num_qubits() != n_qubits || fn.num_actions() != num_actions) {
        throw ConfigError("policy.postfn: table is " + std::to_string(fn.num_qubits()) +
                          " qubits / " + std::to_string(fn.num_actions()) + " actions, need " +
                          std::to_string(n_qubits) + " / " + std::to_string(num_actions));
      }
      return fn;
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("policy.postfn: " + std::string(e.what()));
  }
  throw ConfigError("policy.postfn: unknown post-processing '" + spec +
                    "' (expected msb, parity:<q>, global or table:<path>)");
}

ExperimentConfig parse_config(std::istream& in, const std::filesystem::path& base_dir) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("config: line " + std::to_string(e.line()) + ": " + e.message());
  }
  const Reader r(tree);
  ExperimentConfig c;
  c.base_dir = base_dir;

  if (r.has("experiment.seeds")) {
    c.seeds.clear();
    for (const auto& s : split_list(r.text("experiment.seeds"))) {
      c.seeds.push_back(Reader::parse<std::uint64_t>("experiment.seeds", s));
    }
  }

  auto& env = c.env;
  const std::string type = r.has("environment.type") ? r.text("environment.type") : "cartpole";
  if (type == "cartpole") {
    env.kind = EnvKind::CartPole;
  } else if (type == "frozenlake") {
    env.kind = EnvKind::FrozenLake;
  } else if (type == "bandit") {
    env.kind = EnvKind::Bandit;
  } else {
    throw ConfigError("config: environment.type = '" + type +
                      "' (expected cartpole, frozenlake or bandit)");
  }
  if (r.has("environment.version")) {
    const auto v = r.text("environment.version");
    if (v == "v0") {
      env.cartpole_version = CartPoleVersion::V0;
    } else if (v == "v1") {
      env.cartpole_version = CartPoleVersion::V1;
    } else {
      throw ConfigError("config: environment.version = '" + v + "' (expected v0 or v1)");
    }
  }
  r.get("environment.states", env.bandit_states);
  r.get("environment.actions", env.bandit_actions);
  if (r.has("environment.optimal")) {
    const auto v = r.text("environment.optimal");
    if (v != "block") {
      for (const auto& s : split_list(v)) {
        env.bandit_optimal.push_back(Reader::parse<int>("environment.optimal", s));
      }
    }
  }
  if (r.has("environment.reward")) {
    const auto v = r.text("environment.reward");
    if (v == "pm1") {
      env.bandit_reward = BanditReward::PlusMinusOne;
    } else if (v == "acc01") {
      env.bandit_reward = BanditReward::Accuracy01;
    } else {
      throw ConfigError("config: environment.reward = '" + v + "' (expected pm1 or acc01)");
    }
  }
  if (r.has("environment.map")) {
    for (const auto& row : split_list(r.text("environment.map"))) env.lake_map.push_back(row);
  }
  r.get("environment.map_file", env.lake_map_file);
  r.get("environment.slippery", env.lake_slippery);
  r.get("environment.step_reward", env.lake_rewards.step);
  r.get("environment.hole_reward", env.lake_rewards.hole);
  r.get("environment.goal_reward", env.lake_rewards.goal);
  r.get("environment.horizon", env.lake_horizon);

  r.get("model.qubits", c.model.n_qubits);
  r.get("model.depth", c.model.depth);
  if (r.has("model.entangler")) {
    try {
      c.model.entangler = entangler_from_string(r.text("model.entangler"));
    } catch (const std::exception& e) {
      throw ConfigError("config: model.entangler: " + std::string(e.what()));
    }
  }
  r.get("model.hadamard", c.model.hadamard_prefix);

  if (r.has("policy.kind")) {
    const auto v = r.text("policy.kind");
    if (v == "raw") {
      c.policy.kind = PolicyKind::RawVqc;
    } else if (v == "softmax") {
      c.policy.kind = PolicyKind::Softmax;
    } else {
      throw ConfigError("config: policy.kind = '" + v + "' (expected raw or softmax)");
    }
  }
  r.get("policy.postfn", c.policy.postfn);
  if (r.has("policy.eval")) {
    const auto v = r.text("policy.eval");
    if (v == "exact") {
      c.policy.eval = EvalMode::Exact;
    } else if (v == "shots") {
      c.policy.eval = EvalMode::Shots;
    } else {
      throw ConfigError("config: policy.eval = '" + v + "' (expected exact or shots)");
    }
  }
  r.get("policy.shots", c.policy.shots);
  r.get("policy.beta", c.policy.beta);
  if (r.has("policy.z_qubits")) {
    const auto v = r.text("policy.z_qubits");
    if (v != "all") {
      for (const auto& s : split_list(v)) {
        const int q = Reader::parse<int>("policy.z_qubits", s);
        if (q < 0 || q >= 63) throw ConfigError("config: policy.z_qubits entry out of range");
        c.policy.z_mask |= std::uint64_t{1} << q;
      }
    }
  }

  // Environment-dependent training defaults.
  auto& t = c.training;
  if (env.kind == EnvKind::CartPole) {
    t.rates = {0.01, 0.1, 0.1};
    t.init = ThetaInit::Normal;
  } else {
    t.rates = {0.1, 0.1, 0.1};
    t.init = ThetaInit::Uniform;
  }
  r.get("training.episodes", t.episodes);
  r.get("training.batch_size", t.batch_size);
  r.get("training.gamma", t.gamma);
  r.get("training.lr_theta", t.rates.theta);
  r.get("training.lr_lambda", t.rates.lambda);
  r.get("training.lr_weights", t.rates.weights);
  if (r.has("training.init")) {
    const auto v = r.text("training.init");
    if (v == "uniform") {
      t.init = ThetaInit::Uniform;
    } else if (v == "normal") {
      t.init = ThetaInit::Normal;
    } else {
      throw ConfigError("config: training.init = '" + v + "' (expected uniform or normal)");
    }
  }
  r.get("training.theta_stddev", t.theta_stddev);
  r.get("training.weight_init", t.weight_init);

  r.get("analysis.state_sampler", c.analysis.state_sampler);
  r.get("analysis.param_sets", c.analysis.param_sets);
  r.get("analysis.states_per_set", c.analysis.states_per_set);
  if (r.has("analysis.data_sizes")) {
    c.analysis.data_sizes.clear();
    for (const auto& s : split_list(r.text("analysis.data_sizes"))) {
      c.analysis.data_sizes.push_back(Reader::parse<double>("analysis.data_sizes", s));
    }
  }

  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
  return parse_config(in, path.has_parent_path() ? path.parent_path() : ".");
}

int ExperimentConfig::num_actions() const {
  switch (env.kind) {
    case EnvKind::CartPole: return 2;
    case EnvKind::FrozenLake: return 4;
    case EnvKind::Bandit: return env.bandit_actions;
  }
  return 0;
}

std::unique_ptr<Environment> ExperimentConfig::make_environment() const {
  switch (env.kind) {
    case EnvKind::CartPole: return std::make_unique<CartPole>(env.cartpole_version);
    case EnvKind::Bandit: {
      auto optimal = env.bandit_optimal.empty()
                         ? ContextualBandit::block_map(env.bandit_states, env.bandit_actions)
                         : env.bandit_optimal;
      return std::make_unique<ContextualBandit>(env.bandit_states, env.bandit_actions,
                                                std::move(optimal), env.bandit_reward);
    }
    case EnvKind::FrozenLake: {
      auto grid = env.lake_map;
      if (!env.lake_map_file.empty()) {
        std::filesystem::path path = env.lake_map_file;
        if (path.is_relative()) path = base_dir / path;
        std::ifstream in(path);
        if (!in) throw ConfigError("environment.map_file: cannot open '" + path.string() + "'");
        grid = read_frozenlake_map(in);
      }
      if (grid.empty()) grid = FrozenLake::default_map();
      return std::make_unique<FrozenLake>(grid, env.lake_slippery, env.lake_rewards,
                                          env.lake_horizon);
    }
  }
  throw ConfigError("environment.type: unsupported");
}

FeatureEncoder ExperimentConfig::make_encoder() const {
  if (env.kind == EnvKind::CartPole) return FeatureEncoder::cartpole();
  const auto e = make_environment();
  const int states = env.kind == EnvKind::Bandit
                         ? env.bandit_states
                         : static_cast<const FrozenLake&>(*e).num_states();
  return FeatureEncoder::binary(model.n_qubits, states);
}

PostProcessing ExperimentConfig::make_postfn() const {
  return parse_postfn(policy.postfn, model.n_qubits, num_actions(), base_dir);
}

std::unique_ptr<Policy> ExperimentConfig::make_policy() const {
  if (policy.kind == PolicyKind::Softmax) {
    return std::make_unique<RestrictedSoftmaxPolicy>(model, num_actions(), policy.beta,
                                                     policy.z_mask);
  }
  return std::make_unique<RawVqcPolicy>(model, make_postfn(), policy.eval, policy.shots);
}

void ExperimentConfig::validate() const {
  auto wrap = [](const std::string& field, auto&& check) {
    try {
      check();
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError("config: " + field + ": " + e.what());
    }
  };
  if (seeds.empty()) throw ConfigError("config: experiment.seeds must list at least one seed");
  wrap("model", [&] { model.validate(); });
  wrap("training", [&] { training.validate(); });
  wrap("environment", [&] { (void)make_environment(); });
  wrap("environment/model", [&] {
    const auto enc = make_encoder();
    if (enc.output_size() != model.n_qubits) {
      throw ConfigError("config: encoder emits " + std::to_string(enc.output_size()) +
                        " features but model.qubits = " + std::to_string(model.n_qubits));
    }
  });
  if (policy.kind == PolicyKind::RawVqc) {
    const auto fn = make_postfn();
    if (fn.num_actions() != num_actions()) {
      throw ConfigError("config: policy.postfn yields " + std::to_string(fn.num_actions()) +
                        " actions, environment has " + std::to_string(num_actions()));
    }
    if (policy.eval == EvalMode::Shots && policy.shots == 0) {
      throw ConfigError("config: policy.shots must be >= 1");
    }
  } else {
    if (model.n_qubits < 64 && (policy.z_mask >> model.n_qubits) != 0) {
      throw ConfigError("config: policy.z_qubits names a qubit outside the model");
    }
    if (!std::isfinite(policy.beta)) throw ConfigError("config: policy.beta must be finite");
  }
  if (analysis.state_sampler != "normal" && analysis.state_sampler != "uniform") {
    throw ConfigError("config: analysis.state_sampler = '" + analysis.state_sampler +
                      "' (expected normal or uniform)");
  }
  if (analysis.param_sets == 0 || analysis.states_per_set == 0) {
    throw ConfigError("config: analysis.param_sets and analysis.states_per_set must be >= 1");
  }
  for (double n : analysis.data_sizes) {
    if (!(n > 2.0 * std::numbers::pi * std::log(n)) || !std::isfinite(n)) {
      throw ConfigError("config: analysis.data_sizes entry " + format_double(n) +
                        " is too small (need n / (2 pi ln n) > 1)");
    }
  }
}

std::string ExperimentConfig::resolved() const {
  std::ostringstream o;
  o << "[experiment]\nseeds = " << join(seeds) << "\n\n[environment]\ntype = " << env_name(env.kind)
    << '\n';
  switch (env.kind) {
    case EnvKind::CartPole:
      o << "version = " << (env.cartpole_version == CartPoleVersion::V0 ? "v0" : "v1") << '\n';
      break;
    case EnvKind::Bandit: {
      o << "states = " << env.bandit_states << "\nactions = " << env.bandit_actions
        << "\noptimal = "
        << (env.bandit_optimal.empty() ? std::string("block") : join(env.bandit_optimal))
        << "\nreward = " << (env.bandit_reward == BanditReward::PlusMinusOne ? "pm1" : "acc01")
        << '\n';
      break;
    }
    case EnvKind::FrozenLake: {
      if (!env.lake_map_file.empty()) o << "map_file = " << env.lake_map_file << '\n';
      std::string rows;
      for (const auto& row : env.lake_map.empty() ? FrozenLake::default_map() : env.lake_map) {
        rows += (rows.empty() ? "" : ",") + row;
      }
      if (env.lake_map_file.empty()) o << "map = " << rows << '\n';
      o << "slippery = " << (env.lake_slippery ? "true" : "false")
        << "\nstep_reward = " << format_double(env.lake_rewards.step)
        << "\nhole_reward = " << format_double(env.lake_rewards.hole)
        << "\ngoal_reward = " << format_double(env.lake_rewards.goal)
        << "\nhorizon = " << env.lake_horizon << '\n';
      break;
    }
  }
  o << "\n[model]\nqubits = " << model.n_qubits << "\ndepth = " << model.depth
    << "\nentangler = " << to_string(model.entangler)
    << "\nhadamard = " << (model.hadamard_prefix ? "true" : "false") << "\n\n[policy]\nkind = "
    << (policy.kind == PolicyKind::RawVqc ? "raw" : "softmax") << '\n';
  if (policy.kind == PolicyKind::RawVqc) {
    o << "postfn = " << policy.postfn
      << "\neval = " << (policy.eval == EvalMode::Exact ? "exact" : "shots") << '\n';
    if (policy.eval == EvalMode::Shots) o << "shots = " << policy.shots << '\n';
  } else {
    o << "beta = " << format_double(policy.beta) << "\nz_qubits = ";
    if (policy.z_mask == 0) {
      o << "all";
    } else {
      std::vector<int> qs;
      for (int q = 0; q < 64; ++q) {
        if ((policy.z_mask >> q) & 1U) qs.push_back(q);
      }
      o << join(qs);
    }
    o << '\n';
  }
  const auto& t = training;
  o << "\n[training]\nepisodes = " << t.episodes << "\nbatch_size = " << t.batch_size
    << "\ngamma = " << format_double(t.gamma) << "\nlr_theta = " << format_double(t.rates.theta)
    << "\nlr_lambda = " << format_double(t.rates.lambda)
    << "\nlr_weights = " << format_double(t.rates.weights)
    << "\ninit = " << (t.init == ThetaInit::Uniform ? "uniform" : "normal")
    << "\ntheta_stddev = " << format_double(t.theta_stddev)
    << "\nweight_init = " << format_double(t.weight_init) << "\n\n[analysis]\nstate_sampler = "
    << analysis.state_sampler << "\nparam_sets = " << analysis.param_sets
    << "\nstates_per_set = " << analysis.states_per_set
    << "\ndata_sizes = " << join(analysis.data_sizes) << '\n';
  return o.str();
}

}  // namespace qpg
