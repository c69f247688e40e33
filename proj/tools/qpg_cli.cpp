// Command-line front end: experiments driven by an INI config, CSV outputs.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qpg/analysis.hpp"
#include "qpg/config.hpp"
#include "qpg/csv.hpp"
#include "qpg/decode.hpp"
#include "qpg/train.hpp"

namespace fs = std::filesystem;
using namespace qpg;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct GlobalOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  std::string out_dir = ".";
};

struct DecodeOptions {
  std::string postfn = "global";
  int qubits = 4;
  int actions = 2;
  std::string bits;
  bool dump = false;
  std::string mode = "exhaustive";
  std::uint64_t samples = 100000;
  std::vector<CLI::Option*> size_options;
};

// A table file carries its own size; -n and -m only need to agree with it
// when given.
PostProcessing cli_postfn(DecodeOptions& d) {
  if (d.postfn.rfind("table:", 0) == 0 &&
      std::none_of(d.size_options.begin(), d.size_options.end(),
                   [](const CLI::Option* o) { return o->count() > 0; })) {
    std::ifstream in(d.postfn.substr(6));
    if (!in) throw ConfigError("policy.postfn: cannot open table '" + d.postfn.substr(6) + "'");
    const auto fn = read_table(in);
    d.qubits = fn.num_qubits();
    d.actions = fn.num_actions();
  }
  return parse_postfn(d.postfn, d.qubits, d.actions, ".");
}

ExperimentConfig load(const GlobalOptions& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  auto c = load_config(g.config);
  if (g.seed) c.seeds = {*g.seed};
  return c;
}

std::ofstream open_output(const GlobalOptions& g, const std::string& name) {
  fs::create_directories(g.out_dir);
  const fs::path path = fs::path(g.out_dir) / name;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void header(std::ostream& out, const std::string& command, const std::string& settings) {
  write_comment_block(out, "qpg " + command + "\n" + settings);
}

std::string decode_settings(const DecodeOptions& d) {
  std::ostringstream o;
  o << "postfn = " << d.postfn << "\nqubits = " << d.qubits << "\nactions = " << d.actions;
  return o.str();
}

std::string enum_settings(const DecodeOptions& d, std::uint64_t seed) {
  std::ostringstream o;
  o << "qubits = " << d.qubits << "\nactions = " << d.actions << "\nmode = " << d.mode;
  if (d.mode == "sampled") o << "\nsamples = " << d.samples << "\nseed = " << seed;
  return o.str();
}

int cmd_train(const GlobalOptions& g) {
  const auto c = load(g);
  const auto env = c.make_environment();
  const auto encoder = c.make_encoder();
  const auto policy = c.make_policy();
  std::vector<std::vector<EpisodeRecord>> runs;
  for (const auto seed : c.seeds) {
    const auto run = train_run(*env, encoder, *policy, c.training, seed, {}, g.jobs);
    auto out = open_output(g, "curve_seed" + std::to_string(seed) + ".csv");
    header(out, "train seed=" + std::to_string(seed), c.resolved());
    write_learning_curve_csv(out, run.records);
    const auto ps = ParamSet::from_flat(
        c.model, std::span(run.final_params).first(policy->layout().theta + policy->layout().lambda));
    auto params = open_output(g, "params_seed" + std::to_string(seed) + ".txt");
    write_params(params, c.model, ps,
                 std::span(run.final_params).subspan(policy->layout().theta + policy->layout().lambda));
    double tail = 0.0;
    const std::size_t k = std::min<std::size_t>(20, run.records.size());
    for (std::size_t i = run.records.size() - k; i < run.records.size(); ++i) tail += run.records[i].reward;
    std::cout << "seed " << seed << ": final avg20 = " << format_double(tail / static_cast<double>(k))
              << '\n';
    runs.push_back(run.records);
  }
  auto agg = open_output(g, "curve_aggregate.csv");
  header(agg, "train aggregate", c.resolved());
  write_aggregate_csv(agg, runs);
  return 0;
}

int cmd_globality(const GlobalOptions& g, DecodeOptions& d) {
  const auto fn = cli_postfn(d);
  const auto report = globality(fn);
  std::cout << "G = " << report.exact().str() << " = " << format_double(report.value()) << '\n';
  const bool table = d.dump && fn.num_qubits() <= 8;
  if (table) {
    std::cout << "bits,action,ei\n";
    for (Bits b = 0; b < report.extracted_info.size(); ++b) {
      std::cout << format_bitstring(b, fn.num_qubits()) << ',' << fn.decode(b) << ','
                << report.extracted_info[b] << '\n';
    }
  }
  auto out = open_output(g, "globality.csv");
  header(out, "globality", decode_settings(d) + "\nG = " + report.exact().str());
  out << "bits,action,ei\n";
  for (Bits b = 0; b < report.extracted_info.size(); ++b) {
    out << format_bitstring(b, fn.num_qubits()) << ',' << fn.decode(b) << ','
        << report.extracted_info[b] << '\n';
  }
  return 0;
}

int cmd_enum(const GlobalOptions& g, const DecodeOptions& d) {
  const std::uint64_t seed = g.seed.value_or(0);
  GlobalityHistogram hist;
  if (d.mode == "exhaustive") {
    hist = globality_histogram_exhaustive(d.qubits, d.actions);
  } else if (d.mode == "sampled") {
    Rng rng(seed);
    hist = globality_histogram_sampled(d.qubits, d.actions, d.samples, rng);
  } else {
    throw ConfigError("--mode must be exhaustive or sampled");
  }
  std::cout << "partitionings: " << count_balanced_partitionings(d.qubits, d.actions) << '\n'
            << (hist.exhaustive ? "enumerated: " : "sampled: ") << hist.total << '\n';
  auto out = open_output(g, "histogram.csv");
  header(out, "enum", enum_settings(d, seed));
  write_histogram_csv(out, hist);
  return 0;
}

int cmd_decode(DecodeOptions& d) {
  if (d.bits.empty()) throw ConfigError("--bits is required");
  const auto fn = cli_postfn(d);
  std::cout << fn.decode(d.bits) << '\n';
  return 0;
}

std::vector<EmpiricalFim> survey_fims(const ExperimentConfig& c, const Policy& policy, int jobs) {
  SurveyConfig survey{c.analysis.param_sets, c.analysis.states_per_set, c.seeds.front(), jobs};
  return sample_fims(policy, uniform_param_sampler(policy.layout()),
                     state_sampler_by_name(c.analysis.state_sampler, c.model.n_qubits), survey);
}

int cmd_fim(const GlobalOptions& g) {
  const auto c = load(g);
  const auto policy = c.make_policy();
  const auto fims = survey_fims(c, *policy, g.jobs);
  const auto s = survey_spectrum(fims);
  auto mat = open_output(g, "fim.csv");
  header(mat, "fim (first parameter draw)", c.resolved());
  write_matrix_csv(mat, fims.front().matrix);
  auto spec = open_output(g, "spectrum.csv");
  header(spec, "fim spectrum", c.resolved());
  write_spectrum_csv(spec, s.pooled);
  std::cout << "matrices: " << s.matrices << "\nparameters: " << policy->layout().total()
            << "\nnear-zero fraction: " << format_double(s.pooled.near_zero_fraction())
            << "\nmax asymmetry: " << format_double(s.max_asymmetry)
            << "\nmin eigenvalue: " << format_double(s.min_eigenvalue) << '\n';
  return 0;
}

int cmd_effdim(const GlobalOptions& g) {
  const auto c = load(g);
  const auto policy = c.make_policy();
  const auto report = effective_dimension(survey_fims(c, *policy, g.jobs), c.analysis.data_sizes);
  auto out = open_output(g, "effdim.csv");
  header(out, "effdim", c.resolved());
  write_effdim_csv(out, report);
  for (const auto& p : report.points) {
    std::cout << format_double(p.data_size) << ": " << format_double(p.eff_dim) << " ("
              << format_double(p.normalized) << ")\n";
  }
  return 0;
}

int cmd_bound(const GlobalOptions& g, int actions) {
  if (g.config.empty()) {
    std::cout << format_double(accuracy_bound(actions)) << '\n';
    return 0;
  }
  const auto c = load(g);
  const auto env = c.make_environment();
  const auto* bandit = dynamic_cast<const ContextualBandit*>(env.get());
  if (!bandit) throw ConfigError("bound: environment.type must be bandit");
  if (c.policy.kind != PolicyKind::Softmax) throw ConfigError("bound: policy.kind must be softmax");
  if (!bandit->is_uniform()) throw ConfigError("bound: bandit is not uniform");
  const auto policy = c.make_policy();
  const auto report = bound_compliance_experiment(*bandit, *policy, c.training, c.seeds, 0.02, g.jobs);
  auto out = open_output(g, "bound.csv");
  header(out, "bound", c.resolved());
  out << "seed,initial_accuracy,final_accuracy,bound\n";
  for (std::size_t i = 0; i < report.seeds.size(); ++i) {
    out << report.seeds[i] << ',' << format_double(report.initial_accuracy[i]) << ','
        << format_double(report.final_accuracy[i]) << ',' << format_double(report.bound) << '\n';
  }
  std::cout << "bound: " << format_double(report.bound) << "\ncompliant: "
            << (report.compliant() ? "yes" : "no") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Quantum policy-gradient laboratory"};
  app.require_subcommand(1);
  GlobalOptions g;
  DecodeOptions d;
  int bound_actions = 4;

  auto global = [&](CLI::App* sub, bool config) {
    if (config) sub->add_option("--config", g.config, "INI experiment file")->check(CLI::ExistingFile);
    sub->add_option("--seed", g.seed, "override the seed list with one seed");
    sub->add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", g.out_dir, "output directory");
  };
  auto decode_opts = [&](CLI::App* sub) {
    sub->add_option("--postfn", d.postfn, "msb | parity:<q> | global | table:<path>");
    d.size_options.push_back(sub->add_option("--qubits,-n", d.qubits, "number of qubits"));
    d.size_options.push_back(sub->add_option("--actions,-m", d.actions, "number of actions"));
  };

  auto* train = app.add_subcommand("train", "REINFORCE training; writes learning curves");
  global(train, true);
  auto* glob = app.add_subcommand("globality", "globality of a post-processing function");
  global(glob, false);
  decode_opts(glob);
  glob->add_flag("--dump", d.dump, "print the per-bitstring table (n <= 8)");
  auto* en = app.add_subcommand("enum", "globality histogram over balanced partitionings");
  global(en, false);
  decode_opts(en);
  en->add_option("--mode", d.mode, "exhaustive | sampled");
  en->add_option("--samples", d.samples, "sample count in sampled mode");
  auto* fim = app.add_subcommand("fim", "empirical Fisher information and its spectrum");
  global(fim, true);
  auto* eff = app.add_subcommand("effdim", "effective dimension over data sizes");
  global(eff, true);
  auto* bound = app.add_subcommand("bound", "softmax accuracy bound, or a compliance run with --config");
  global(bound, true);
  bound->add_option("--actions,-m", bound_actions, "number of actions");
  auto* dec = app.add_subcommand("decode", "decode one bitstring");
  global(dec, false);
  decode_opts(dec);
  dec->add_option("--bits", d.bits, "bitstring, most significant qubit first");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*train) return cmd_train(g);
    if (*glob) return cmd_globality(g, d);
    if (*en) return cmd_enum(g, d);
    if (*fim) return cmd_fim(g);
    if (*eff) return cmd_effdim(g);
    if (*bound) return cmd_bound(g, bound_actions);
    if (*dec) return cmd_decode(d);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
