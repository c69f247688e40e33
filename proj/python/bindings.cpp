#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

#include "qpg/analysis.hpp"
#include "qpg/ansatz.hpp"
#include "qpg/config.hpp"
#include "qpg/decode.hpp"
#include "qpg/policy.hpp"
#include "qpg/train.hpp"

namespace py = pybind11;
using namespace qpg;

namespace {

ModelConfig model_config(int n_qubits, int depth, const std::string& entangler, bool hadamard) {
  Entangler e;
  if (entangler == "cz") e = Entangler::CZ;
  else if (entangler == "cx") e = Entangler::CX;
  else throw std::invalid_argument("entangler must be 'cz' or 'cx'");
  return {n_qubits, depth, e, hadamard};
}

py::dict run_to_dict(const TrainResult& run) {
  std::vector<double> rewards, avg20;
  for (const auto& r : run.records) {
    rewards.push_back(r.reward);
    avg20.push_back(r.avg20);
  }
  py::dict d;
  d["reward"] = rewards;
  d["avg20"] = avg20;
  d["initial_params"] = run.initial_params;
  d["final_params"] = run.final_params;
  return d;
}

}  // namespace

PYBIND11_MODULE(_qpg, m) {
  m.doc() = "Quantum policy-gradient core";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);

  m.def("param_counts", [](int n, int d) {
    const auto c = param_counts({n, d});
    return py::make_tuple(c.theta, c.lambda);
  }, py::arg("n_qubits"), py::arg("depth"));

  py::class_<PostProcessing>(m, "PostProcessing")
      .def_static("msb_local", &PostProcessing::msb_local, py::arg("n_qubits"))
      .def_static("qlocal_parity", &PostProcessing::qlocal_parity, py::arg("n_qubits"), py::arg("q"))
      .def_static("global_recursive", &PostProcessing::global_recursive, py::arg("n_qubits"),
                  py::arg("num_actions"))
      .def_static("explicit_table", &PostProcessing::explicit_table, py::arg("n_qubits"),
                  py::arg("num_actions"), py::arg("table"))
      .def_static("parse", [](const std::string& spec, int n, int m, const std::string& base) {
        return parse_postfn(spec, n, m, base);
      }, py::arg("spec"), py::arg("n_qubits"), py::arg("num_actions"), py::arg("base_dir") = ".")
      .def_property_readonly("num_qubits", &PostProcessing::num_qubits)
      .def_property_readonly("num_actions", &PostProcessing::num_actions)
      .def("decode", py::overload_cast<Bits>(&PostProcessing::decode, py::const_), py::arg("bits"))
      .def("decode_string", py::overload_cast<std::string_view>(&PostProcessing::decode, py::const_),
           py::arg("bitstring"))
      .def("table", &PostProcessing::table)
      .def("is_balanced", &PostProcessing::is_balanced)
      .def("__repr__", &PostProcessing::describe);

  m.def("globality", [](const PostProcessing& fn) {
    const auto g = globality(fn).exact();
    return py::make_tuple(g.num, g.den);
  }, py::arg("postfn"), "Exact globality as a (numerator, denominator) pair.");
  m.def("extracted_information", &extracted_information_table, py::arg("postfn"));
  m.def("count_balanced_partitionings", [](int n, int mcount) {
    return py::int_(py::str(count_balanced_partitionings(n, mcount).str()));
  }, py::arg("n_qubits"), py::arg("num_actions"));
  m.def("globality_histogram", [](int n, int mcount) {
    const auto h = globality_histogram_exhaustive(n, mcount);
    std::map<double, std::uint64_t> out;
    for (const auto& [ei, count] : h.counts) out[h.g_value(ei)] = count;
    return out;
  }, py::arg("n_qubits"), py::arg("num_actions"), "Exhaustive map G -> number of partitionings.");
  m.def("accuracy_bound", &accuracy_bound, py::arg("num_actions"));

  m.def("prepare_probabilities", [](int n, int d, const std::vector<double>& params,
                                    const std::vector<double>& features, const std::string& ent,
                                    bool hadamard) {
    return Circuit(model_config(n, d, ent, hadamard)).prepare(params, features).probabilities();
  }, py::arg("n_qubits"), py::arg("depth"), py::arg("params"), py::arg("features"),
        py::arg("entangler") = "cz", py::arg("hadamard") = false,
        "Basis-state probabilities of the prepared circuit state.");

  py::class_<Policy>(m, "Policy")
      .def_property_readonly("num_actions", &Policy::num_actions)
      .def_property_readonly("num_params", [](const Policy& p) { return p.layout().total(); })
      .def("probs", [](const Policy& p, const std::vector<double>& s, const std::vector<double>& params) {
        return p.probs(s, params);
      }, py::arg("features"), py::arg("params"))
      .def("log_prob_grad", [](const Policy& p, const std::vector<double>& s, int a,
                               const std::vector<double>& params) {
        return p.log_prob_grad(s, a, params);
      }, py::arg("features"), py::arg("action"), py::arg("params"))
      .def("init_params", [](const Policy& p, std::uint64_t seed) {
        Rng rng(seed);
        return init_policy_params(p, ThetaInit::Uniform, rng);
      }, py::arg("seed") = 0)
      .def("__repr__", &Policy::describe);

  py::class_<RawVqcPolicy, Policy>(m, "RawVqcPolicy")
      .def(py::init([](int n, int d, const PostProcessing& fn, const std::string& ent, bool h) {
        return RawVqcPolicy(model_config(n, d, ent, h), fn);
      }), py::arg("n_qubits"), py::arg("depth"), py::arg("postfn"), py::arg("entangler") = "cz",
           py::arg("hadamard") = false);

  py::class_<RestrictedSoftmaxPolicy, Policy>(m, "RestrictedSoftmaxPolicy")
      .def(py::init([](int n, int d, int actions, double beta, std::uint64_t mask,
                       const std::string& ent, bool h) {
        return RestrictedSoftmaxPolicy(model_config(n, d, ent, h), actions, beta, mask);
      }), py::arg("n_qubits"), py::arg("depth"), py::arg("num_actions"), py::arg("beta") = 1.0,
           py::arg("z_mask") = 0, py::arg("entangler") = "cz", py::arg("hadamard") = false);

  m.def("train", [](const std::string& ini_text, std::uint64_t seed, const std::string& base_dir,
                    int jobs) {
    std::istringstream in(ini_text);
    const auto c = parse_config(in, base_dir);
    const auto env = c.make_environment();
    const auto policy = c.make_policy();
    TrainResult run;
    {
      py::gil_scoped_release release;
      run = train_run(*env, c.make_encoder(), *policy, c.training, seed, {}, jobs);
    }
    return run_to_dict(run);
  }, py::arg("config"), py::arg("seed") = 0, py::arg("base_dir") = ".", py::arg("jobs") = 1,
        "REINFORCE run for INI config text; returns per-episode reward and avg20.");

  m.def("resolved_config", [](const std::string& ini_text, const std::string& base_dir) {
    std::istringstream in(ini_text);
    return parse_config(in, base_dir).resolved();
  }, py::arg("config"), py::arg("base_dir") = ".");
}
