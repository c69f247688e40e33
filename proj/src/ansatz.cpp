#include "qpg/ansatz.hpp"

#include <charconv>
#include <algorithm>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "qpg/csv.hpp"

namespace qpg {

std::string to_string(Entangler e) { return e == Entangler::CZ ? "cz" : "cx"; }

Entangler entangler_from_string(const std::string& name) {
  if (name == "cz" || name == "CZ") return Entangler::CZ;
  if (name == "cx" || name == "CX") return Entangler::CX;
  throw std::invalid_argument("unknown entangler '" + name + "' (expected cz or cx)");
}

void ModelConfig::validate() const {
  if (n_qubits < 1 || n_qubits > Statevector::kMaxQubits) {
    throw std::invalid_argument("model: n_qubits must be in [1, " +
                                std::to_string(Statevector::kMaxQubits) + "]");
  }
  if (depth < 1) throw std::invalid_argument("model: depth must be >= 1");
}

ParamCounts param_counts(const ModelConfig& config) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.n_qubits);
  const auto d = static_cast<std::size_t>(config.depth);
  return {2 * n * (d + 1), 2 * n * d};
}

double& ParamSet::at(std::size_t i) {
  if (i < theta.size()) return theta[i];
  if (i - theta.size() < lambda.size()) return lambda[i - theta.size()];
  throw std::out_of_range("ParamSet: index " + std::to_string(i) + " out of range");
}

double ParamSet::at(std::size_t i) const { return const_cast<ParamSet&>(*this).at(i); }

std::vector<double> ParamSet::flat() const {
  std::vector<double> out(theta);
  out.insert(out.end(), lambda.begin(), lambda.end());
  return out;
}

ParamSet ParamSet::from_flat(const ModelConfig& config, std::span<const double> values) {
  const auto counts = param_counts(config);
  if (values.size() != counts.total()) {
    throw std::invalid_argument("ParamSet: expected " + std::to_string(counts.total()) +
                                " values, got " + std::to_string(values.size()));
  }
  ParamSet p;
  p.theta.assign(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(counts.theta));
  p.lambda.assign(values.begin() + static_cast<std::ptrdiff_t>(counts.theta), values.end());
  return p;
}

ParamSet ParamSet::zeros(const ModelConfig& config) {
  const auto counts = param_counts(config);
  return {std::vector<double>(counts.theta, 0.0), std::vector<double>(counts.lambda, 0.0)};
}

ParamSet init_params(const ModelConfig& config, ThetaInit scheme, Rng& rng, double stddev) {
  const auto counts = param_counts(config);
  ParamSet p;
  p.theta.resize(counts.theta);
  for (auto& t : p.theta) {
    if (scheme == ThetaInit::Uniform) {
      // (-pi, pi]
      t = std::numbers::pi - 2.0 * std::numbers::pi * rng.uniform();
    } else {
      t = rng.normal(0.0, stddev);
    }
  }
  p.lambda.assign(counts.lambda, 1.0);
  return p;
}

Circuit::Circuit(const ModelConfig& config) : config_(config), counts_(param_counts(config)) {
  const int n = config.n_qubits;
  const int theta_base = 0;
  const int lambda_base = static_cast<int>(counts_.theta);

  if (config.hadamard_prefix) {
    for (int q = 0; q < n; ++q) gates_.push_back({GateKind::H, q});
  }
  auto variational = [&](int layer) {
    for (int q = 0; q < n; ++q) {
      const int base = theta_base + 2 * (layer * n + q);
      gates_.push_back({GateKind::RZ, q, -1, base});
      gates_.push_back({GateKind::RY, q, -1, base + 1});
    }
    const GateKind ent = config.entangler == Entangler::CZ ? GateKind::CZ : GateKind::CX;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) gates_.push_back({ent, i, j});
    }
  };
  auto encoding = [&](int layer) {
    for (int q = 0; q < n; ++q) {
      const int base = lambda_base + 2 * ((layer - 1) * n + q);
      gates_.push_back({GateKind::RY, q, -1, base, q});
      gates_.push_back({GateKind::RZ, q, -1, base + 1, q});
    }
  };

  variational(0);
  for (int layer = 1; layer <= config.depth; ++layer) {
    encoding(layer);
    variational(layer);
  }
}

Statevector Circuit::prepare(std::span<const double> flat, std::span<const double> features) const {
  if (flat.size() != counts_.total()) {
    throw std::invalid_argument("Circuit: expected " + std::to_string(counts_.total()) +
                                " parameters, got " + std::to_string(flat.size()));
  }
  if (features.size() != static_cast<std::size_t>(config_.n_qubits)) {
    throw std::invalid_argument("Circuit: expected " + std::to_string(config_.n_qubits) +
                                " features, got " + std::to_string(features.size()));
  }
  Statevector sv(config_.n_qubits);
  for (const Gate& g : gates_) {
    double angle = 0.0;
    if (g.param >= 0) {
      angle = flat[static_cast<std::size_t>(g.param)];
      if (g.feature >= 0) angle *= features[static_cast<std::size_t>(g.feature)];
    }
    switch (g.kind) {
      case GateKind::H: sv.apply_h(g.q0); break;
      case GateKind::RY: sv.apply_ry(g.q0, angle); break;
      case GateKind::RZ: sv.apply_rz(g.q0, angle); break;
      case GateKind::CZ: sv.apply_cz(g.q0, g.q1); break;
      case GateKind::CX: sv.apply_cx(g.q0, g.q1); break;
    }
  }
  return sv;
}

Statevector Circuit::prepare(const ParamSet& params, std::span<const double> features) const {
  if (params.theta.size() != counts_.theta || params.lambda.size() != counts_.lambda) {
    throw std::invalid_argument("Circuit: parameter block sizes do not match the model");
  }
  return prepare(params.flat(), features);
}

std::size_t Circuit::rotation_count() const {
  std::size_t count = 0;
  for (const auto& g : gates_) count += (g.kind == GateKind::RY || g.kind == GateKind::RZ);
  return count;
}

std::size_t Circuit::entangler_count() const {
  std::size_t count = 0;
  for (const auto& g : gates_) count += (g.kind == GateKind::CZ || g.kind == GateKind::CX);
  return count;
}

Statevector prepare_state(const ModelConfig& config, const ParamSet& params,
                          std::span<const double> features) {
  return Circuit(config).prepare(params, features);
}

ShiftPlan shift_plan(const ModelConfig& config, const ParamSet& params, std::size_t index,
                     std::span<const double> features) {
  const auto counts = param_counts(config);
  if (index >= counts.total()) {
    throw std::out_of_range("shift_plan: parameter index " + std::to_string(index) +
                            " out of range (" + std::to_string(counts.total()) + ")");
  }
  constexpr double half_pi = std::numbers::pi / 2;
  ShiftPlan plan;
  if (index < counts.theta) {
    ParamSet plus = params, minus = params;
    plus.theta[index] += half_pi;
    minus.theta[index] -= half_pi;
    plan.push_back({std::move(plus), 0.5});
    plan.push_back({std::move(minus), -0.5});
    return plan;
  }
  const std::size_t li = index - counts.theta;
  const auto qubit = static_cast<std::size_t>((li / 2) % static_cast<std::size_t>(config.n_qubits));
  if (qubit >= features.size()) throw std::invalid_argument("shift_plan: missing features");
  const double s = features[qubit];
  if (s == 0.0) {
    plan.push_back({params, 0.0});
    plan.push_back({params, 0.0});
    return plan;
  }
  ParamSet plus = params, minus = params;
  plus.lambda[li] += half_pi / s;
  minus.lambda[li] -= half_pi / s;
  plan.push_back({std::move(plus), s / 2});
  plan.push_back({std::move(minus), -s / 2});
  return plan;
}

std::vector<std::vector<double>> shift_jacobian(const Circuit& circuit, const ParamSet& params,
                                                std::span<const double> features,
                                                const StateFunctional& observe) {
  const std::size_t total = circuit.counts().total();
  std::vector<std::vector<double>> jac(total);
  for (std::size_t j = 0; j < total; ++j) {
    const auto plan = shift_plan(circuit.config(), params, j, features);
    for (const auto& term : plan) {
      if (term.coefficient == 0.0) continue;
      const auto values = observe(circuit.prepare(term.params, features));
      if (jac[j].empty()) jac[j].assign(values.size(), 0.0);
      for (std::size_t k = 0; k < values.size(); ++k) jac[j][k] += term.coefficient * values[k];
    }
  }
  // Parameters whose plan is all-zero still need a correctly sized row.
  std::size_t width = 0;
  for (const auto& row : jac) width = std::max(width, row.size());
  if (width == 0) width = observe(circuit.prepare(params, features)).size();
  for (auto& row : jac) {
    if (row.empty()) row.assign(width, 0.0);
  }
  return jac;
}

void write_params(std::ostream& out, const ModelConfig& config, const ParamSet& params,
                  std::span<const double> extra) {
  out << "# qpg-params n=" << config.n_qubits << " d=" << config.depth
      << " entangler=" << to_string(config.entangler)
      << " hadamard=" << (config.hadamard_prefix ? 1 : 0) << " extra=" << extra.size() << '\n';
  for (double v : params.theta) out << format_double(v) << '\n';
  for (double v : params.lambda) out << format_double(v) << '\n';
  for (double v : extra) out << format_double(v) << '\n';
}

ParamCheckpoint read_params(std::istream& in) {
  std::string header;
  if (!std::getline(in, header) || header.rfind("# qpg-params", 0) != 0) {
    throw std::runtime_error("parameter file: missing '# qpg-params' header");
  }
  ParamCheckpoint cp;
  std::size_t extra = 0;
  std::istringstream fields(header.substr(12));
  std::string field;
  while (fields >> field) {
    const auto eq = field.find('=');
    if (eq == std::string::npos) throw std::runtime_error("parameter file: bad header field " + field);
    const auto key = field.substr(0, eq);
    const auto value = field.substr(eq + 1);
    if (key == "n") cp.config.n_qubits = std::stoi(value);
    else if (key == "d") cp.config.depth = std::stoi(value);
    else if (key == "entangler") cp.config.entangler = entangler_from_string(value);
    else if (key == "hadamard") cp.config.hadamard_prefix = value == "1";
    else if (key == "extra") extra = std::stoul(value);
    else throw std::runtime_error("parameter file: unknown header field " + key);
  }
  const auto counts = param_counts(cp.config);
  std::vector<double> values;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    values.push_back(parse_double(line));
  }
  if (values.size() != counts.total() + extra) {
    throw std::runtime_error("parameter file: expected " + std::to_string(counts.total() + extra) +
                             " values, found " + std::to_string(values.size()));
  }
  cp.params = ParamSet::from_flat(
      cp.config, std::span<const double>(values).first(counts.total()));
  cp.extra.assign(values.begin() + static_cast<std::ptrdiff_t>(counts.total()), values.end());
  return cp;
}

}  // namespace qpg
