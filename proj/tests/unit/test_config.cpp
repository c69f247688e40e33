#include <doctest.h>

#include <sstream>

#include "qpg/config.hpp"

using namespace qpg;

namespace {

ExperimentConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, QPG_DATA_DIR);
}

}  // namespace

TEST_CASE("defaults depend on the environment") {
  const auto cart = parse("[environment]\ntype = cartpole\n");
  CHECK(cart.training.rates.theta == 0.01);
  CHECK(cart.training.rates.lambda == 0.1);
  CHECK(cart.training.init == ThetaInit::Normal);
  CHECK(cart.training.gamma == 0.99);
  CHECK(cart.training.batch_size == 1);
  const auto bandit = parse("[environment]\ntype = bandit\nstates = 8\nactions = 2\n[model]\nqubits = 3\n");
  CHECK(bandit.training.rates.theta == 0.1);
  CHECK(bandit.training.init == ThetaInit::Uniform);
}

TEST_CASE("full config parses and round-trips through resolved()") {
  const auto c = parse(R"(
; comment
[experiment]
seeds = 3, 5
[environment]
type = bandit
states = 8
actions = 4
optimal = 0,0,1,1,2,2,3,3
reward = acc01
[model]
qubits = 3
depth = 4
entangler = cx
[policy]
kind = softmax
beta = 2
z_qubits = 0,2
[training]
episodes = 50
lr_weights = 0.2
[analysis]
state_sampler = uniform
data_sizes = 1000, 1e6
)");
  CHECK(c.seeds == std::vector<std::uint64_t>{3, 5});
  CHECK(c.model.entangler == Entangler::CX);
  CHECK(c.policy.z_mask == 0b101);
  CHECK(c.training.rates.weights == 0.2);
  CHECK(c.analysis.data_sizes == std::vector<double>{1000, 1e6});
  const auto again = parse(c.resolved());
  CHECK(again.resolved() == c.resolved());
  CHECK(c.make_policy()->layout().weights == 4);
}

TEST_CASE("frozen lake map file resolves relative to the config") {
  const auto c = parse("[environment]\ntype = frozenlake\nmap_file = frozenlake_4x4.map\n[policy]\npostfn = global\n");
  const auto env = c.make_environment();
  CHECK(env->num_actions() == 4);
  CHECK(c.make_encoder().output_size() == 4);
}

TEST_CASE("explicit table post-processing") {
  const auto c = parse(
      "[environment]\ntype = bandit\nstates = 16\nactions = 4\n[policy]\npostfn = table:example_4q_4a.table\n");
  CHECK(c.make_postfn().kind() == DecodeKind::ExplicitTable);
}

TEST_CASE("validation errors name the field") {
  auto fails_with = [](const std::string& text, const std::string& needle) {
    try {
      parse(text);
    } catch (const ConfigError& e) {
      const std::string msg = e.what();
      CHECK_MESSAGE(msg.find(needle) != std::string::npos, msg);
      return;
    }
    FAIL("accepted: " << text);
  };
  fails_with("[model]\nqubits = 4\ndepht = 2\n", "model.depht");
  fails_with("[bogus]\nx = 1\n", "[bogus]");
  fails_with("[model]\nqubits = four\n", "model.qubits");
  fails_with("[environment]\ntype = pong\n", "environment.type");
  fails_with("[environment]\ntype = cartpole\n[policy]\npostfn = global\n[model]\nqubits = 3\n", "features");
  fails_with("[environment]\ntype = cartpole\n[policy]\npostfn = parity:9\n", "policy.postfn");
  fails_with("[environment]\ntype = bandit\nstates = 8\nactions = 3\n[model]\nqubits = 3\n[policy]\npostfn = global\n",
             "policy.postfn");
  fails_with("[environment]\ntype = bandit\nstates = 9\nactions = 2\n[model]\nqubits = 3\n", "states");
  fails_with("[training]\ngamma = 2\n", "gamma");
  fails_with("[analysis]\ndata_sizes = 3\n", "data_sizes");
  fails_with("[experiment]\nseeds =\n", "seeds");
  fails_with("[policy]\nkind = softmax\nz_qubits = 7\n", "z_qubits");
}
