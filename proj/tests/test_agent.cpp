#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "textrl/agent.hpp"
#include "textrl/engine.hpp"
#include "textrl/game.hpp"
#include "textrl/harness.hpp"
#include "textrl/value_iteration.hpp"

using namespace textrl;

namespace {

Vocabulary vocab_of(std::vector<std::string> corpus, VocabSide side) {
  return Vocabulary::build(corpus, side);
}

Agent make_agent(Arch arch, int layers, int hidden,
                 const std::vector<std::string>& scorpus,
                 const std::vector<std::string>& acorpus, std::uint64_t seed,
                 int max_actions = 0) {
  AgentConfig cfg;
  cfg.arch = arch;
  cfg.layers = layers;
  cfg.hidden_dim = hidden;
  cfg.max_actions = max_actions;
  cfg.alpha = 1.0;
  cfg.gamma = 0.9;
  return Agent(cfg, vocab_of(scorpus, VocabSide::state),
               vocab_of(acorpus, VocabSide::action), seed);
}

void zero_params(Agent& a) {
  auto zero_tower = [](Tower& t) {
    for (auto& layer : t.layers) {
      for (double& w : layer.W.a) w = 0.0;
      for (double& b : layer.b) b = 0.0;
    }
  };
  zero_tower(a.two_tower().state_tower);
  zero_tower(a.two_tower().action_tower);
  zero_tower(a.net());
  for (double& w : a.two_tower().bilinear.a) w = 0.0;
  zero_tower(a.two_tower().combiner);
}

const std::vector<std::string> kStates{"red room", "blue room", "green room"};
const std::vector<std::string> kActions{"go red", "go blue", "go green",
                                        "stay put"};

}  // namespace

TEST_CASE("softmax probabilities") {
  CHECK(softmax_probs({3.0, 3.0}, 0.7) == Vec{0.5, 0.5});

  const Vec p = softmax_probs({1.0, 0.0}, 1.0);
  CHECK(p[0] == doctest::Approx(std::exp(1.0) / (std::exp(1.0) + 1.0))
                    .epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(1.0 / (std::exp(1.0) + 1.0)).epsilon(1e-12));

  // probability vector: nonnegative, sums to one, shift invariant
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Vec q;
    const int n = 1 + static_cast<int>(bounded_uint(rng, 6));
    for (int i = 0; i < n; ++i) q.push_back(40.0 * uniform_unit(rng) - 20.0);
    const double alpha = 0.05 + 3.0 * uniform_unit(rng);
    const Vec probs = softmax_probs(q, alpha);
    double sum = 0.0;
    for (double v : probs) {
      CHECK(v >= 0.0);
      sum += v;
    }
    CHECK(std::abs(sum - 1.0) <= 1e-12);

    Vec shifted = q;
    for (double& v : shifted) v += 123.456;
    const Vec probs2 = softmax_probs(shifted, alpha);
    for (std::size_t i = 0; i < probs.size(); ++i) {
      CHECK(probs2[i] == doctest::Approx(probs[i]).epsilon(1e-12));
    }

    // the argmax of q gets the largest probability
    const auto qmax = std::max_element(q.begin(), q.end()) - q.begin();
    const auto pmax = std::max_element(probs.begin(), probs.end()) - probs.begin();
    CHECK(probs[qmax] == probs[pmax]);
  }

  // extreme values must not overflow
  const Vec safe = softmax_probs({1000.0, -1000.0}, 1.0);
  CHECK(safe[0] == 1.0);
  CHECK(safe[1] == 0.0);
}

TEST_CASE("select_action empirical frequencies") {
  Rng rng = make_rng(2024, "select");
  const Vec q{1.0, 0.0};
  int first = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    if (select_action(q, 1.0, rng) == 0) ++first;
  }
  const double freq = first / static_cast<double>(n);
  CHECK(std::abs(freq - 0.7311) < 0.01);

  int sym = 0;
  for (int i = 0; i < n; ++i) {
    if (select_action({2.0, 2.0}, 0.3, rng) == 0) ++sym;
  }
  CHECK(std::abs(sym / static_cast<double>(n) - 0.5) < 0.01);

  // large alpha concentrates on the argmax
  int best = 0;
  for (int i = 0; i < 2000; ++i) {
    if (select_action({0.5, 0.2, 0.4}, 200.0, rng) == 0) ++best;
  }
  CHECK(best > 1990);
}

TEST_CASE("td_target") {
  CHECK(td_target(20.0, {}, true, 0.9) == 20.0);
  CHECK(td_target(-0.1, {1.0, 2.0, 0.0}, false, 0.9) ==
        doctest::Approx(1.7).epsilon(1e-15));
  CHECK(td_target(3.5, {1.0, 9.0}, false, 0.0) == 3.5);
  CHECK_THROWS_AS(td_target(1.0, {}, false, 0.9), std::invalid_argument);
}

TEST_CASE("score: zero-weight drrn gives zero Q for any action list") {
  Agent a = make_agent(Arch::drrn, 2, 8, kStates, kActions, 3);
  zero_params(a);
  const Vec q = a.q_values("red room", {"go red", "go blue", "stay put"});
  CHECK(q == Vec{0.0, 0.0, 0.0});
  const Vec one = a.q_values("green room", {"go green"});
  CHECK(one.size() == 1);
  CHECK(one[0] == 0.0);
}

TEST_CASE("score is equivariant to action order for drrn and pa_dqn") {
  for (Arch arch : {Arch::drrn, Arch::pa_dqn}) {
    Agent a = make_agent(arch, 1, 6, kStates, kActions, 9);
    const std::vector<std::string> acts{"go red", "go blue", "go green",
                                        "stay put"};
    const Vec q = a.q_values("blue room", acts);

    Rng rng = make_rng(14, "perm-prop");
    for (int trial = 0; trial < 30; ++trial) {
      std::vector<int> perm{0, 1, 2, 3};
      fisher_yates_shuffle(perm, rng);
      std::vector<std::string> shuffled;
      for (int i : perm) shuffled.push_back(acts[i]);
      const Vec qp = a.q_values("blue room", shuffled);
      for (std::size_t i = 0; i < perm.size(); ++i) {
        REQUIRE(qp[i] == q[perm[i]]);
      }
    }
  }
}

TEST_CASE("ma_dqn masks unavailable slots and enforces max_actions") {
  Agent a = make_agent(Arch::ma_dqn, 1, 6, kStates, kActions, 5, 3);
  const Vec q2 = a.q_values("red room", {"go red", "go blue"});
  CHECK(q2.size() == 2);
  const Vec q3 = a.q_values("red room", {"go red", "go blue", "go green"});
  CHECK(q3.size() == 3);
  CHECK_THROWS_AS(
      a.q_values("red room", {"go red", "go blue", "go green", "stay put"}),
      std::invalid_argument);
}

TEST_CASE("empty action list is rejected") {
  Agent a = make_agent(Arch::drrn, 1, 4, kStates, kActions, 5);
  CHECK_THROWS_AS(a.q_values("red room", {}), std::invalid_argument);
}

TEST_CASE("tied drrn needs matching input dims") {
  AgentConfig cfg;
  cfg.arch = Arch::drrn;
  cfg.tied = true;
  CHECK_THROWS_AS(Agent(cfg, vocab_of(kStates, VocabSide::state),
                        vocab_of(kActions, VocabSide::action), 1),
                  std::invalid_argument);
  // a joint vocabulary on both sides works
  std::vector<std::string> joint = kStates;
  joint.insert(joint.end(), kActions.begin(), kActions.end());
  Agent ok(cfg, vocab_of(joint, VocabSide::state),
           vocab_of(joint, VocabSide::action), 1);
  CHECK(ok.q_values("red room", {"go red"}).size() == 1);
}

TEST_CASE("learn: a batch whose targets equal predictions changes nothing") {
  Agent a = make_agent(Arch::drrn, 1, 6, kStates, kActions, 21);
  zero_params(a);
  TransitionTuple t;
  t.state_text = "red room";
  t.action_texts = {"go blue", "go red"};
  t.taken_index = 1;
  t.reward = 0.0;  // terminal with zero reward: y = 0 = Q
  t.terminal = true;
  const std::vector<TransitionTuple> batch{t, t, t};
  const double err = a.learn(batch, 0.5);
  CHECK(err == 0.0);
  const Vec q = a.q_values("red room", {"go red", "go blue"});
  CHECK(q == Vec{0.0, 0.0});
}

TEST_CASE("learn: one-dimensional hand-computed update") {
  const std::vector<std::string> s1{"alpha"};
  const std::vector<std::string> a1{"beta"};
  Agent agent = make_agent(Arch::drrn, 1, 1, s1, a1, 2);
  auto& m = agent.two_tower();
  m.state_tower.layers[0].W(0, 0) = 0.4;
  m.state_tower.layers[0].b[0] = 0.0;
  m.action_tower.layers[0].W(0, 0) = -0.3;
  m.action_tower.layers[0].b[0] = 0.0;

  const double y = 1.0;
  const double eta = 0.05;
  const double hs = std::tanh(0.4), ha = std::tanh(-0.3);
  const double q = hs * ha;
  const double dq = q - y;
  // expected sgd update per the chain rule
  const double ws2 = 0.4 - eta * dq * ha * (1 - hs * hs);
  const double bs2 = 0.0 - eta * dq * ha * (1 - hs * hs);
  const double wa2 = -0.3 - eta * dq * hs * (1 - ha * ha);
  const double ba2 = 0.0 - eta * dq * hs * (1 - ha * ha);

  TransitionTuple t;
  t.state_text = "alpha";
  t.action_texts = {"beta"};
  t.taken_index = 0;
  t.reward = y;
  t.terminal = true;
  const std::vector<TransitionTuple> batch{t};
  const double err = agent.learn(batch, eta);
  CHECK(err == doctest::Approx(dq * dq).epsilon(1e-14));
  CHECK(m.state_tower.layers[0].W(0, 0) == doctest::Approx(ws2).epsilon(1e-14));
  CHECK(m.state_tower.layers[0].b[0] == doctest::Approx(bs2).epsilon(1e-14));
  CHECK(m.action_tower.layers[0].W(0, 0) == doctest::Approx(wa2).epsilon(1e-14));
  CHECK(m.action_tower.layers[0].b[0] == doctest::Approx(ba2).epsilon(1e-14));

  // the update moved Q toward the target
  const double q2 = agent.q_values("alpha", {"beta"})[0];
  CHECK(std::abs(q2 - y) < std::abs(q - y));
}

TEST_CASE("learn: ma_dqn and linear touch only the taken output slot") {
  for (Arch arch : {Arch::ma_dqn, Arch::linear}) {
    Agent a = make_agent(arch, 1, 5, kStates, kActions, 31, 3);
    const Matrix before = a.net().layers.back().W;
    const Vec before_b = a.net().layers.back().b;

    TransitionTuple t;
    t.state_text = "blue room";
    t.action_texts = {"go red", "go blue", "go green"};
    t.taken_index = 1;
    t.reward = 2.0;
    t.terminal = true;
    const std::vector<TransitionTuple> batch{t};
    a.learn(batch, 0.01);

    const Matrix& after = a.net().layers.back().W;
    for (int r = 0; r < after.rows; ++r) {
      for (int c = 0; c < after.cols; ++c) {
        if (r == 1) continue;
        REQUIRE(after(r, c) == before(r, c));
      }
    }
    bool slot_changed = false;
    for (int c = 0; c < after.cols; ++c) {
      if (after(1, c) != before(1, c)) slot_changed = true;
    }
    CHECK(slot_changed);
    CHECK(a.net().layers.back().b[0] == before_b[0]);
    CHECK(a.net().layers.back().b[2] == before_b[2]);
  }
}

TEST_CASE("learn drives a tiny deterministic game to the tabular fixed point") {
  // Three decision states with one-hot-ish texts; the oracle is exact value
  // iteration on the underlying MDP.
  const std::string game_json = R"({
    "title": "tiny", "kind": "deterministic", "start": "alpha",
    "step_penalty": -0.1, "max_steps": 50,
    "states": [
      {"id": "alpha", "text": "alpha", "actions": [
        {"text": "bold", "next": "bravo"},
        {"text": "calm", "next": "dud"}]},
      {"id": "bravo", "text": "bravo", "actions": [
        {"text": "dash", "next": "prize"},
        {"text": "drop", "next": "alpha"}]},
      {"id": "dud", "text": "dud", "actions": [
        {"text": "mope", "next": "alpha"},
        {"text": "quit", "next": "zero"}]},
      {"id": "prize", "text": "prize", "terminal_reward": 4},
      {"id": "zero", "text": "zero", "terminal_reward": -3}
    ]
  })";
  std::istringstream in(game_json);
  const GameSpec game = load_game(in);
  const double gamma = 0.9;
  const auto vstar = optimal_values(game, gamma);
  const auto oracle_policy = greedy_policy(game, vstar, gamma);

  ExperimentConfig cfg;
  cfg.agent.arch = Arch::drrn;
  cfg.agent.layers = 1;
  cfg.agent.hidden_dim = 12;
  cfg.agent.gamma = gamma;
  cfg.agent.alpha = 1.0;
  cfg.alpha_auto = false;
  cfg.episodes = 900;
  cfg.episodes_per_block = 100;
  cfg.epochs_per_block = 4;
  cfg.batch_size = 16;
  cfg.eta = 0.02;
  cfg.eval_episodes = 20;
  cfg.seeds = {1};
  const TrainResult res = train(cfg, game, 7, 1);
  const Agent& agent = res.agents[0];

  double sup = 0.0;
  for (const auto& s : game.states) {
    if (s.terminal()) continue;
    std::vector<std::string> texts;
    for (const auto& a : s.actions) texts.push_back(a.text);
    const Vec q = agent.q_values(s.text, texts);
    const int sidx = game.state_index.at(s.id);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double qstar = action_value(game, vstar, sidx, static_cast<int>(i), gamma);
      sup = std::max(sup, std::abs(q[i] - qstar));
    }
    const int greedy =
        static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin());
    CHECK(greedy == oracle_policy[sidx]);
  }
  CHECK(sup < 0.05);
}

TEST_CASE("non-terminal tuples without next actions are rejected") {
  Agent a = make_agent(Arch::drrn, 1, 4, kStates, kActions, 5);
  TransitionTuple t;
  t.state_text = "red room";
  t.action_texts = {"go red"};
  t.taken_index = 0;
  t.reward = -0.1;
  t.terminal = false;  // but no next actions recorded
  const std::vector<TransitionTuple> batch{t};
  CHECK_THROWS_AS(a.learn(batch, 0.01), std::invalid_argument);
}

TEST_CASE("checkpoint round-trips bit-exactly for every architecture") {
  for (Arch arch : {Arch::drrn, Arch::pa_dqn, Arch::ma_dqn, Arch::linear}) {
    Agent a = make_agent(arch, 2, 5, kStates, kActions, 17, 4);
    std::stringstream buf;
    a.save(buf);
    const std::string first = buf.str();
    Agent b = Agent::load(buf);
    std::stringstream buf2;
    b.save(buf2);
    REQUIRE(buf2.str() == first);
    // and behaves identically
    const Vec qa = a.q_values("green room", {"go green", "go red"});
    const Vec qb = b.q_values("green room", {"go green", "go red"});
    REQUIRE(qa == qb);
  }
}

TEST_CASE("drrn with concat_mlp and bilinear interactions also learns") {
  for (Interaction kind : {Interaction::bilinear, Interaction::concat_mlp}) {
    AgentConfig cfg;
    cfg.arch = Arch::drrn;
    cfg.layers = 1;
    cfg.hidden_dim = 6;
    cfg.interaction = kind;
    cfg.alpha = 1.0;
    cfg.gamma = 0.9;
    Agent a(cfg, vocab_of(kStates, VocabSide::state),
            vocab_of(kActions, VocabSide::action), 3);
    TransitionTuple t;
    t.state_text = "red room";
    t.action_texts = {"go red"};
    t.taken_index = 0;
    t.reward = 2.0;
    t.terminal = true;
    const std::vector<TransitionTuple> batch{t};
    double before = std::abs(a.q_values("red room", {"go red"})[0] - 2.0);
    for (int i = 0; i < 200; ++i) a.learn(batch, 0.05);
    double after = std::abs(a.q_values("red room", {"go red"})[0] - 2.0);
    CHECK(after < 0.01);
    CHECK(after < before);
  }
}

TEST_CASE("arch names round trip") {
  for (Arch arch : {Arch::drrn, Arch::pa_dqn, Arch::ma_dqn, Arch::linear}) {
    CHECK(arch_from_name(arch_name(arch)) == arch);
  }
  CHECK_THROWS_AS(arch_from_name("gpt"), std::invalid_argument);
}
