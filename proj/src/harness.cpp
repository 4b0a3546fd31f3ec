#include "textrl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <numeric>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace textrl {

namespace {

using nlohmann::json;

Interaction interaction_from_name(const std::string& name) {
  if (name == "inner_product") return Interaction::inner_product;
  if (name == "bilinear") return Interaction::bilinear;
  if (name == "concat_mlp") return Interaction::concat_mlp;
  throw std::invalid_argument("unknown interaction '" + name + "'");
}

AgentConfig parse_agent_config(const json& j, bool& alpha_auto) {
  AgentConfig a;
  a.arch = arch_from_name(j.value("arch", "drrn"));
  a.layers = j.value("layers", 1);
  a.hidden_dim = j.value("hidden_dim", 20);
  a.interaction = interaction_from_name(j.value("interaction", "inner_product"));
  a.tied = j.value("tied", false);
  a.max_actions = j.value("max_actions", 0);
  a.gamma = j.value("gamma", 0.9);
  a.combiner_hidden = j.value("combiner_hidden", 0);
  a.binary_bow = j.value("binary_bow", false);
  if (j.contains("alpha")) {
    a.alpha = j.at("alpha").get<double>();
    alpha_auto = false;
  } else {
    alpha_auto = true;
  }
  return a;
}

}  // namespace

ExperimentConfig load_experiment_config(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
  try {
    ExperimentConfig cfg;
    cfg.game_path = j.value("game", "");
    if (j.contains("agent")) {
      cfg.agent = parse_agent_config(j.at("agent"), cfg.alpha_auto);
    }
    cfg.episodes = j.value("episodes", cfg.episodes);
    cfg.episodes_per_block = j.value("episodes_per_block", cfg.episodes_per_block);
    cfg.epochs_per_block = j.value("epochs_per_block", cfg.epochs_per_block);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.eta = j.value("eta", cfg.eta);
    cfg.replay_capacity = j.value("replay_capacity", cfg.replay_capacity);
    cfg.eval_episodes = j.value("eval_episodes", cfg.eval_episodes);
    if (j.contains("seeds")) {
      cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    }
    cfg.probe_state = j.value("probe_state", "");
    if (j.contains("capture_episodes")) {
      cfg.capture_episodes = j.at("capture_episodes").get<std::vector<int>>();
    }
    return cfg;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("config parse error: ") + e.what());
  }
}

ExperimentConfig load_experiment_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  return load_experiment_config(in);
}

std::vector<std::string> validate_config(const ExperimentConfig& cfg) {
  std::vector<std::string> bad;
  if (cfg.episodes < 0) bad.push_back("episodes must be >= 0");
  if (cfg.episodes_per_block < 1) bad.push_back("episodes_per_block must be >= 1");
  if (cfg.epochs_per_block < 1) bad.push_back("epochs_per_block must be >= 1");
  if (cfg.batch_size < 1) bad.push_back("batch_size must be >= 1");
  if (!(cfg.eta > 0.0)) bad.push_back("eta must be > 0");
  if (cfg.replay_capacity < 1) bad.push_back("replay_capacity must be >= 1");
  if (cfg.eval_episodes < 1) bad.push_back("eval_episodes must be >= 1");
  if (cfg.seeds.empty()) bad.push_back("seeds must be nonempty");
  if (cfg.agent.layers < 1) bad.push_back("agent.layers must be >= 1");
  if (cfg.agent.hidden_dim < 1) bad.push_back("agent.hidden_dim must be >= 1");
  if (!(cfg.agent.gamma >= 0.0 && cfg.agent.gamma < 1.0)) {
    bad.push_back("agent.gamma must be in [0,1)");
  }
  if (!cfg.alpha_auto && !(cfg.agent.alpha > 0.0)) {
    bad.push_back("agent.alpha must be > 0");
  }
  for (int e : cfg.capture_episodes) {
    if (e < 0) bad.push_back("capture_episodes must be >= 0");
  }
  return bad;
}

AgentConfig resolve_agent_config(const ExperimentConfig& cfg,
                                 const GameSpec& game) {
  AgentConfig a = cfg.agent;
  if (cfg.alpha_auto) {
    a.alpha = game.kind == GameKind::stochastic ? 1.0 : 0.2;
  }
  if ((a.arch == Arch::ma_dqn || a.arch == Arch::linear) && a.max_actions == 0) {
    a.max_actions = game.max_action_count();
  }
  return a;
}

std::pair<Vocabulary, Vocabulary> build_vocabularies(const GameSpec& game,
                                                     bool tied) {
  if (tied) {
    auto corpus = game.state_texts();
    const auto actions = game.action_texts();
    corpus.insert(corpus.end(), actions.begin(), actions.end());
    Vocabulary joint = Vocabulary::build(corpus, VocabSide::state);
    Vocabulary action_side(joint.tokens(), VocabSide::action);
    return {std::move(joint), std::move(action_side)};
  }
  const auto stexts = game.state_texts();
  const auto atexts = game.action_texts();
  return {Vocabulary::build(stexts, VocabSide::state),
          Vocabulary::build(atexts, VocabSide::action)};
}

EpisodeResult run_episode(const QScorer& scorer, double alpha,
                          const GameSpec& game, std::uint64_t episode_seed,
                          bool record, const ParaphraseMap* paraphrase) {
  EpisodeResult res;
  Episode episode(game, derive_seed(episode_seed, "env"));
  Rng policy_rng = make_rng(episode_seed, "policy");

  auto presented_texts = [&]() {
    std::vector<std::string> texts = episode.observation().action_texts;
    if (paraphrase) {
      for (auto& t : texts) t = paraphrase->apply(t);
    }
    return texts;
  };

  std::string state_text = episode.observation().state_text;
  std::vector<std::string> actions = presented_texts();
  while (!episode.done()) {
    const Vec q = scorer.q_values(state_text, actions);
    const int choice = select_action(q, alpha, policy_rng);
    const double reward = episode.step(choice);
    ++res.steps;
    res.total_reward += reward;
    res.final_reward = reward;

    std::string next_state_text = episode.observation().state_text;
    std::vector<std::string> next_actions = presented_texts();
    if (record) {
      TransitionTuple t;
      t.state_text = std::move(state_text);
      t.action_texts = std::move(actions);
      t.taken_index = choice;
      t.reward = reward;
      t.next_state_text = next_state_text;
      t.next_action_texts = next_actions;
      t.terminal = episode.done();
      res.tuples.push_back(std::move(t));
    }
    state_text = std::move(next_state_text);
    actions = std::move(next_actions);
  }
  return res;
}

EvalResult evaluate(const QScorer& scorer, double alpha, const GameSpec& game,
                    int episodes, std::uint64_t seed,
                    const ParaphraseMap* paraphrase) {
  if (episodes < 1) throw std::invalid_argument("evaluate: episodes must be >= 1");
  EvalResult out;
  out.episodes = episodes;
  std::vector<double> finals(episodes);
  for (int i = 0; i < episodes; ++i) {
    finals[i] = run_episode(scorer, alpha, game,
                            derive_seed(seed, "eval-episode", i), false,
                            paraphrase)
                    .final_reward;
  }
  double sum = 0.0;
  for (double f : finals) sum += f;
  out.mean = sum / episodes;
  if (episodes > 1) {
    double sq = 0.0;
    for (double f : finals) sq += (f - out.mean) * (f - out.mean);
    out.stddev = std::sqrt(sq / (episodes - 1));
  }
  return out;
}

namespace {

struct SeedRun {
  std::vector<double> eval_means;  // one per checkpoint
  std::vector<EmbeddingCapture> captures;
  std::optional<Agent> agent;
};

EmbeddingCapture capture_embeddings(const Agent& agent, const GameSpec& game,
                                    int state_idx, int episodes_seen) {
  const GameState& s = game.states[state_idx];
  EmbeddingCapture cap;
  cap.episodes_seen = episodes_seen;
  cap.state_id = s.id;
  cap.state_embedding = agent.state_embedding(s.text);
  for (const auto& a : s.actions) {
    cap.action_texts.push_back(a.text);
    cap.action_embeddings.push_back(agent.action_embedding(a.text));
  }
  return cap;
}

SeedRun run_seed(const ExperimentConfig& cfg, const AgentConfig& agent_cfg,
                 const GameSpec& game, const Vocabulary& svocab,
                 const Vocabulary& avocab, std::uint64_t master_seed,
                 std::uint64_t seed_value) {
  const std::uint64_t root = derive_seed(master_seed, "seed-run", seed_value);
  SeedRun run;
  Agent agent(agent_cfg, svocab, avocab, derive_seed(root, "init"));
  ReplayMemory replay(cfg.replay_capacity);
  Rng replay_rng = make_rng(root, "replay");

  const bool capture =
      agent_cfg.arch == Arch::drrn && !cfg.capture_episodes.empty();
  int probe_idx = game.start;
  if (capture && !cfg.probe_state.empty()) {
    auto it = game.state_index.find(cfg.probe_state);
    if (it == game.state_index.end()) {
      throw std::invalid_argument("probe state '" + cfg.probe_state +
                                  "' does not exist");
    }
    probe_idx = it->second;
  }
  std::vector<int> marks = cfg.capture_episodes;
  std::sort(marks.begin(), marks.end());
  std::size_t next_mark = 0;
  auto maybe_capture = [&](int episodes_seen) {
    if (!capture) return;
    bool due = false;
    while (next_mark < marks.size() && marks[next_mark] <= episodes_seen) {
      due = true;
      ++next_mark;
    }
    if (due) {
      run.captures.push_back(
          capture_embeddings(agent, game, probe_idx, episodes_seen));
    }
  };

  run.eval_means.push_back(
      evaluate(agent, agent_cfg.alpha, game, cfg.eval_episodes,
               derive_seed(root, "eval", 0))
          .mean);
  maybe_capture(0);

  int episode_counter = 0;
  int block = 0;
  while (episode_counter < cfg.episodes) {
    ++block;
    const int remaining =
        std::min(cfg.episodes_per_block, cfg.episodes - episode_counter);
    for (int e = 0; e < remaining; ++e) {
      auto res = run_episode(agent, agent_cfg.alpha, game,
                             derive_seed(root, "episode", episode_counter),
                             true);
      ++episode_counter;
      for (auto& t : res.tuples) replay.push(std::move(t));
    }
    for (int epoch = 0; epoch < cfg.epochs_per_block; ++epoch) {
      std::vector<std::size_t> order(replay.size());
      std::iota(order.begin(), order.end(), 0);
      fisher_yates_shuffle(order, replay_rng);
      std::vector<TransitionTuple> batch;
      batch.reserve(cfg.batch_size);
      for (std::size_t i = 0; i < order.size();) {
        batch.clear();
        for (; i < order.size() &&
               batch.size() < static_cast<std::size_t>(cfg.batch_size);
             ++i) {
          batch.push_back(replay[order[i]]);
        }
        agent.learn(batch, cfg.eta);
      }
    }
    run.eval_means.push_back(
        evaluate(agent, agent_cfg.alpha, game, cfg.eval_episodes,
                 derive_seed(root, "eval", block))
            .mean);
    maybe_capture(episode_counter);
  }
  run.agent.emplace(std::move(agent));
  return run;
}

}  // namespace

TrainResult train(const ExperimentConfig& cfg, const GameSpec& game,
                  std::uint64_t master_seed, int threads) {
  auto bad = validate_config(cfg);
  if (!bad.empty()) {
    std::string msg = "invalid experiment config:";
    for (const auto& m : bad) msg += " " + m + ";";
    throw std::invalid_argument(msg);
  }
  const AgentConfig agent_cfg = resolve_agent_config(cfg, game);
  auto [svocab, avocab] = build_vocabularies(game, agent_cfg.tied);

  const int n = static_cast<int>(cfg.seeds.size());
  std::vector<SeedRun> runs(n);
  std::vector<std::exception_ptr> errors(n);

  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::max(1, std::min(workers, n));

  if (workers == 1) {
    for (int i = 0; i < n; ++i) {
      runs[i] = run_seed(cfg, agent_cfg, game, svocab, avocab, master_seed,
                         cfg.seeds[i]);
    }
  } else {
    std::vector<std::thread> pool;
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const int i = next.fetch_add(1);
          if (i >= n) return;
          try {
            runs[i] = run_seed(cfg, agent_cfg, game, svocab, avocab,
                               master_seed, cfg.seeds[i]);
          } catch (...) {
            errors[i] = std::current_exception();
          }
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  TrainResult out;
  out.seeds = cfg.seeds;
  out.alpha = agent_cfg.alpha;
  const std::size_t checkpoints = runs[0].eval_means.size();
  for (std::size_t c = 0; c < checkpoints; ++c) {
    CurvePoint p;
    p.episodes_seen = static_cast<int>(
        std::min<std::int64_t>(static_cast<std::int64_t>(c) * cfg.episodes_per_block,
                               cfg.episodes));
    double sum = 0.0;
    for (const auto& r : runs) sum += r.eval_means[c];
    p.mean = sum / n;
    if (n > 1) {
      double sq = 0.0;
      for (const auto& r : runs) {
        sq += (r.eval_means[c] - p.mean) * (r.eval_means[c] - p.mean);
      }
      p.stddev = std::sqrt(sq / (n - 1));
    }
    out.curve.push_back(p);
  }
  for (auto& r : runs) {
    out.final_rewards.push_back(r.eval_means.back());
    out.agents.push_back(std::move(*r.agent));
    out.captures.push_back(std::move(r.captures));
  }
  return out;
}

}  // namespace textrl
