#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "textrl/agent.hpp"
#include "textrl/engine.hpp"
#include "textrl/game.hpp"
#include "textrl/paraphrase.hpp"
#include "textrl/replay.hpp"

namespace textrl {

struct ExperimentConfig {
  std::string game_path;
  AgentConfig agent;
  bool alpha_auto = true;  // pick alpha from the game kind when not given
  int episodes = 2000;     // M
  int episodes_per_block = 200;
  int epochs_per_block = 1;
  int batch_size = 32;
  double eta = 0.001;
  std::size_t replay_capacity = 100000;
  int eval_episodes = 200;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  // Embedding capture (drrn): state id to probe (default: start state) and
  // the episode checkpoints to capture at.
  std::string probe_state;
  std::vector<int> capture_episodes;
};

ExperimentConfig load_experiment_config(std::istream& in);
ExperimentConfig load_experiment_config_file(const std::string& path);
std::vector<std::string> validate_config(const ExperimentConfig& cfg);

// alpha / max_actions resolution against a concrete game:
// alpha 0.2 for deterministic games, 1.0 for stochastic ones; ma_dqn/linear
// slot count from the game's max action count.
AgentConfig resolve_agent_config(const ExperimentConfig& cfg,
                                 const GameSpec& game);

// State-side and action-side vocabularies from the game's texts; tied agents
// get one joint vocabulary on both sides so the input dims match.
std::pair<Vocabulary, Vocabulary> build_vocabularies(const GameSpec& game,
                                                     bool tied);

struct EpisodeResult {
  double total_reward = 0.0;
  double final_reward = 0.0;
  int steps = 0;
  std::vector<TransitionTuple> tuples;  // filled when recording
};

// One episode under softmax selection. All randomness (action shuffling,
// outcome sampling, selection draws) derives from episode_seed.
EpisodeResult run_episode(const QScorer& scorer, double alpha,
                          const GameSpec& game, std::uint64_t episode_seed,
                          bool record, const ParaphraseMap* paraphrase = nullptr);

struct EvalResult {
  double mean = 0.0;
  double stddev = 0.0;
  int episodes = 0;
};

// Mean/std of final rewards under softmax selection, no learning.
EvalResult evaluate(const QScorer& scorer, double alpha, const GameSpec& game,
                    int episodes, std::uint64_t seed,
                    const ParaphraseMap* paraphrase = nullptr);

struct CurvePoint {
  int episodes_seen = 0;
  double mean = 0.0;
  double stddev = 0.0;
};

struct EmbeddingCapture {
  int episodes_seen = 0;
  std::string state_id;
  Vec state_embedding;
  std::vector<std::string> action_texts;  // underlying order
  std::vector<Vec> action_embeddings;
};

struct TrainResult {
  std::vector<CurvePoint> curve;            // aggregated over seeds
  std::vector<std::uint64_t> seeds;
  std::vector<double> final_rewards;        // per-seed final eval mean
  std::vector<Agent> agents;                // per seed
  std::vector<std::vector<EmbeddingCapture>> captures;  // per seed
  double alpha = 0.0;                       // resolved
};

// Block-wise experience-replay training: generate episodes_per_block episodes
// into the replay memory, shuffle, run epochs_per_block passes of mini-batch
// SGD with targets recomputed from the current parameters, then evaluate.
// Seeds run as independent workers with disjoint RNG streams.
TrainResult train(const ExperimentConfig& cfg, const GameSpec& game,
                  std::uint64_t master_seed, int threads = 0);

}  // namespace textrl
