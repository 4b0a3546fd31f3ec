#include "cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "textrl/analysis.hpp"
#include "textrl/engine.hpp"
#include "textrl/game.hpp"
#include "textrl/harness.hpp"
#include "textrl/paraphrase.hpp"
#include "textrl/value_iteration.hpp"

namespace textrl {

namespace {

namespace fs = std::filesystem;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += "\"";
  return out;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

Agent load_agent(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  return Agent::load(in);
}

int cmd_validate(const std::string& game_path, std::ostream& out,
                 std::ostream& err) {
  std::ifstream in(game_path);
  if (!in) {
    err << "cannot open game file '" << game_path << "'\n";
    return 1;
  }
  GameSpec game;
  try {
    game = parse_game(in);
  } catch (const std::exception& e) {
    err << e.what() << "\n";
    return 1;
  }
  const auto bad = validate_game(game);
  if (!bad.empty()) {
    for (const auto& v : bad) err << v << "\n";
    return 1;
  }
  out << "ok: '" << game.title << "', " << game.states.size() << " states, "
      << (game.kind == GameKind::stochastic ? "stochastic" : "deterministic")
      << ", max " << game.max_action_count() << " actions, step penalty "
      << fmt(game.step_penalty) << ", cap " << game.max_steps << "\n";
  return 0;
}

void write_train_outputs(const fs::path& out_dir, const TrainResult& res) {
  auto curve = open_out(out_dir, "curve.csv");
  curve << "episodes,mean,std\n";
  for (const auto& p : res.curve) {
    curve << p.episodes_seen << "," << fmt(p.mean) << "," << fmt(p.stddev)
          << "\n";
  }
  auto final_csv = open_out(out_dir, "final.csv");
  final_csv << "seed,final_reward\n";
  for (std::size_t i = 0; i < res.seeds.size(); ++i) {
    final_csv << res.seeds[i] << "," << fmt(res.final_rewards[i]) << "\n";
  }
  for (std::size_t i = 0; i < res.agents.size(); ++i) {
    auto ckpt = open_out(out_dir, "seed" + std::to_string(res.seeds[i]) + ".ckpt");
    res.agents[i].save(ckpt);
  }
}

int cmd_train(const std::string& config_path, const std::string& out_dir,
              std::uint64_t seed, int threads, std::ostream& out) {
  ExperimentConfig cfg = load_experiment_config_file(config_path);
  const GameSpec game = load_game_file(cfg.game_path);
  const TrainResult res = train(cfg, game, seed, threads);
  write_train_outputs(out_dir, res);
  double mean = 0.0;
  for (double f : res.final_rewards) mean += f;
  mean /= static_cast<double>(res.final_rewards.size());
  out << "trained " << res.seeds.size() << " seed(s), " << cfg.episodes
      << " episodes each; final mean reward " << fmt(mean) << " (alpha "
      << fmt(res.alpha) << ")\n";
  out << "wrote curve.csv, final.csv and checkpoints to " << out_dir << "\n";
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& game_path,
             int episodes, std::uint64_t seed, const std::string& out_dir,
             std::ostream& out) {
  const Agent agent = load_agent(ckpt_path);
  const GameSpec game = load_game_file(game_path);
  const EvalResult res = evaluate(agent, agent.config().alpha, game, episodes,
                                  derive_seed(seed, "eval"));
  out << "mean " << fmt(res.mean) << " std " << fmt(res.stddev) << " over "
      << episodes << " episodes\n";
  if (!out_dir.empty()) {
    auto f = open_out(out_dir, "eval.csv");
    f << "mean,std,episodes\n";
    f << fmt(res.mean) << "," << fmt(res.stddev) << "," << episodes << "\n";
  }
  return 0;
}

int cmd_paraphrase_eval(const std::string& ckpt_path,
                        const std::string& game_path,
                        const std::string& map_path, int episodes,
                        std::uint64_t seed, const std::string& out_dir,
                        std::ostream& out) {
  const Agent agent = load_agent(ckpt_path);
  const GameSpec game = load_game_file(game_path);
  const ParaphraseMap map = ParaphraseMap::load_file(map_path);
  if (map.identity_only()) {
    out << "note: map is identity-only\n";
  }
  const EvalResult res = paraphrase_eval(agent, agent.config().alpha, game, map,
                                         episodes, derive_seed(seed, "eval"));
  out << "paraphrased mean " << fmt(res.mean) << " std " << fmt(res.stddev)
      << " over " << episodes << " episodes\n";

  const auto pairs = correlation_pairs(game, map);
  if (pairs.size() >= 2) {
    const auto rep = q_correlation(agent, pairs);
    out << "pR2 " << fmt(rep.pr2) << " over " << rep.n << " pairs\n";
    if (!out_dir.empty()) {
      auto f = open_out(out_dir, "correlation.csv");
      f << "q_original,q_paraphrase\n";
      for (const auto& p : rep.points) {
        f << fmt(p.q_original) << "," << fmt(p.q_paraphrase) << "\n";
      }
    }
  } else {
    out << "note: map covers fewer than 2 game actions, no correlation\n";
  }
  if (!out_dir.empty()) {
    auto f = open_out(out_dir, "eval.csv");
    f << "mean,std,episodes\n";
    f << fmt(res.mean) << "," << fmt(res.stddev) << "," << episodes << "\n";
  }
  return 0;
}

int cmd_pca(const std::string& config_path, const std::string& out_dir,
            std::uint64_t seed, const std::string& probe_state, int k,
            int threads, std::ostream& out) {
  ExperimentConfig cfg = load_experiment_config_file(config_path);
  const GameSpec game = load_game_file(cfg.game_path);
  if (cfg.agent.arch != Arch::drrn) {
    throw std::runtime_error("pca: embedding capture needs a drrn agent");
  }
  if (!probe_state.empty()) cfg.probe_state = probe_state;
  if (cfg.capture_episodes.empty()) {
    cfg.capture_episodes = {200, 400, 600, cfg.episodes};
  }
  // One model trajectory: the first configured seed.
  cfg.seeds.resize(1);
  const TrainResult res = train(cfg, game, seed, threads);
  const auto& captures = res.captures.front();
  if (captures.empty()) throw std::runtime_error("pca: nothing captured");

  std::vector<Vec> vectors;
  struct Row {
    std::string id;
    std::string side;
    int checkpoint;
  };
  std::vector<Row> rows;
  for (const auto& cap : captures) {
    vectors.push_back(cap.state_embedding);
    rows.push_back({"state:" + cap.state_id, "state", cap.episodes_seen});
    for (std::size_t i = 0; i < cap.action_embeddings.size(); ++i) {
      vectors.push_back(cap.action_embeddings[i]);
      rows.push_back({"action" + std::to_string(i), "action", cap.episodes_seen});
    }
  }
  const PcaResult pca = pca_project(vectors, k);
  auto f = open_out(out_dir, "pca.csv");
  const char* coord_names[] = {"x", "y", "z"};
  f << "id,side";
  for (int c = 0; c < k; ++c) {
    if (c < 3) f << "," << coord_names[c];
    else f << ",c" << c;
  }
  f << ",checkpoint\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    f << csv_escape(rows[i].id) << "," << rows[i].side;
    for (int c = 0; c < k; ++c) f << "," << fmt(pca.projected[i][c]);
    f << "," << rows[i].checkpoint << "\n";
  }
  out << "captured " << captures.size() << " checkpoint(s) of state '"
      << captures.front().state_id << "'; explained variance";
  for (double r : pca.explained_variance_ratio) out << " " << fmt(r);
  out << "\nwrote pca.csv to " << out_dir << "\n";
  return 0;
}

int cmd_qtable(const std::string& ckpt_path, const std::string& state_file,
               const std::string& actions_file, const std::string& out_dir,
               std::ostream& out) {
  const Agent agent = load_agent(ckpt_path);
  std::ifstream sf(state_file);
  if (!sf) throw std::runtime_error("cannot open state file '" + state_file + "'");
  std::stringstream ss;
  ss << sf.rdbuf();
  std::string state_text = ss.str();
  while (!state_text.empty() &&
         (state_text.back() == '\n' || state_text.back() == '\r')) {
    state_text.pop_back();
  }
  std::ifstream af(actions_file);
  if (!af) {
    throw std::runtime_error("cannot open actions file '" + actions_file + "'");
  }
  std::vector<std::string> candidates;
  std::string line;
  while (std::getline(af, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) candidates.push_back(line);
  }
  const auto table = q_table(agent, state_text, candidates);
  std::ostringstream csv;
  csv << "text,q,empty_bow\n";
  for (const auto& e : table) {
    csv << csv_escape(e.text) << "," << fmt(e.q) << "," << (e.empty_bow ? 1 : 0)
        << "\n";
  }
  out << csv.str();
  if (!out_dir.empty()) {
    auto f = open_out(out_dir, "qtable.csv");
    f << csv.str();
  }
  return 0;
}

int cmd_play(const std::string& game_path, const std::string& ckpt_path,
             std::uint64_t seed, std::istream& in, std::ostream& out) {
  const GameSpec game = load_game_file(game_path);
  std::optional<Agent> agent;
  if (!ckpt_path.empty()) agent = load_agent(ckpt_path);

  Episode episode(game, derive_seed(seed, "play"));
  double total = 0.0;
  double final_reward = 0.0;
  while (!episode.done()) {
    const Observation& obs = episode.observation();
    out << "\n" << obs.state_text << "\n";
    Vec q;
    if (agent) q = agent->q_values(obs.state_text, obs.action_texts);
    for (std::size_t i = 0; i < obs.action_texts.size(); ++i) {
      out << "  [" << i << "] " << obs.action_texts[i];
      if (agent) out << "  (q " << fmt(q[i]) << ")";
      out << "\n";
    }
    out << "> " << std::flush;
    std::string line;
    if (!std::getline(in, line)) {
      out << "\n(quit)\n";
      return 0;
    }
    int choice = -1;
    try {
      choice = std::stoi(line);
    } catch (...) {
      out << "enter an action number\n";
      continue;
    }
    if (choice < 0 || choice >= static_cast<int>(obs.action_texts.size())) {
      out << "enter an action number\n";
      continue;
    }
    const double r = episode.step(choice);
    total += r;
    final_reward = r;
    out << "reward " << fmt(r) << "\n";
  }
  if (episode.done() && !episode.observation().state_text.empty()) {
    out << "\n" << game.states[episode.state_index()].text << "\n";
  }
  out << "episode over after " << episode.steps_taken() << " steps: final reward "
      << fmt(final_reward) << ", total " << fmt(total) << "\n";
  return 0;
}

}  // namespace

int run_cli(std::vector<std::string> args, std::istream& in, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Q-learning over text games with relevance networks"};
  app.require_subcommand(1);

  std::uint64_t seed = 1;
  app.add_option("--seed", seed, "master seed for all randomness");
  int threads = 0;
  app.add_option("--threads", threads, "worker threads (0: hardware)");

  std::string game_path, config_path, out_dir, ckpt_path, map_path;
  std::string state_file, actions_file, probe_state;
  int episodes = 200;
  int k = 2;

  auto* validate = app.add_subcommand("validate", "check a game file");
  validate->add_option("--game", game_path, "game file")->required();

  auto* trainc = app.add_subcommand("train", "train agents per the config");
  trainc->add_option("--config", config_path, "experiment config")->required();
  trainc->add_option("--out", out_dir, "output directory")->required();

  auto* evalc = app.add_subcommand("eval", "evaluate a checkpoint");
  evalc->add_option("--checkpoint", ckpt_path, "agent checkpoint")->required();
  evalc->add_option("--game", game_path, "game file")->required();
  evalc->add_option("--episodes", episodes, "evaluation episodes");
  evalc->add_option("--out", out_dir, "output directory");

  auto* parac = app.add_subcommand("paraphrase-eval",
                                   "evaluate with paraphrased action texts");
  parac->add_option("--checkpoint", ckpt_path, "agent checkpoint")->required();
  parac->add_option("--game", game_path, "game file")->required();
  parac->add_option("--map", map_path, "paraphrase map (tsv)")->required();
  parac->add_option("--episodes", episodes, "evaluation episodes");
  parac->add_option("--out", out_dir, "output directory");

  auto* pcac = app.add_subcommand("pca", "project captured embeddings");
  pcac->add_option("--config", config_path, "experiment config")->required();
  pcac->add_option("--out", out_dir, "output directory")->required();
  pcac->add_option("--state", probe_state, "state id to probe");
  pcac->add_option("--k", k, "components");

  auto* qtablec = app.add_subcommand("qtable", "Q-values for candidate actions");
  qtablec->add_option("--checkpoint", ckpt_path, "agent checkpoint")->required();
  qtablec->add_option("--state-file", state_file, "file with the state text")
      ->required();
  qtablec->add_option("--actions-file", actions_file,
                      "file with one action text per line")
      ->required();
  qtablec->add_option("--out", out_dir, "output directory");

  auto* playc = app.add_subcommand("play", "interactive debug loop");
  playc->add_option("--game", game_path, "game file")->required();
  playc->add_option("--checkpoint", ckpt_path, "annotate actions with Q");

  // Let --seed / --threads appear after the subcommand name too.
  for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

  try {
    // CLI11's vector overload consumes a reversed argument stack.
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      // --help and friends
      out << app.help();
      return 0;
    }
    err << e.what() << "\n";
    return 2;
  }

  try {
    if (validate->parsed()) return cmd_validate(game_path, out, err);
    if (trainc->parsed()) return cmd_train(config_path, out_dir, seed, threads, out);
    if (evalc->parsed())
      return cmd_eval(ckpt_path, game_path, episodes, seed, out_dir, out);
    if (parac->parsed())
      return cmd_paraphrase_eval(ckpt_path, game_path, map_path, episodes, seed,
                                 out_dir, out);
    if (pcac->parsed())
      return cmd_pca(config_path, out_dir, seed, probe_state, k, threads, out);
    if (qtablec->parsed())
      return cmd_qtable(ckpt_path, state_file, actions_file, out_dir, out);
    if (playc->parsed()) return cmd_play(game_path, ckpt_path, seed, in, out);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  err << "unknown subcommand\n";
  return 2;
}

}  // namespace textrl
