#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "textrl/agent.hpp"
#include "textrl/analysis.hpp"
#include "textrl/game.hpp"
#include "textrl/harness.hpp"

using namespace textrl;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(std::move(args), in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "textrl_cli_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

const char* kGame = TEXTRL_GAMES_DIR "/lighthouse.json";

std::string tiny_config(const fs::path& dir) {
  const std::string cfg = std::string(R"({
    "game": ")") + kGame + R"(",
    "agent": {"arch": "drrn", "layers": 1, "hidden_dim": 8},
    "episodes": 40, "episodes_per_block": 20, "epochs_per_block": 1,
    "batch_size": 8, "eta": 0.005, "eval_episodes": 20, "seeds": [1, 2]
  })";
  const fs::path p = dir / "config.json";
  write_file(p, cfg);
  return p.string();
}

}  // namespace

TEST_CASE("validate: good and bad games, exit codes and messages") {
  CHECK(cli({"validate", "--game", kGame}).code == 0);

  const fs::path dir = fresh_dir("validate");
  const fs::path bad = dir / "bad.json";
  write_file(bad, R"({
    "title": "bad", "kind": "stochastic", "start": "s",
    "states": [
      {"id": "s", "text": "s", "actions": [
        {"text": "a", "outcomes": [
          {"p": 0.5, "next": "end"}, {"p": 0.6, "next": "end"}]}]},
      {"id": "end", "text": "e", "terminal_reward": 1}
    ]})");
  const auto r = cli({"validate", "--game", bad.string()});
  CHECK(r.code == 1);
  CHECK(r.err.find("distribution sums to 1.1") != std::string::npos);

  CHECK(cli({"validate", "--game", (dir / "missing.json").string()}).code == 1);
}

TEST_CASE("usage errors exit with 2, help with 0") {
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"validate"}).code == 2);          // missing required --game
  CHECK(cli({}).code == 2);                    // a subcommand is required
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("train writes curve, finals, and checkpoints; reruns are identical") {
  const fs::path dir = fresh_dir("train");
  const std::string cfg = tiny_config(dir);

  const auto r1 = cli({"train", "--config", cfg, "--out",
                       (dir / "out1").string(), "--seed", "7"});
  REQUIRE(r1.code == 0);
  const auto r2 = cli({"train", "--config", cfg, "--out",
                       (dir / "out2").string(), "--seed", "7"});
  REQUIRE(r2.code == 0);

  const std::string curve1 = slurp(dir / "out1" / "curve.csv");
  CHECK(curve1 == slurp(dir / "out2" / "curve.csv"));
  CHECK(slurp(dir / "out1" / "final.csv") == slurp(dir / "out2" / "final.csv"));
  CHECK(slurp(dir / "out1" / "seed1.ckpt") == slurp(dir / "out2" / "seed1.ckpt"));
  CHECK(curve1.substr(0, 18) == "episodes,mean,std\n");

  // a different master seed changes the outputs
  const auto r3 = cli({"train", "--config", cfg, "--out",
                       (dir / "out3").string(), "--seed", "8"});
  REQUIRE(r3.code == 0);
  CHECK(slurp(dir / "out3" / "curve.csv") != curve1);
}

TEST_CASE("eval and qtable agree with direct library calls") {
  const fs::path dir = fresh_dir("evalq");
  const std::string cfg = tiny_config(dir);
  REQUIRE(cli({"train", "--config", cfg, "--out", (dir / "out").string(),
               "--seed", "7"})
              .code == 0);
  const std::string ckpt = (dir / "out" / "seed1.ckpt").string();

  const auto ev = cli({"eval", "--checkpoint", ckpt, "--game", kGame,
                       "--episodes", "40", "--seed", "5", "--out",
                       (dir / "ev").string()});
  REQUIRE(ev.code == 0);
  std::ifstream ck(ckpt, std::ios::binary);
  const Agent agent = Agent::load(ck);
  const GameSpec game = load_game_file(kGame);
  const auto direct = evaluate(agent, agent.config().alpha, game, 40,
                               derive_seed(5, "eval"));
  std::ostringstream want;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", direct.mean);
  CHECK(ev.out.find(std::string("mean ") + buf) != std::string::npos);

  const fs::path sfile = dir / "state.txt";
  const fs::path afile = dir / "actions.txt";
  write_file(sfile, game.states[game.start].text);
  write_file(afile, "Climb the cliff path toward the lighthouse.\nRow the little boat into the dark harbor swell.\nxyzzy plugh warp\n");
  const auto qt = cli({"qtable", "--checkpoint", ckpt, "--state-file",
                       sfile.string(), "--actions-file", afile.string(),
                       "--out", (dir / "qt").string()});
  REQUIRE(qt.code == 0);
  const std::vector<std::string> cands{
      "Climb the cliff path toward the lighthouse.",
      "Row the little boat into the dark harbor swell.", "xyzzy plugh warp"};
  const auto table = q_table(agent, game.states[game.start].text, cands);
  std::snprintf(buf, sizeof(buf), "%.10g", table[0].q);
  CHECK(qt.out.find(buf) != std::string::npos);
  CHECK(qt.out.find("xyzzy plugh warp") != std::string::npos);
  const std::string qcsv = slurp(dir / "qt" / "qtable.csv");
  CHECK(qcsv.find("empty_bow") != std::string::npos);
  CHECK(qcsv.find("xyzzy plugh warp,") != std::string::npos);
  CHECK(qcsv.find(",1\n") != std::string::npos);  // the OOV candidate is flagged
}

TEST_CASE("paraphrase-eval reports pR2 = 1 for an identity map") {
  const fs::path dir = fresh_dir("para");
  const std::string cfg = tiny_config(dir);
  REQUIRE(cli({"train", "--config", cfg, "--out", (dir / "out").string(),
               "--seed", "7"})
              .code == 0);
  const std::string ckpt = (dir / "out" / "seed1.ckpt").string();

  const GameSpec game = load_game_file(kGame);
  std::string map_text;
  int n = 0;
  for (const auto& s : game.states) {
    for (const auto& a : s.actions) {
      if (n++ > 6) break;
      map_text += a.text + "\t" + a.text + "\n";
    }
  }
  const fs::path map_path = dir / "map.tsv";
  write_file(map_path, map_text);

  const auto r = cli({"paraphrase-eval", "--checkpoint", ckpt, "--game", kGame,
                      "--map", map_path.string(), "--episodes", "30", "--seed",
                      "3", "--out", (dir / "p").string()});
  REQUIRE(r.code == 0);
  CHECK(r.out.find("identity-only") != std::string::npos);
  CHECK(r.out.find("pR2 1 ") != std::string::npos);
  CHECK(slurp(dir / "p" / "correlation.csv").substr(0, 24) ==
        "q_original,q_paraphrase\n");
}

TEST_CASE("pca writes projections for the probe state across checkpoints") {
  const fs::path dir = fresh_dir("pca");
  const std::string cfg = tiny_config(dir);
  const auto r = cli({"pca", "--config", cfg, "--out", (dir / "p").string(),
                      "--seed", "4", "--state", "swamped"});
  REQUIRE(r.code == 0);
  const std::string csv = slurp(dir / "p" / "pca.csv");
  CHECK(csv.substr(0, 22) == "id,side,x,y,checkpoint");
  CHECK(csv.find("state:swamped,state") != std::string::npos);
  CHECK(csv.find("action0,action") != std::string::npos);
}

TEST_CASE("play runs a scripted episode") {
  const auto r = cli({"play", "--game", kGame, "--seed", "9"},
                     "0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n0\n");
  CHECK(r.code == 0);
  const bool finished = r.out.find("episode over") != std::string::npos ||
                        r.out.find("(quit)") != std::string::npos;
  CHECK(finished);
  CHECK(r.out.find("[0]") != std::string::npos);
}
