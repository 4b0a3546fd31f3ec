#include "textrl/game.hpp"

#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

namespace textrl {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& parts, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

ActionDef parse_action(const json& j, const std::string& where) {
  if (!j.is_object()) {
    throw std::runtime_error(where + ": action must be an object");
  }
  ActionDef a;
  a.text = j.at("text").get<std::string>();
  a.hypertext = j.value("hypertext", false);
  if (j.contains("outcomes")) {
    for (const auto& o : j.at("outcomes")) {
      Outcome out;
      out.p = o.at("p").get<double>();
      out.next_id = o.at("next").get<std::string>();
      a.outcomes.push_back(std::move(out));
    }
  } else if (j.contains("next")) {
    // Deterministic shorthand: a single certain outcome.
    Outcome out;
    out.p = 1.0;
    out.next_id = j.at("next").get<std::string>();
    a.outcomes.push_back(std::move(out));
  } else {
    throw std::runtime_error(where + ": action needs 'outcomes' or 'next'");
  }
  return a;
}

}  // namespace

int GameSpec::max_action_count() const {
  int m = 0;
  for (const auto& s : states) {
    m = std::max(m, static_cast<int>(s.actions.size()));
  }
  return m;
}

std::vector<std::string> GameSpec::state_texts() const {
  std::vector<std::string> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.text);
  return out;
}

std::vector<std::string> GameSpec::action_texts() const {
  std::vector<std::string> out;
  for (const auto& s : states) {
    for (const auto& a : s.actions) out.push_back(a.text);
  }
  return out;
}

GameValidationError::GameValidationError(std::vector<std::string> violations)
    : std::runtime_error("invalid game: " + join(violations, "; ")),
      violations_(std::move(violations)) {}

GameSpec parse_game(std::istream& in) {
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("game parse error: ") + e.what());
  }
  try {
    GameSpec g;
    g.title = j.value("title", "");
    g.version = j.value("version", "");
    const std::string kind = j.value("kind", "deterministic");
    if (kind == "deterministic") {
      g.kind = GameKind::deterministic;
    } else if (kind == "stochastic") {
      g.kind = GameKind::stochastic;
    } else {
      throw std::runtime_error("game: unknown kind '" + kind + "'");
    }
    g.start_id = j.at("start").get<std::string>();
    g.step_penalty = j.value("step_penalty", -0.1);
    g.max_steps = j.value("max_steps", 500);
    for (const auto& js : j.at("states")) {
      GameState s;
      s.id = js.at("id").get<std::string>();
      s.text = js.at("text").get<std::string>();
      if (js.contains("terminal_reward")) {
        s.terminal_reward = js.at("terminal_reward").get<double>();
      }
      if (js.contains("actions")) {
        int k = 0;
        for (const auto& ja : js.at("actions")) {
          s.actions.push_back(
              parse_action(ja, "state '" + s.id + "' action " + std::to_string(k)));
          ++k;
        }
      }
      g.states.push_back(std::move(s));
    }
    return g;
  } catch (const json::exception& e) {
    throw std::runtime_error(std::string("game parse error: ") + e.what());
  }
}

std::vector<std::string> validate_game(GameSpec& game) {
  std::vector<std::string> bad;
  auto fail = [&](std::string msg) { bad.push_back(std::move(msg)); };

  game.state_index.clear();
  for (std::size_t i = 0; i < game.states.size(); ++i) {
    if (!game.state_index.emplace(game.states[i].id, static_cast<int>(i)).second) {
      fail("duplicate state id '" + game.states[i].id + "'");
    }
  }
  if (game.states.empty()) fail("game has no states");
  if (game.max_steps < 1) fail("max_steps must be >= 1");

  auto it = game.state_index.find(game.start_id);
  if (it == game.state_index.end()) {
    fail("start state '" + game.start_id + "' does not exist");
    game.start = -1;
  } else {
    game.start = it->second;
  }

  for (auto& s : game.states) {
    if (s.terminal() && !s.actions.empty()) {
      fail("terminal state '" + s.id + "' has actions");
    }
    if (!s.terminal() && s.actions.empty()) {
      fail("non-terminal state '" + s.id + "' has no actions");
    }
    int k = 0;
    for (auto& a : s.actions) {
      const std::string where =
          "state '" + s.id + "' action " + std::to_string(k);
      if (a.hypertext && s.text.find(a.text) == std::string::npos) {
        fail(where + ": hypertext action '" + a.text +
             "' is not a substring of the state text");
      }
      double sum = 0.0;
      for (auto& o : a.outcomes) {
        if (!(o.p > 0.0) || o.p > 1.0) {
          fail(where + ": outcome probability " + std::to_string(o.p) +
               " outside (0,1]");
        }
        sum += o.p;
        auto target = game.state_index.find(o.next_id);
        if (target == game.state_index.end()) {
          fail(where + ": unknown target state '" + o.next_id + "'");
          o.next = -1;
        } else {
          o.next = target->second;
        }
      }
      if (!a.outcomes.empty() && std::abs(sum - 1.0) > 1e-9) {
        std::ostringstream msg;
        msg << where << ": distribution sums to " << sum;
        fail(msg.str());
      }
      if (game.kind == GameKind::deterministic && a.outcomes.size() != 1) {
        fail(where + ": deterministic game requires a single outcome");
      }
      ++k;
    }
  }

  // Some terminal state must be reachable from the start.
  if (game.start >= 0) {
    std::unordered_set<int> seen{game.start};
    std::deque<int> queue{game.start};
    bool terminal_reachable = game.states[game.start].terminal();
    while (!queue.empty() && !terminal_reachable) {
      const int cur = queue.front();
      queue.pop_front();
      for (const auto& a : game.states[cur].actions) {
        for (const auto& o : a.outcomes) {
          if (o.next < 0) continue;
          if (game.states[o.next].terminal()) terminal_reachable = true;
          if (seen.insert(o.next).second) queue.push_back(o.next);
        }
      }
    }
    if (!terminal_reachable) {
      fail("no terminal state is reachable from '" + game.start_id + "'");
    }
  }

  return bad;
}

GameSpec load_game(std::istream& in) {
  GameSpec g = parse_game(in);
  auto bad = validate_game(g);
  if (!bad.empty()) throw GameValidationError(std::move(bad));
  return g;
}

GameSpec load_game_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open game file '" + path + "'");
  return load_game(in);
}

}  // namespace textrl
