#pragma once

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace textrl {

struct Outcome {
  double p = 1.0;
  std::string next_id;
  int next = -1;  // resolved state index, -1 until validated
};

struct ActionDef {
  std::string text;
  bool hypertext = false;
  std::vector<Outcome> outcomes;
};

struct GameState {
  std::string id;
  std::string text;
  std::vector<ActionDef> actions;
  std::optional<double> terminal_reward;

  bool terminal() const { return terminal_reward.has_value(); }
};

enum class GameKind { deterministic, stochastic };

struct GameSpec {
  std::string title;
  std::string version;
  GameKind kind = GameKind::deterministic;
  std::string start_id;
  int start = -1;
  double step_penalty = -0.1;
  int max_steps = 500;
  std::vector<GameState> states;
  std::unordered_map<std::string, int> state_index;

  int max_action_count() const;
  std::vector<std::string> state_texts() const;
  std::vector<std::string> action_texts() const;
};

class GameValidationError : public std::runtime_error {
 public:
  explicit GameValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

 private:
  std::vector<std::string> violations_;
};

// Parse without validating. Throws std::runtime_error with a location on
// malformed input.
GameSpec parse_game(std::istream& in);

// All invariant violations, empty when the game is well formed. Resolves
// outcome target indices as a side effect.
std::vector<std::string> validate_game(GameSpec& game);

// parse_game + validate_game; throws GameValidationError when anything fails.
GameSpec load_game(std::istream& in);
GameSpec load_game_file(const std::string& path);

}  // namespace textrl
