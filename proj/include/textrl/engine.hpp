#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "textrl/game.hpp"
#include "textrl/rng.hpp"

namespace textrl {

struct Observation {
  std::string state_text;
  std::vector<std::string> action_texts;  // presented (shuffled) order
  int step_index = 0;
  bool done = false;
  // presented_permutation[i] is the underlying action index shown at slot i.
  std::vector<int> presented_permutation;
};

// One play-through of a game. Action order is reshuffled from the episode's
// own RNG stream on every observation; outcome sampling draws from the same
// stream, so a (game, seed) pair replays bit-identically.
//
// Single-owner: not safe for concurrent mutation. Distinct episodes may run
// in parallel.
class Episode {
 public:
  Episode(const GameSpec& game, std::uint64_t seed);

  const Observation& observation() const { return obs_; }
  bool done() const { return obs_.done; }
  int state_index() const { return state_; }
  int steps_taken() const { return steps_; }

  // Takes the action at presented slot `choice` and returns the reward:
  // the target's terminal reward when the transition ends the game, the
  // step penalty otherwise (also when the step cap cuts the episode off).
  // Throws std::out_of_range / std::logic_error on misuse.
  double step(int choice);

 private:
  void present();

  const GameSpec* game_;
  Rng rng_;
  int state_ = 0;
  int steps_ = 0;
  Observation obs_;
};

inline Episode reset(const GameSpec& game, std::uint64_t seed) {
  return Episode(game, seed);
}

}  // namespace textrl
