#include "textrl/engine.hpp"

#include <numeric>
#include <stdexcept>

namespace textrl {

Episode::Episode(const GameSpec& game, std::uint64_t seed)
    : game_(&game), rng_(seed), state_(game.start) {
  if (game.start < 0) {
    throw std::logic_error("episode: game has no resolved start state");
  }
  present();
}

void Episode::present() {
  const GameState& s = game_->states[state_];
  obs_.state_text = s.text;
  obs_.step_index = steps_;
  obs_.done = s.terminal();
  obs_.presented_permutation.resize(s.actions.size());
  std::iota(obs_.presented_permutation.begin(),
            obs_.presented_permutation.end(), 0);
  if (!obs_.done) {
    fisher_yates_shuffle(obs_.presented_permutation, rng_);
  }
  obs_.action_texts.clear();
  if (!obs_.done) {
    obs_.action_texts.reserve(s.actions.size());
    for (int idx : obs_.presented_permutation) {
      obs_.action_texts.push_back(s.actions[idx].text);
    }
  }
}

double Episode::step(int choice) {
  if (obs_.done) {
    throw std::logic_error("episode: step on a finished episode");
  }
  if (choice < 0 || choice >= static_cast<int>(obs_.action_texts.size())) {
    throw std::out_of_range("episode: action choice " + std::to_string(choice) +
                            " out of range");
  }
  const GameState& s = game_->states[state_];
  const ActionDef& action = s.actions[obs_.presented_permutation[choice]];

  int next = action.outcomes.back().next;
  if (action.outcomes.size() > 1) {
    const double u = uniform_unit(rng_);
    double acc = 0.0;
    for (const auto& o : action.outcomes) {
      acc += o.p;
      if (u < acc) {
        next = o.next;
        break;
      }
    }
  }

  state_ = next;
  ++steps_;
  const GameState& ns = game_->states[next];

  double reward;
  if (ns.terminal()) {
    reward = *ns.terminal_reward;
  } else {
    reward = game_->step_penalty;
  }

  present();
  if (!ns.terminal() && steps_ >= game_->max_steps) {
    // Step cap: the episode ends with only the step penalty.
    obs_.done = true;
    obs_.action_texts.clear();
    obs_.presented_permutation.clear();
  }
  return reward;
}

}  // namespace textrl
