#include "textrl/value_iteration.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace textrl {

double action_value(const GameSpec& game, const std::vector<double>& values,
                    int state, int action, double gamma) {
  const ActionDef& a = game.states[state].actions[action];
  double q = 0.0;
  for (const auto& o : a.outcomes) {
    const GameState& ns = game.states[o.next];
    if (ns.terminal()) {
      q += o.p * (*ns.terminal_reward);
    } else {
      q += o.p * (game.step_penalty + gamma * values[o.next]);
    }
  }
  return q;
}

std::vector<double> optimal_values(const GameSpec& game, double gamma,
                                   double tol) {
  std::vector<double> v(game.states.size(), 0.0);
  for (int iter = 0; iter < 1000000; ++iter) {
    double delta = 0.0;
    for (std::size_t s = 0; s < game.states.size(); ++s) {
      if (game.states[s].terminal()) continue;
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t a = 0; a < game.states[s].actions.size(); ++a) {
        best = std::max(best, action_value(game, v, static_cast<int>(s),
                                           static_cast<int>(a), gamma));
      }
      delta = std::max(delta, std::abs(best - v[s]));
      v[s] = best;
    }
    if (delta < tol) return v;
  }
  throw std::runtime_error("value iteration did not converge");
}

std::vector<int> greedy_policy(const GameSpec& game,
                               const std::vector<double>& values,
                               double gamma) {
  std::vector<int> policy(game.states.size(), -1);
  for (std::size_t s = 0; s < game.states.size(); ++s) {
    if (game.states[s].terminal()) continue;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < game.states[s].actions.size(); ++a) {
      const double q = action_value(game, values, static_cast<int>(s),
                                    static_cast<int>(a), gamma);
      if (q > best) {
        best = q;
        policy[s] = static_cast<int>(a);
      }
    }
  }
  return policy;
}

double policy_expected_final_reward(const GameSpec& game,
                                    const std::vector<int>& policy,
                                    double tol) {
  // Fixed point of F(s) = sum_o p_o * (terminal ? r_o : F(next_o)) under the
  // policy. Converges as long as the policy reaches a terminal state with
  // probability one.
  std::vector<double> f(game.states.size(), 0.0);
  for (int iter = 0; iter < 1000000; ++iter) {
    double delta = 0.0;
    for (std::size_t s = 0; s < game.states.size(); ++s) {
      if (game.states[s].terminal()) continue;
      const ActionDef& a = game.states[s].actions[policy[s]];
      double val = 0.0;
      for (const auto& o : a.outcomes) {
        const GameState& ns = game.states[o.next];
        val += o.p * (ns.terminal() ? *ns.terminal_reward : f[o.next]);
      }
      delta = std::max(delta, std::abs(val - f[s]));
      f[s] = val;
    }
    if (delta < tol) return f[game.start];
  }
  throw std::runtime_error("policy evaluation did not converge");
}

double optimal_expected_final_reward(const GameSpec& game, double gamma) {
  const auto v = optimal_values(game, gamma);
  return policy_expected_final_reward(game, greedy_policy(game, v, gamma));
}

}  // namespace textrl
