#pragma once

#include <vector>

#include "textrl/game.hpp"

namespace textrl {

// Exact optimal state values of the underlying finite MDP, converged to a
// 1e-10 sup-norm fixed point. Terminal states have value 0; rewards sit on
// transitions (terminal reward entering a terminal state, step penalty
// otherwise), matching the engine.
std::vector<double> optimal_values(const GameSpec& game, double gamma,
                                   double tol = 1e-10);

// Expected one-step value of taking the given action under values V.
double action_value(const GameSpec& game, const std::vector<double>& values,
                    int state, int action, double gamma);

// Greedy action index per state (lowest index wins ties); -1 for terminals.
std::vector<int> greedy_policy(const GameSpec& game,
                               const std::vector<double>& values, double gamma);

// Expected final (terminal) reward from the start when following `policy`.
// Undiscounted and ignoring step penalties: this is the quantity the
// evaluation harness reports, computed exactly.
double policy_expected_final_reward(const GameSpec& game,
                                    const std::vector<int>& policy,
                                    double tol = 1e-12);

double optimal_expected_final_reward(const GameSpec& game, double gamma);

}  // namespace textrl
