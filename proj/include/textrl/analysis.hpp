#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "textrl/agent.hpp"
#include "textrl/game.hpp"
#include "textrl/harness.hpp"
#include "textrl/neural.hpp"
#include "textrl/paraphrase.hpp"

namespace textrl {

struct PcaResult {
  std::vector<Vec> projected;        // k coordinates per input vector
  Vec explained_variance_ratio;      // per kept component, of total variance
  Matrix components;                 // k x d, orthonormal rows
  Vec mean;
};

// PCA via eigendecomposition of the covariance matrix. Components are
// orthonormal, ordered by decreasing variance. Throws when k exceeds the
// rank of the centered data.
PcaResult pca_project(const std::vector<Vec>& vectors, int k);

// Reconstruct row i of the input (up to the discarded components) from its
// projection: mean + projected[i] * components.
Vec pca_reconstruct(const PcaResult& pca, const Vec& projected);

struct CorrelationPoint {
  double q_original = 0.0;
  double q_paraphrase = 0.0;
};

struct CorrelationReport {
  int n = 0;
  double pr2 = 0.0;  // OLS R^2 of paraphrase-Q regressed on original-Q
  std::vector<CorrelationPoint> points;
};

// (state text, original action text, paraphrased action text) triples.
using ParaphraseTriple = std::array<std::string, 3>;

// Every (state, action) pair of the game whose action text the map covers.
std::vector<ParaphraseTriple> correlation_pairs(const GameSpec& game,
                                                const ParaphraseMap& map);

// Q-values of original vs paraphrased action texts, each scored as a single
// candidate for its state. Throws when fewer than 2 pairs are given or the
// original-Q variance is zero.
CorrelationReport q_correlation(const QScorer& scorer,
                                std::span<const ParaphraseTriple> pairs);

// evaluate() with paraphrased action texts presented in place of the
// originals; the underlying game dynamics are untouched.
EvalResult paraphrase_eval(const QScorer& scorer, double alpha,
                           const GameSpec& game, const ParaphraseMap& map,
                           int episodes, std::uint64_t seed);

struct QTableEntry {
  std::string text;
  double q = 0.0;
  bool empty_bow = false;  // every token was out of vocabulary
};

// Q for each candidate action text scored independently against the state,
// including texts outside the game's feasible set.
std::vector<QTableEntry> q_table(const Agent& agent,
                                 const std::string& state_text,
                                 std::span<const std::string> candidates);

}  // namespace textrl
