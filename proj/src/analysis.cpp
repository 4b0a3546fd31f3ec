#include "textrl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace textrl {

namespace {

// Cyclic Jacobi eigendecomposition of a symmetric matrix. Returns
// eigenvalues and fills `vectors` with unit eigenvectors as columns.
Vec jacobi_eigen(Matrix a, Matrix& vectors) {
  const int n = a.rows;
  vectors = Matrix(n, n);
  for (int i = 0; i < n; ++i) vectors(i, i) = 1.0;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (a(p, q) == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = vectors(k, p), vkq = vectors(k, q);
          vectors(k, p) = c * vkp - s * vkq;
          vectors(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  Vec eig(n);
  for (int i = 0; i < n; ++i) eig[i] = a(i, i);
  return eig;
}

}  // namespace

PcaResult pca_project(const std::vector<Vec>& vectors, int k) {
  if (vectors.empty()) throw std::invalid_argument("pca: no input vectors");
  const int n = static_cast<int>(vectors.size());
  const int d = static_cast<int>(vectors.front().size());
  for (const auto& v : vectors) {
    if (static_cast<int>(v.size()) != d) {
      throw std::invalid_argument("pca: inconsistent vector dims");
    }
  }
  if (k < 1 || k > d) throw std::invalid_argument("pca: bad component count");

  PcaResult out;
  out.mean.assign(d, 0.0);
  for (const auto& v : vectors) {
    for (int j = 0; j < d; ++j) out.mean[j] += v[j];
  }
  for (double& m : out.mean) m /= n;

  Matrix cov(d, d);
  for (const auto& v : vectors) {
    for (int i = 0; i < d; ++i) {
      const double ci = v[i] - out.mean[i];
      for (int j = i; j < d; ++j) {
        cov(i, j) += ci * (v[j] - out.mean[j]);
      }
    }
  }
  const double denom = n > 1 ? n - 1 : 1;
  for (int i = 0; i < d; ++i) {
    for (int j = i; j < d; ++j) {
      cov(i, j) /= denom;
      cov(j, i) = cov(i, j);
    }
  }

  Matrix eigvecs;
  Vec eigvals = jacobi_eigen(cov, eigvecs);

  std::vector<int> order(d);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return eigvals[a] > eigvals[b]; });

  double total = 0.0;
  for (double e : eigvals) total += std::max(e, 0.0);
  const double rank_tol =
      std::max(eigvals[order[0]], 0.0) * 1e-12 + 1e-300;
  int rank = 0;
  for (int i = 0; i < d; ++i) {
    if (eigvals[order[i]] > rank_tol) ++rank;
  }
  if (k > rank) {
    throw std::invalid_argument("pca: k exceeds the rank of the data");
  }

  out.components = Matrix(k, d);
  out.explained_variance_ratio.resize(k);
  for (int c = 0; c < k; ++c) {
    const int src = order[c];
    for (int j = 0; j < d; ++j) out.components(c, j) = eigvecs(j, src);
    out.explained_variance_ratio[c] =
        total > 0.0 ? std::max(eigvals[src], 0.0) / total : 0.0;
  }

  out.projected.reserve(n);
  for (const auto& v : vectors) {
    Vec p(k, 0.0);
    for (int c = 0; c < k; ++c) {
      double acc = 0.0;
      for (int j = 0; j < d; ++j) acc += out.components(c, j) * (v[j] - out.mean[j]);
      p[c] = acc;
    }
    out.projected.push_back(std::move(p));
  }
  return out;
}

Vec pca_reconstruct(const PcaResult& pca, const Vec& projected) {
  const int k = pca.components.rows;
  const int d = pca.components.cols;
  if (static_cast<int>(projected.size()) != k) {
    throw std::invalid_argument("pca: projection size mismatch");
  }
  Vec x = pca.mean;
  for (int c = 0; c < k; ++c) {
    for (int j = 0; j < d; ++j) x[j] += projected[c] * pca.components(c, j);
  }
  return x;
}

std::vector<ParaphraseTriple> correlation_pairs(const GameSpec& game,
                                                const ParaphraseMap& map) {
  std::vector<ParaphraseTriple> out;
  for (const auto& s : game.states) {
    for (const auto& a : s.actions) {
      if (map.covers(a.text)) {
        out.push_back({s.text, a.text, map.apply(a.text)});
      }
    }
  }
  return out;
}

CorrelationReport q_correlation(const QScorer& scorer,
                                std::span<const ParaphraseTriple> pairs) {
  if (pairs.size() < 2) {
    throw std::invalid_argument("q_correlation: needs at least 2 pairs");
  }
  CorrelationReport rep;
  rep.n = static_cast<int>(pairs.size());
  rep.points.reserve(pairs.size());
  for (const auto& [state, orig, para] : pairs) {
    CorrelationPoint p;
    p.q_original = scorer.q_values(state, {orig})[0];
    p.q_paraphrase = scorer.q_values(state, {para})[0];
    rep.points.push_back(p);
  }

  double mx = 0.0, my = 0.0;
  for (const auto& p : rep.points) {
    mx += p.q_original;
    my += p.q_paraphrase;
  }
  mx /= rep.n;
  my /= rep.n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (const auto& p : rep.points) {
    const double dx = p.q_original - mx;
    const double dy = p.q_paraphrase - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) {
    throw std::invalid_argument("q_correlation: zero variance in original Q");
  }
  // R^2 of the least-squares fit q_para ~ a + b*q_orig.
  if (syy == 0.0) {
    rep.pr2 = 1.0;  // paraphrase Q constant and perfectly fit by b = 0
  } else {
    rep.pr2 = (sxy * sxy) / (sxx * syy);
  }
  return rep;
}

EvalResult paraphrase_eval(const QScorer& scorer, double alpha,
                           const GameSpec& game, const ParaphraseMap& map,
                           int episodes, std::uint64_t seed) {
  return evaluate(scorer, alpha, game, episodes, seed, &map);
}

std::vector<QTableEntry> q_table(const Agent& agent,
                                 const std::string& state_text,
                                 std::span<const std::string> candidates) {
  std::vector<QTableEntry> out;
  out.reserve(candidates.size());
  const BowVector s = agent.state_bow(state_text);
  for (const auto& text : candidates) {
    QTableEntry e;
    e.text = text;
    const BowVector a = agent.action_bow(text);
    e.empty_bow = a.entries.empty();
    const std::vector<BowVector> one{a};
    e.q = agent.score(s, one).q[0];
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace textrl
