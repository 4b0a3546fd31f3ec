#include "textrl/neural.hpp"

#include <cmath>
#include <stdexcept>
#include <type_traits>

namespace textrl {

namespace {

void check(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

Vec affine_sparse(const Matrix& W, const Vec& b, const BowVector& x) {
  check(W.cols == x.dim, "tower: input dimension mismatch");
  Vec z = b;
  for (int r = 0; r < W.rows; ++r) {
    const double* row = &W.a[static_cast<std::size_t>(r) * W.cols];
    double acc = z[r];
    for (const auto& [idx, cnt] : x.entries) {
      acc += row[idx] * cnt;
    }
    z[r] = acc;
  }
  return z;
}

Vec affine_dense(const Matrix& W, const Vec& b, const Vec& x) {
  check(W.cols == static_cast<int>(x.size()), "tower: input dimension mismatch");
  Vec z = b;
  for (int r = 0; r < W.rows; ++r) {
    const double* row = &W.a[static_cast<std::size_t>(r) * W.cols];
    double acc = z[r];
    for (int c = 0; c < W.cols; ++c) acc += row[c] * x[c];
    z[r] = acc;
  }
  return z;
}

void activate(Vec& z, Act act) {
  if (act == Act::tanh) {
    for (double& v : z) v = tanh_activation(v);
  }
}

template <typename Input>
std::vector<Vec> forward_impl(const Tower& tower, const Input& x) {
  std::vector<Vec> acts;
  acts.reserve(tower.layers.size());
  for (std::size_t l = 0; l < tower.layers.size(); ++l) {
    const Layer& layer = tower.layers[l];
    Vec z = (l == 0) ? [&] {
      if constexpr (std::is_same_v<Input, BowVector>) {
        return affine_sparse(layer.W, layer.b, x);
      } else {
        return affine_dense(layer.W, layer.b, x);
      }
    }()
                     : affine_dense(layer.W, layer.b, acts[l - 1]);
    activate(z, layer.act);
    acts.push_back(std::move(z));
  }
  return acts;
}

Vec transpose_times(const Matrix& W, const Vec& d) {
  Vec out(W.cols, 0.0);
  for (int r = 0; r < W.rows; ++r) {
    const double* row = &W.a[static_cast<std::size_t>(r) * W.cols];
    const double dr = d[r];
    for (int c = 0; c < W.cols; ++c) out[c] += row[c] * dr;
  }
  return out;
}

double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

double tanh_activation(double x) {
  // (1 - e^{-2x}) / (1 + e^{-2x}), rearranged so neither tail overflows.
  if (x >= 0.0) {
    const double em = std::expm1(-2.0 * x);
    return -em / (em + 2.0);
  }
  const double ep = std::expm1(2.0 * x);
  return ep / (ep + 2.0);
}

Tower make_tower(int in_dim, std::span<const int> hidden_dims, int linear_out) {
  check(in_dim >= 1, "tower: input dim must be >= 1");
  Tower t;
  int prev = in_dim;
  for (int h : hidden_dims) {
    check(h >= 1, "tower: hidden dim must be >= 1");
    Layer layer;
    layer.W = Matrix(h, prev);
    layer.b.assign(h, 0.0);
    layer.act = Act::tanh;
    t.layers.push_back(std::move(layer));
    prev = h;
  }
  if (linear_out > 0) {
    Layer layer;
    layer.W = Matrix(linear_out, prev);
    layer.b.assign(linear_out, 0.0);
    layer.act = Act::identity;
    t.layers.push_back(std::move(layer));
  }
  check(!t.layers.empty(), "tower: needs at least one layer");
  return t;
}

void init_uniform(Tower& tower, Rng& rng, double range) {
  for (auto& layer : tower.layers) {
    for (double& w : layer.W.a) w = (2.0 * uniform_unit(rng) - 1.0) * range;
    for (double& b : layer.b) b = (2.0 * uniform_unit(rng) - 1.0) * range;
  }
}

std::vector<Vec> forward_tower(const Tower& tower, const BowVector& x) {
  return forward_impl(tower, x);
}

std::vector<Vec> forward_tower(const Tower& tower, const Vec& x) {
  return forward_impl(tower, x);
}

TowerGrads zero_grads(const Tower& tower) {
  TowerGrads g;
  for (const auto& layer : tower.layers) {
    g.W.emplace_back(layer.W.rows, layer.W.cols);
    g.b.emplace_back(layer.b.size(), 0.0);
  }
  return g;
}

std::vector<Vec> tower_deltas(const Tower& tower, const std::vector<Vec>& acts,
                              Vec d_out) {
  const int L = static_cast<int>(tower.layers.size());
  check(static_cast<int>(acts.size()) == L, "tower: trace/layer mismatch");
  std::vector<Vec> deltas(L);
  Vec cur = std::move(d_out);
  for (int l = L - 1; l >= 0; --l) {
    const Layer& layer = tower.layers[l];
    Vec delta = std::move(cur);
    if (layer.act == Act::tanh) {
      const Vec& h = acts[l];
      for (std::size_t i = 0; i < delta.size(); ++i) {
        delta[i] *= (1.0 - h[i]) * (1.0 + h[i]);
      }
    }
    if (l > 0) cur = transpose_times(layer.W, delta);
    deltas[l] = std::move(delta);
  }
  return deltas;
}

namespace {

template <typename Input>
void backprop_impl(const Tower& tower, const Input& x,
                   const std::vector<Vec>& acts, Vec d_out, TowerGrads& grads,
                   Vec* dx) {
  const auto deltas = tower_deltas(tower, acts, std::move(d_out));
  for (std::size_t l = 0; l < tower.layers.size(); ++l) {
    const Vec& delta = deltas[l];
    Matrix& dW = grads.W[l];
    Vec& db = grads.b[l];
    for (std::size_t i = 0; i < delta.size(); ++i) db[i] += delta[i];
    if (l == 0) {
      if constexpr (std::is_same_v<Input, BowVector>) {
        for (int r = 0; r < dW.rows; ++r) {
          double* row = &dW.a[static_cast<std::size_t>(r) * dW.cols];
          for (const auto& [idx, cnt] : x.entries) {
            row[idx] += delta[r] * cnt;
          }
        }
      } else {
        for (int r = 0; r < dW.rows; ++r) {
          double* row = &dW.a[static_cast<std::size_t>(r) * dW.cols];
          for (int c = 0; c < dW.cols; ++c) row[c] += delta[r] * x[c];
        }
      }
    } else {
      const Vec& h = acts[l - 1];
      for (int r = 0; r < dW.rows; ++r) {
        double* row = &dW.a[static_cast<std::size_t>(r) * dW.cols];
        for (int c = 0; c < dW.cols; ++c) row[c] += delta[r] * h[c];
      }
    }
  }
  if (dx) *dx = transpose_times(tower.layers.front().W, deltas.front());
}

template <typename Input>
void apply_deltas_impl(Tower& tower, const Input& x,
                       const std::vector<Vec>& acts,
                       const std::vector<Vec>& deltas, double eta) {
  for (std::size_t l = 0; l < tower.layers.size(); ++l) {
    const Vec& delta = deltas[l];
    Layer& layer = tower.layers[l];
    for (std::size_t i = 0; i < delta.size(); ++i) {
      layer.b[i] -= eta * delta[i];
    }
    Matrix& W = layer.W;
    if (l == 0) {
      if constexpr (std::is_same_v<Input, BowVector>) {
        for (int r = 0; r < W.rows; ++r) {
          double* row = &W.a[static_cast<std::size_t>(r) * W.cols];
          for (const auto& [idx, cnt] : x.entries) {
            row[idx] -= eta * (delta[r] * cnt);
          }
        }
      } else {
        for (int r = 0; r < W.rows; ++r) {
          double* row = &W.a[static_cast<std::size_t>(r) * W.cols];
          for (int c = 0; c < W.cols; ++c) row[c] -= eta * (delta[r] * x[c]);
        }
      }
    } else {
      const Vec& h = acts[l - 1];
      for (int r = 0; r < W.rows; ++r) {
        double* row = &W.a[static_cast<std::size_t>(r) * W.cols];
        for (int c = 0; c < W.cols; ++c) row[c] -= eta * (delta[r] * h[c]);
      }
    }
  }
}

}  // namespace

void tower_backprop(const Tower& tower, const BowVector& x,
                    const std::vector<Vec>& acts, Vec d_out, TowerGrads& grads,
                    Vec* dx) {
  backprop_impl(tower, x, acts, std::move(d_out), grads, dx);
}

void tower_backprop(const Tower& tower, const Vec& x,
                    const std::vector<Vec>& acts, Vec d_out, TowerGrads& grads,
                    Vec* dx) {
  backprop_impl(tower, x, acts, std::move(d_out), grads, dx);
}

void sgd_step(Tower& tower, const TowerGrads& grads, double eta) {
  for (std::size_t l = 0; l < tower.layers.size(); ++l) {
    Layer& layer = tower.layers[l];
    for (std::size_t i = 0; i < layer.W.a.size(); ++i) {
      layer.W.a[i] -= eta * grads.W[l].a[i];
    }
    for (std::size_t i = 0; i < layer.b.size(); ++i) {
      layer.b[i] -= eta * grads.b[l][i];
    }
  }
}

void apply_deltas(Tower& tower, const BowVector& x, const std::vector<Vec>& acts,
                  const std::vector<Vec>& deltas, double eta) {
  apply_deltas_impl(tower, x, acts, deltas, eta);
}

void apply_deltas(Tower& tower, const Vec& x, const std::vector<Vec>& acts,
                  const std::vector<Vec>& deltas, double eta) {
  apply_deltas_impl(tower, x, acts, deltas, eta);
}

TwoTowerModel make_two_tower(int state_dim, int action_dim, int layers,
                             int hidden_dim, Interaction interaction, bool tied,
                             int combiner_hidden, std::uint64_t seed) {
  check(layers >= 1, "model: needs at least one hidden layer");
  if (tied) {
    check(state_dim == action_dim,
          "model: tied towers require identical state/action input dims");
  }
  TwoTowerModel m;
  m.tied = tied;
  m.interaction = interaction;
  const std::vector<int> dims(static_cast<std::size_t>(layers), hidden_dim);
  m.state_tower = make_tower(state_dim, dims);
  Rng rng = make_rng(seed, "state-tower");
  init_uniform(m.state_tower, rng);
  if (!tied) {
    m.action_tower = make_tower(action_dim, dims);
    rng = make_rng(seed, "action-tower");
    init_uniform(m.action_tower, rng);
  }
  if (interaction == Interaction::bilinear) {
    m.bilinear = Matrix(hidden_dim, hidden_dim);
    rng = make_rng(seed, "bilinear");
    for (double& w : m.bilinear.a) w = (2.0 * uniform_unit(rng) - 1.0) * 0.05;
  } else if (interaction == Interaction::concat_mlp) {
    const int ch = combiner_hidden > 0 ? combiner_hidden : hidden_dim;
    const std::vector<int> cdims{ch};
    m.combiner = make_tower(2 * hidden_dim, cdims, 1);
    rng = make_rng(seed, "combiner");
    init_uniform(m.combiner, rng);
  }
  return m;
}

double interact(const TwoTowerModel& m, const Vec& hs, const Vec& ha,
                std::vector<Vec>* combiner_acts) {
  switch (m.interaction) {
    case Interaction::inner_product:
      check(hs.size() == ha.size(), "interaction: embedding dims differ");
      return dot(hs, ha);
    case Interaction::bilinear: {
      check(m.bilinear.rows == static_cast<int>(hs.size()) &&
                m.bilinear.cols == static_cast<int>(ha.size()),
            "interaction: bilinear dims mismatch");
      double q = 0.0;
      for (int r = 0; r < m.bilinear.rows; ++r) {
        const double* row = &m.bilinear.a[static_cast<std::size_t>(r) * m.bilinear.cols];
        double acc = 0.0;
        for (int c = 0; c < m.bilinear.cols; ++c) acc += row[c] * ha[c];
        q += hs[r] * acc;
      }
      return q;
    }
    case Interaction::concat_mlp: {
      Vec x;
      x.reserve(hs.size() + ha.size());
      x.insert(x.end(), hs.begin(), hs.end());
      x.insert(x.end(), ha.begin(), ha.end());
      auto acts = forward_tower(m.combiner, x);
      const double q = acts.back()[0];
      if (combiner_acts) *combiner_acts = std::move(acts);
      return q;
    }
  }
  throw std::logic_error("interaction: unreachable");
}

double q_value(const TwoTowerModel& m, const BowVector& s, const BowVector& a,
               ForwardTrace* trace) {
  auto hs = forward_tower(m.state_tower, s);
  auto ha = forward_tower(m.action_side(), a);
  std::vector<Vec> cacts;
  const double q = interact(m, hs.back(), ha.back(),
                            m.interaction == Interaction::concat_mlp ? &cacts : nullptr);
  if (trace) {
    trace->state_acts = std::move(hs);
    trace->action_acts = std::move(ha);
    trace->combiner_acts = std::move(cacts);
    trace->q = q;
  }
  return q;
}

ModelGrads zero_grads(const TwoTowerModel& m) {
  ModelGrads g;
  g.state = zero_grads(m.state_tower);
  if (!m.tied) g.action = zero_grads(m.action_tower);
  if (m.interaction == Interaction::bilinear) {
    g.bilinear = Matrix(m.bilinear.rows, m.bilinear.cols);
  } else if (m.interaction == Interaction::concat_mlp) {
    g.combiner = zero_grads(m.combiner);
  }
  return g;
}

namespace {

// dLoss/dh on the two final embeddings, plus combiner / bilinear grads where
// those exist. Shared by the dense and the fused path.
struct EmbeddingDeltas {
  Vec dhs;
  Vec dha;
};

EmbeddingDeltas embedding_deltas(const TwoTowerModel& m,
                                 const ForwardTrace& trace, double dq,
                                 ModelGrads* grads) {
  const Vec& hs = trace.state_acts.back();
  const Vec& ha = trace.action_acts.back();
  EmbeddingDeltas d;
  switch (m.interaction) {
    case Interaction::inner_product: {
      d.dhs.resize(hs.size());
      d.dha.resize(ha.size());
      for (std::size_t i = 0; i < hs.size(); ++i) d.dhs[i] = dq * ha[i];
      for (std::size_t i = 0; i < ha.size(); ++i) d.dha[i] = dq * hs[i];
      break;
    }
    case Interaction::bilinear: {
      d.dhs.assign(hs.size(), 0.0);
      d.dha.assign(ha.size(), 0.0);
      for (int r = 0; r < m.bilinear.rows; ++r) {
        const double* row = &m.bilinear.a[static_cast<std::size_t>(r) * m.bilinear.cols];
        for (int c = 0; c < m.bilinear.cols; ++c) {
          d.dhs[r] += dq * row[c] * ha[c];
          d.dha[c] += dq * row[c] * hs[r];
        }
      }
      if (grads) {
        for (int r = 0; r < m.bilinear.rows; ++r) {
          double* row = &grads->bilinear.a[static_cast<std::size_t>(r) * m.bilinear.cols];
          for (int c = 0; c < m.bilinear.cols; ++c) {
            row[c] += dq * hs[r] * ha[c];
          }
        }
      }
      break;
    }
    case Interaction::concat_mlp: {
      Vec x;
      x.reserve(hs.size() + ha.size());
      x.insert(x.end(), hs.begin(), hs.end());
      x.insert(x.end(), ha.begin(), ha.end());
      Vec dx;
      if (grads) {
        tower_backprop(m.combiner, x, trace.combiner_acts, Vec{dq},
                       grads->combiner, &dx);
      } else {
        // deltas only; the caller applies them
        dx = transpose_times(m.combiner.layers.front().W,
                             tower_deltas(m.combiner, trace.combiner_acts,
                                          Vec{dq})
                                 .front());
      }
      d.dhs.assign(dx.begin(), dx.begin() + static_cast<long>(hs.size()));
      d.dha.assign(dx.begin() + static_cast<long>(hs.size()), dx.end());
      break;
    }
  }
  return d;
}

}  // namespace

ModelGrads model_backprop(const TwoTowerModel& m, const ForwardTrace& trace,
                          const BowVector& s, const BowVector& a, double dq) {
  ModelGrads g = zero_grads(m);
  const auto d = embedding_deltas(m, trace, dq, &g);
  tower_backprop(m.state_tower, s, trace.state_acts, d.dhs, g.state);
  tower_backprop(m.action_side(), a, trace.action_acts, d.dha,
                 m.tied ? g.state : g.action);
  return g;
}

void sgd_step(TwoTowerModel& m, const ModelGrads& grads, double eta) {
  sgd_step(m.state_tower, grads.state, eta);
  if (!m.tied) sgd_step(m.action_tower, grads.action, eta);
  if (m.interaction == Interaction::bilinear) {
    for (std::size_t i = 0; i < m.bilinear.a.size(); ++i) {
      m.bilinear.a[i] -= eta * grads.bilinear.a[i];
    }
  } else if (m.interaction == Interaction::concat_mlp) {
    sgd_step(m.combiner, grads.combiner, eta);
  }
}

void apply_update(TwoTowerModel& m, const ForwardTrace& trace,
                  const BowVector& s, const BowVector& a, double dq,
                  double eta) {
  // All deltas are computed against the pre-update weights before anything
  // is touched; the tied case then applies both sides to the shared tower.
  ModelGrads aux;
  const bool needs_aux = m.interaction != Interaction::inner_product;
  if (needs_aux) aux = zero_grads(m);
  const auto d = embedding_deltas(m, trace, dq, needs_aux ? &aux : nullptr);
  const auto sdeltas = tower_deltas(m.state_tower, trace.state_acts, d.dhs);
  const auto adeltas = tower_deltas(m.action_side(), trace.action_acts, d.dha);
  apply_deltas(m.state_tower, s, trace.state_acts, sdeltas, eta);
  apply_deltas(m.action_side(), a, trace.action_acts, adeltas, eta);
  if (m.interaction == Interaction::bilinear) {
    for (std::size_t i = 0; i < m.bilinear.a.size(); ++i) {
      m.bilinear.a[i] -= eta * aux.bilinear.a[i];
    }
  } else if (m.interaction == Interaction::concat_mlp) {
    sgd_step(m.combiner, aux.combiner, eta);
  }
}

}  // namespace textrl
