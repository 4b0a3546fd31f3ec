#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "textrl/rng.hpp"
#include "textrl/text.hpp"

namespace textrl {

using Vec = std::vector<double>;

struct Matrix {
  int rows = 0;
  int cols = 0;
  Vec a;  // row-major

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return a[static_cast<std::size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return a[static_cast<std::size_t>(r) * cols + c]; }
};

enum class Act { tanh, identity };

struct Layer {
  Matrix W;
  Vec b;
  Act act = Act::tanh;
};

// A stack of affine layers, h_l = act_l(W_l h_{l-1} + b_l) with h_0 = x.
struct Tower {
  std::vector<Layer> layers;

  int in_dim() const { return layers.empty() ? 0 : layers.front().W.cols; }
  int out_dim() const { return layers.empty() ? 0 : layers.back().W.rows; }
};

// Hidden layers are tanh; the optional trailing identity layer gives the
// unbounded outputs the Q-value heads need.
Tower make_tower(int in_dim, std::span<const int> hidden_dims, int linear_out = 0);

// All weights and biases i.i.d. uniform on [-range, range].
void init_uniform(Tower& tower, Rng& rng, double range = 0.05);

double tanh_activation(double x);

// Per-layer activations h_1..h_L.
std::vector<Vec> forward_tower(const Tower& tower, const BowVector& x);
std::vector<Vec> forward_tower(const Tower& tower, const Vec& x);

struct TowerGrads {
  std::vector<Matrix> W;
  std::vector<Vec> b;
};

TowerGrads zero_grads(const Tower& tower);

// Per-layer deltas dL/dz_l given dL/dh_L; the cheap half of backprop, shared
// by the dense-gradient and the in-place update paths.
std::vector<Vec> tower_deltas(const Tower& tower, const std::vector<Vec>& acts,
                              Vec d_out);

// Accumulates dL/dW, dL/db into `grads` and optionally returns dL/dx.
void tower_backprop(const Tower& tower, const BowVector& x,
                    const std::vector<Vec>& acts, Vec d_out, TowerGrads& grads,
                    Vec* dx = nullptr);
void tower_backprop(const Tower& tower, const Vec& x,
                    const std::vector<Vec>& acts, Vec d_out, TowerGrads& grads,
                    Vec* dx = nullptr);

void sgd_step(Tower& tower, const TowerGrads& grads, double eta);

// In-place W_l -= eta * delta_l h_{l-1}^T, b_l -= eta * delta_l. The sparse
// first-layer update touches only the nonzero input columns.
void apply_deltas(Tower& tower, const BowVector& x, const std::vector<Vec>& acts,
                  const std::vector<Vec>& deltas, double eta);
void apply_deltas(Tower& tower, const Vec& x, const std::vector<Vec>& acts,
                  const std::vector<Vec>& deltas, double eta);

enum class Interaction { inner_product, bilinear, concat_mlp };

// Two embedding towers joined by an interaction function g; Q = g(h_s, h_a).
struct TwoTowerModel {
  Tower state_tower;
  Tower action_tower;  // unused when tied
  bool tied = false;
  Interaction interaction = Interaction::inner_product;
  Matrix bilinear;  // d_s x d_a when interaction == bilinear
  Tower combiner;   // concat_mlp: tanh hidden + linear scalar head

  const Tower& action_side() const { return tied ? state_tower : action_tower; }
  Tower& action_side() { return tied ? state_tower : action_tower; }
};

TwoTowerModel make_two_tower(int state_dim, int action_dim, int layers,
                             int hidden_dim, Interaction interaction,
                             bool tied, int combiner_hidden, std::uint64_t seed);

struct ForwardTrace {
  std::vector<Vec> state_acts;
  std::vector<Vec> action_acts;
  std::vector<Vec> combiner_acts;
  double q = 0.0;
};

double q_value(const TwoTowerModel& m, const BowVector& s, const BowVector& a,
               ForwardTrace* trace = nullptr);

// Interaction on precomputed final embeddings (state tower shared across the
// actions of one observation).
double interact(const TwoTowerModel& m, const Vec& hs, const Vec& ha,
                std::vector<Vec>* combiner_acts = nullptr);

struct ModelGrads {
  TowerGrads state;
  TowerGrads action;  // unused when tied: both sides accumulate into `state`
  Matrix bilinear;
  TowerGrads combiner;
};

ModelGrads zero_grads(const TwoTowerModel& m);

// Exact gradients of the squared TD loss 0.5*(Q - y)^2 for the taken action,
// where dq = dLoss/dQ = Q - y. Tied models accumulate both sides into the
// shared (state) grads.
ModelGrads model_backprop(const TwoTowerModel& m, const ForwardTrace& trace,
                          const BowVector& s, const BowVector& a, double dq);

void sgd_step(TwoTowerModel& m, const ModelGrads& grads, double eta);

// Fused backprop + SGD for the training hot path; numerically identical to
// model_backprop followed by sgd_step.
void apply_update(TwoTowerModel& m, const ForwardTrace& trace,
                  const BowVector& s, const BowVector& a, double dq,
                  double eta);

}  // namespace textrl
