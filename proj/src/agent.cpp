#include "textrl/agent.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace textrl {

const char* arch_name(Arch arch) {
  switch (arch) {
    case Arch::drrn: return "drrn";
    case Arch::pa_dqn: return "pa_dqn";
    case Arch::ma_dqn: return "ma_dqn";
    case Arch::linear: return "linear";
  }
  return "?";
}

Arch arch_from_name(const std::string& name) {
  if (name == "drrn") return Arch::drrn;
  if (name == "pa_dqn") return Arch::pa_dqn;
  if (name == "ma_dqn") return Arch::ma_dqn;
  if (name == "linear") return Arch::linear;
  throw std::invalid_argument("unknown architecture '" + name + "'");
}

Vec softmax_probs(const Vec& q, double alpha) {
  if (q.empty()) throw std::invalid_argument("softmax: empty q");
  const double m = *std::max_element(q.begin(), q.end());
  Vec p(q.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    p[i] = std::exp(alpha * (q[i] - m));
    sum += p[i];
  }
  for (double& v : p) v /= sum;
  return p;
}

int select_action(const Vec& q, double alpha, Rng& rng) {
  const Vec p = softmax_probs(q, alpha);
  const double u = uniform_unit(rng);
  double acc = 0.0;
  for (std::size_t i = 0; i + 1 < p.size(); ++i) {
    acc += p[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(p.size()) - 1;
}

double td_target(double reward, const Vec& next_q, bool terminal, double gamma) {
  if (terminal) return reward;
  if (next_q.empty()) {
    throw std::invalid_argument("td_target: non-terminal tuple with no next actions");
  }
  return reward + gamma * *std::max_element(next_q.begin(), next_q.end());
}

Agent::Agent(AgentConfig cfg, Vocabulary state_vocab, Vocabulary action_vocab,
             std::uint64_t seed)
    : cfg_(cfg), svocab_(std::move(state_vocab)), avocab_(std::move(action_vocab)) {
  if (cfg_.layers < 1) throw std::invalid_argument("agent: layers must be >= 1");
  if (cfg_.hidden_dim < 1) throw std::invalid_argument("agent: hidden_dim must be >= 1");
  if (!(cfg_.gamma >= 0.0 && cfg_.gamma < 1.0)) {
    throw std::invalid_argument("agent: gamma must be in [0,1)");
  }
  if (!(cfg_.alpha > 0.0)) throw std::invalid_argument("agent: alpha must be > 0");

  const int sdim = svocab_.size();
  const int adim = avocab_.size();
  switch (cfg_.arch) {
    case Arch::drrn:
      model_ = make_two_tower(sdim, adim, cfg_.layers, cfg_.hidden_dim,
                              cfg_.interaction, cfg_.tied, cfg_.combiner_hidden,
                              seed);
      break;
    case Arch::pa_dqn: {
      const std::vector<int> dims(static_cast<std::size_t>(cfg_.layers),
                                  cfg_.hidden_dim);
      net_ = make_tower(sdim + adim, dims, 1);
      Rng rng = make_rng(seed, "pa-tower");
      init_uniform(net_, rng);
      break;
    }
    case Arch::ma_dqn: {
      if (cfg_.max_actions < 1) {
        throw std::invalid_argument("agent: ma_dqn needs max_actions >= 1");
      }
      const std::vector<int> dims(static_cast<std::size_t>(cfg_.layers),
                                  cfg_.hidden_dim);
      net_ = make_tower(sdim + cfg_.max_actions * adim, dims, cfg_.max_actions);
      Rng rng = make_rng(seed, "ma-tower");
      init_uniform(net_, rng);
      break;
    }
    case Arch::linear: {
      if (cfg_.max_actions < 1) {
        throw std::invalid_argument("agent: linear needs max_actions >= 1");
      }
      net_ = make_tower(sdim + cfg_.max_actions * adim, {}, cfg_.max_actions);
      Rng rng = make_rng(seed, "linear");
      init_uniform(net_, rng);
      break;
    }
  }
}

BowVector Agent::state_bow(const std::string& text) const {
  return vectorize(text, svocab_, cfg_.binary_bow).bow;
}

BowVector Agent::action_bow(const std::string& text) const {
  return vectorize(text, avocab_, cfg_.binary_bow).bow;
}

BowVector Agent::concat_pair(const BowVector& s, const BowVector& a) const {
  BowVector x;
  x.dim = svocab_.size() + avocab_.size();
  x.entries = s.entries;
  for (const auto& [idx, cnt] : a.entries) {
    x.entries.emplace_back(svocab_.size() + idx, cnt);
  }
  return x;
}

BowVector Agent::slot_input(const BowVector& s,
                            std::span<const BowVector> actions) const {
  if (static_cast<int>(actions.size()) > cfg_.max_actions) {
    throw std::invalid_argument("agent: action list exceeds max_actions");
  }
  BowVector x;
  x.dim = svocab_.size() + cfg_.max_actions * avocab_.size();
  x.entries = s.entries;
  for (std::size_t slot = 0; slot < actions.size(); ++slot) {
    const int offset =
        svocab_.size() + static_cast<int>(slot) * avocab_.size();
    for (const auto& [idx, cnt] : actions[slot].entries) {
      x.entries.emplace_back(offset + idx, cnt);
    }
  }
  return x;
}

ScoredActions Agent::score(const BowVector& state,
                           std::span<const BowVector> actions,
                           bool want_traces) const {
  if (actions.empty()) throw std::invalid_argument("agent: empty action list");
  ScoredActions out;
  out.q.reserve(actions.size());
  switch (cfg_.arch) {
    case Arch::drrn: {
      const auto hs = forward_tower(model_.state_tower, state);
      for (const auto& abow : actions) {
        auto ha = forward_tower(model_.action_side(), abow);
        std::vector<Vec> cacts;
        const double q =
            interact(model_, hs.back(), ha.back(),
                     model_.interaction == Interaction::concat_mlp ? &cacts
                                                                   : nullptr);
        out.q.push_back(q);
        if (want_traces) {
          ForwardTrace tr;
          tr.state_acts = hs;
          tr.action_acts = std::move(ha);
          tr.combiner_acts = std::move(cacts);
          tr.q = q;
          out.traces.push_back(std::move(tr));
        }
      }
      break;
    }
    case Arch::pa_dqn: {
      for (const auto& abow : actions) {
        const BowVector x = concat_pair(state, abow);
        out.q.push_back(forward_tower(net_, x).back()[0]);
      }
      break;
    }
    case Arch::ma_dqn:
    case Arch::linear: {
      const BowVector x = slot_input(state, actions);
      const auto acts = forward_tower(net_, x);
      const Vec& outs = acts.back();
      // Only the slots with an available action are eligible.
      out.q.assign(outs.begin(), outs.begin() + static_cast<long>(actions.size()));
      break;
    }
  }
  return out;
}

Vec Agent::q_values(const std::string& state_text,
                    const std::vector<std::string>& action_texts) const {
  const BowVector s = state_bow(state_text);
  std::vector<BowVector> a;
  a.reserve(action_texts.size());
  for (const auto& t : action_texts) a.push_back(action_bow(t));
  return score(s, a).q;
}

double Agent::learn_one(const TransitionTuple& t, double eta) {
  const double y =
      t.terminal
          ? t.reward
          : td_target(t.reward, q_values(t.next_state_text, t.next_action_texts),
                      false, cfg_.gamma);
  const BowVector s = state_bow(t.state_text);
  double q = 0.0;
  switch (cfg_.arch) {
    case Arch::drrn: {
      const BowVector a = action_bow(t.taken_text());
      ForwardTrace trace;
      q = q_value(model_, s, a, &trace);
      const double dq = q - y;
      if (dq != 0.0) apply_update(model_, trace, s, a, dq, eta);
      break;
    }
    case Arch::pa_dqn: {
      const BowVector x = concat_pair(s, action_bow(t.taken_text()));
      const auto acts = forward_tower(net_, x);
      q = acts.back()[0];
      const double dq = q - y;
      if (dq != 0.0) {
        apply_deltas(net_, x, acts, tower_deltas(net_, acts, Vec{dq}), eta);
      }
      break;
    }
    case Arch::ma_dqn:
    case Arch::linear: {
      std::vector<BowVector> abows;
      abows.reserve(t.action_texts.size());
      for (const auto& text : t.action_texts) abows.push_back(action_bow(text));
      if (t.taken_index < 0 ||
          t.taken_index >= static_cast<int>(abows.size())) {
        throw std::invalid_argument("agent: tuple taken_index out of range");
      }
      const BowVector x = slot_input(s, abows);
      const auto acts = forward_tower(net_, x);
      q = acts.back()[t.taken_index];
      const double dq = q - y;
      if (dq != 0.0) {
        // Unavailable and untaken slots get no gradient.
        Vec dout(acts.back().size(), 0.0);
        dout[t.taken_index] = dq;
        apply_deltas(net_, x, acts, tower_deltas(net_, acts, std::move(dout)),
                     eta);
      }
      break;
    }
  }
  const double d = y - q;
  return d * d;
}

double Agent::learn(std::span<const TransitionTuple> batch, double eta) {
  if (batch.empty()) throw std::invalid_argument("agent: empty batch");
  double sq = 0.0;
  for (const auto& t : batch) sq += learn_one(t, eta);
  return sq / static_cast<double>(batch.size());
}

Vec Agent::state_embedding(const std::string& text) const {
  if (cfg_.arch != Arch::drrn) {
    throw std::logic_error("agent: embeddings are a drrn concept");
  }
  return forward_tower(model_.state_tower, state_bow(text)).back();
}

Vec Agent::action_embedding(const std::string& text) const {
  if (cfg_.arch != Arch::drrn) {
    throw std::logic_error("agent: embeddings are a drrn concept");
  }
  return forward_tower(model_.action_side(), action_bow(text)).back();
}

}  // namespace textrl
