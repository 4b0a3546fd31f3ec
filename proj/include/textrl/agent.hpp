#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "textrl/neural.hpp"
#include "textrl/replay.hpp"
#include "textrl/rng.hpp"
#include "textrl/text.hpp"

namespace textrl {

enum class Arch { drrn, pa_dqn, ma_dqn, linear };

const char* arch_name(Arch arch);
Arch arch_from_name(const std::string& name);

struct AgentConfig {
  Arch arch = Arch::drrn;
  int layers = 1;        // hidden layers per side / stack
  int hidden_dim = 20;
  Interaction interaction = Interaction::inner_product;  // drrn only
  bool tied = false;                                      // drrn only
  int max_actions = 0;   // output slots for ma_dqn / linear
  double alpha = 0.2;    // softmax scale
  double gamma = 0.9;    // discount
  int combiner_hidden = 0;  // concat_mlp hidden width; 0 -> hidden_dim
  bool binary_bow = false;
};

struct ScoredActions {
  Vec q;  // aligned with the presented action order
  std::vector<ForwardTrace> traces;  // filled for drrn when requested
};

// Anything that can score a presented action list for a state. The episode
// runners are written against this so tests can inject oracle tables.
class QScorer {
 public:
  virtual ~QScorer() = default;
  virtual Vec q_values(const std::string& state_text,
                       const std::vector<std::string>& action_texts) const = 0;
};

// Softmax selection probabilities exp(alpha*q_i) / sum_j exp(alpha*q_j),
// computed with max subtraction.
Vec softmax_probs(const Vec& q, double alpha);
int select_action(const Vec& q, double alpha, Rng& rng);

// y = r when terminal, else r + gamma * max(next_q).
double td_target(double reward, const Vec& next_q, bool terminal, double gamma);

// One Q-function approximator over a pair of fixed vocabularies.
//
//   drrn    separate state/action embedding towers + interaction function
//   pa_dqn  one tower over the concatenated (state, action) bag of words
//   ma_dqn  one tower over (state, all presented actions), one output per slot
//   linear  single affine layer over the ma_dqn input layout
class Agent final : public QScorer {
 public:
  Agent(AgentConfig cfg, Vocabulary state_vocab, Vocabulary action_vocab,
        std::uint64_t seed);

  const AgentConfig& config() const { return cfg_; }
  const Vocabulary& state_vocab() const { return svocab_; }
  const Vocabulary& action_vocab() const { return avocab_; }

  ScoredActions score(const BowVector& state,
                      std::span<const BowVector> actions,
                      bool want_traces = false) const;
  Vec q_values(const std::string& state_text,
               const std::vector<std::string>& action_texts) const override;

  // Sequential SGD over the batch with targets recomputed per tuple from the
  // current parameters; gradient flows only through the taken action.
  // Returns the mean squared TD error.
  double learn(std::span<const TransitionTuple> batch, double eta);

  // Final-layer embeddings (drrn only).
  Vec state_embedding(const std::string& text) const;
  Vec action_embedding(const std::string& text) const;

  BowVector state_bow(const std::string& text) const;
  BowVector action_bow(const std::string& text) const;

  void save(std::ostream& out) const;
  static Agent load(std::istream& in);

  // Parameter access for tests and checkpointing.
  TwoTowerModel& two_tower() { return model_; }
  const TwoTowerModel& two_tower() const { return model_; }
  Tower& net() { return net_; }
  const Tower& net() const { return net_; }

 private:
  Agent() = default;
  BowVector concat_pair(const BowVector& s, const BowVector& a) const;
  BowVector slot_input(const BowVector& s, std::span<const BowVector> a) const;
  double learn_one(const TransitionTuple& t, double eta);

  AgentConfig cfg_;
  Vocabulary svocab_;
  Vocabulary avocab_;
  TwoTowerModel model_;  // drrn
  Tower net_;            // pa_dqn / ma_dqn / linear
};

}  // namespace textrl
