#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "textrl/agent.hpp"

// Agent checkpoints: a versioned platform-native binary dump of the config,
// both vocabularies, and every parameter matrix with shape headers.
// Round-trips are bit-exact.

namespace textrl {

namespace {

constexpr char kMagic[8] = {'T', 'X', 'R', 'L', 'A', 'G', 'T', '\x01'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::istream& in) {
  T v;
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void put_string(std::ostream& out, const std::string& s) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string get_string(std::istream& in) {
  const auto n = get<std::uint32_t>(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return s;
}

void put_vec(std::ostream& out, const Vec& v) {
  put<std::uint64_t>(out, v.size());
  out.write(reinterpret_cast<const char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
}

Vec get_vec(std::istream& in) {
  const auto n = get<std::uint64_t>(in);
  Vec v(n);
  in.read(reinterpret_cast<char*>(v.data()),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return v;
}

void put_matrix(std::ostream& out, const Matrix& m) {
  put<std::int32_t>(out, m.rows);
  put<std::int32_t>(out, m.cols);
  out.write(reinterpret_cast<const char*>(m.a.data()),
            static_cast<std::streamsize>(m.a.size() * sizeof(double)));
}

Matrix get_matrix(std::istream& in) {
  const auto rows = get<std::int32_t>(in);
  const auto cols = get<std::int32_t>(in);
  if (rows < 0 || cols < 0) throw std::runtime_error("checkpoint: bad shape");
  Matrix m(rows, cols);
  in.read(reinterpret_cast<char*>(m.a.data()),
          static_cast<std::streamsize>(m.a.size() * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint: truncated file");
  return m;
}

void put_tower(std::ostream& out, const Tower& t) {
  put<std::uint32_t>(out, static_cast<std::uint32_t>(t.layers.size()));
  for (const auto& layer : t.layers) {
    put<std::uint8_t>(out, layer.act == Act::tanh ? 0 : 1);
    put_matrix(out, layer.W);
    put_vec(out, layer.b);
  }
}

Tower get_tower(std::istream& in) {
  Tower t;
  const auto n = get<std::uint32_t>(in);
  for (std::uint32_t i = 0; i < n; ++i) {
    Layer layer;
    layer.act = get<std::uint8_t>(in) == 0 ? Act::tanh : Act::identity;
    layer.W = get_matrix(in);
    layer.b = get_vec(in);
    t.layers.push_back(std::move(layer));
  }
  return t;
}

void put_vocab(std::ostream& out, const Vocabulary& v) {
  put<std::uint64_t>(out, static_cast<std::uint64_t>(v.size()));
  for (const auto& tok : v.tokens()) put_string(out, tok);
}

Vocabulary get_vocab(std::istream& in, VocabSide side) {
  const auto n = get<std::uint64_t>(in);
  std::vector<std::string> tokens;
  tokens.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) tokens.push_back(get_string(in));
  return Vocabulary(std::move(tokens), side);
}

}  // namespace

void Agent::save(std::ostream& out) const {
  out.write(kMagic, sizeof(kMagic));
  put(out, kVersion);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(cfg_.arch));
  put<std::int32_t>(out, cfg_.layers);
  put<std::int32_t>(out, cfg_.hidden_dim);
  put<std::uint8_t>(out, static_cast<std::uint8_t>(cfg_.interaction));
  put<std::uint8_t>(out, cfg_.tied ? 1 : 0);
  put<std::int32_t>(out, cfg_.max_actions);
  put(out, cfg_.alpha);
  put(out, cfg_.gamma);
  put<std::int32_t>(out, cfg_.combiner_hidden);
  put<std::uint8_t>(out, cfg_.binary_bow ? 1 : 0);
  put_vocab(out, svocab_);
  put_vocab(out, avocab_);
  if (cfg_.arch == Arch::drrn) {
    put_tower(out, model_.state_tower);
    if (!cfg_.tied) put_tower(out, model_.action_tower);
    if (cfg_.interaction == Interaction::bilinear) {
      put_matrix(out, model_.bilinear);
    } else if (cfg_.interaction == Interaction::concat_mlp) {
      put_tower(out, model_.combiner);
    }
  } else {
    put_tower(out, net_);
  }
  if (!out) throw std::runtime_error("checkpoint: write failed");
}

Agent Agent::load(std::istream& in) {
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(magic)) != 0) {
    throw std::runtime_error("checkpoint: bad magic");
  }
  if (get<std::uint32_t>(in) != kVersion) {
    throw std::runtime_error("checkpoint: unsupported version");
  }
  Agent agent;
  AgentConfig& cfg = agent.cfg_;
  cfg.arch = static_cast<Arch>(get<std::uint8_t>(in));
  cfg.layers = get<std::int32_t>(in);
  cfg.hidden_dim = get<std::int32_t>(in);
  cfg.interaction = static_cast<Interaction>(get<std::uint8_t>(in));
  cfg.tied = get<std::uint8_t>(in) != 0;
  cfg.max_actions = get<std::int32_t>(in);
  cfg.alpha = get<double>(in);
  cfg.gamma = get<double>(in);
  cfg.combiner_hidden = get<std::int32_t>(in);
  cfg.binary_bow = get<std::uint8_t>(in) != 0;
  agent.svocab_ = get_vocab(in, VocabSide::state);
  agent.avocab_ = get_vocab(in, VocabSide::action);
  if (cfg.arch == Arch::drrn) {
    agent.model_.tied = cfg.tied;
    agent.model_.interaction = cfg.interaction;
    agent.model_.state_tower = get_tower(in);
    if (!cfg.tied) agent.model_.action_tower = get_tower(in);
    if (cfg.interaction == Interaction::bilinear) {
      agent.model_.bilinear = get_matrix(in);
    } else if (cfg.interaction == Interaction::concat_mlp) {
      agent.model_.combiner = get_tower(in);
    }
  } else {
    agent.net_ = get_tower(in);
  }
  return agent;
}

}  // namespace textrl
