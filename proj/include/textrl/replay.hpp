#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace textrl {

// One stored interaction: the texts seen, the slot taken, the reward, and
// the texts of the successor observation. Action lists are kept in the
// presented (shuffled) order of the episode that produced them.
struct TransitionTuple {
  std::string state_text;
  std::vector<std::string> action_texts;
  int taken_index = 0;
  double reward = 0.0;
  std::string next_state_text;
  std::vector<std::string> next_action_texts;
  bool terminal = false;

  const std::string& taken_text() const { return action_texts[taken_index]; }
};

// Fixed-capacity FIFO ring buffer of transitions.
class ReplayMemory {
 public:
  explicit ReplayMemory(std::size_t capacity);

  void push(TransitionTuple t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return cap_; }
  std::uint64_t insertions() const { return count_; }

  // i = 0 is the oldest surviving tuple.
  const TransitionTuple& operator[](std::size_t i) const;

 private:
  std::vector<TransitionTuple> buf_;
  std::size_t cap_;
  std::size_t head_ = 0;  // index of the oldest element
  std::size_t size_ = 0;
  std::uint64_t count_ = 0;
};

}  // namespace textrl
