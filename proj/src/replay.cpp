#include "textrl/replay.hpp"

#include <stdexcept>

namespace textrl {

ReplayMemory::ReplayMemory(std::size_t capacity) : cap_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay: capacity must be > 0");
  buf_.reserve(capacity);
}

void ReplayMemory::push(TransitionTuple t) {
  ++count_;
  if (size_ < cap_) {
    buf_.push_back(std::move(t));
    ++size_;
    return;
  }
  buf_[head_] = std::move(t);
  head_ = (head_ + 1) % cap_;
}

const TransitionTuple& ReplayMemory::operator[](std::size_t i) const {
  if (i >= size_) throw std::out_of_range("replay: index out of range");
  return buf_[(head_ + i) % cap_];
}

}  // namespace textrl
