#include "algd/replay.hpp"

#include <cmath>
#include <stdexcept>

namespace algd {

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
  storage_.reserve(capacity_ < 4096 ? capacity_ : 4096);
}

void ReplayBuffer::push(const Transition& t) {
  if (!t.state.allFinite() || !t.action.allFinite() || !t.next_state.allFinite() ||
      !std::isfinite(t.reward) || !std::isfinite(t.cost)) {
    throw std::invalid_argument("ReplayBuffer::push: non-finite transition field");
  }
  if (t.cost < 0.0) throw std::invalid_argument("ReplayBuffer::push: cost must be >= 0");

  if (size_ < capacity_) {
    storage_.push_back(t);
    ++size_;
  } else {
    storage_[cursor_] = t;
  }
  cursor_ = (cursor_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch_size, RngStream& rng) const {
  if (size_ == 0) throw std::runtime_error("ReplayBuffer::sample: buffer is empty");
  if (batch_size == 0) throw std::invalid_argument("ReplayBuffer::sample: batch_size must be positive");
  std::vector<Transition> out;
  out.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    out.push_back(storage_[rng.index(size_)]);
  }
  return out;
}

}  // namespace algd
