#pragma once

#include <cstddef>
#include <vector>

#include "algd/rng.hpp"
#include "algd/types.hpp"

namespace algd {

/// Fixed-capacity FIFO ring of transitions. Once full, push overwrites the
/// oldest entry. Single-writer; sampling draws uniformly with replacement.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1000000);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return size_; }
  std::size_t cursor() const { return cursor_; }

  /// Rejects transitions with non-finite fields or negative cost.
  void push(const Transition& t);

  /// batch_size transitions drawn uniformly with replacement.
  std::vector<Transition> sample(std::size_t batch_size, RngStream& rng) const;

  const Transition& at(std::size_t slot) const { return storage_[slot]; }

 private:
  std::size_t capacity_;
  std::vector<Transition> storage_;
  std::size_t cursor_ = 0;  // next slot to write
  std::size_t size_ = 0;
};

}  // namespace algd
