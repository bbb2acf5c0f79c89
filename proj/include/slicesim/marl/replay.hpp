#pragma once

#include <cstddef>
#include <vector>

#include "slicesim/core/rng.hpp"

namespace slicesim::marl {

struct Experience {
  std::vector<double> s;
  double a = 0.0;
  double r = 0.0;
  std::vector<double> s_next;

  void validate() const;
};

// Fixed-capacity ring; at capacity the oldest experience is overwritten.
// Batches are drawn uniformly without replacement within a batch.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity = 1000, std::size_t batch = 64);

  void push(Experience e);
  std::vector<const Experience*> sample(Rng& rng) const;

  std::size_t size() const { return ring_.size(); }
  std::size_t capacity() const { return capacity_; }
  std::size_t batch_size() const { return batch_; }
  // i = 0 addresses the oldest stored experience.
  const Experience& at(std::size_t i) const;

 private:
  std::size_t capacity_;
  std::size_t batch_;
  std::size_t head_ = 0;
  std::vector<Experience> ring_;
};

}  // namespace slicesim::marl
