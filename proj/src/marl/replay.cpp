#include "slicesim/marl/replay.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace slicesim::marl {

void Experience::validate() const {
  if (s.empty() || s.size() != s_next.size())
    throw std::invalid_argument("experience: state sizes must match");
  bool finite = std::isfinite(a) && std::isfinite(r);
  for (double v : s) finite = finite && std::isfinite(v);
  for (double v : s_next) finite = finite && std::isfinite(v);
  if (!finite) throw std::invalid_argument("experience: non-finite entry");
}

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t batch)
    : capacity_(capacity), batch_(batch) {
  if (capacity_ < 1 || batch_ < 1)
    throw std::invalid_argument("replay buffer: capacity and batch must be >= 1");
  ring_.reserve(capacity_);
}

void ReplayBuffer::push(Experience e) {
  e.validate();
  if (ring_.size() < capacity_) {
    ring_.push_back(std::move(e));
  } else {
    ring_[head_] = std::move(e);
    head_ = (head_ + 1) % capacity_;
  }
}

const Experience& ReplayBuffer::at(std::size_t i) const {
  if (i >= size()) throw std::out_of_range("replay buffer: index out of range");
  const std::size_t oldest = ring_.size() < capacity_ ? 0 : head_;
  return ring_[(oldest + i) % capacity_];
}

std::vector<const Experience*> ReplayBuffer::sample(Rng& rng) const {
  const std::size_t n = size();
  if (n == 0) throw std::logic_error("replay buffer: sample from empty buffer");
  const std::size_t k = std::min(batch_, n);
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::vector<const Experience*> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
    out.push_back(&ring_[idx[i]]);
  }
  return out;
}

}  // namespace slicesim::marl
