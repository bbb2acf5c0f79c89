#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace slicesim::nn {

struct LayoutEntry {
  std::string id;
  std::vector<std::size_t> shape;
  std::size_t offset = 0;
  std::size_t size = 0;
};

// Ordered (id, shape) descriptors mapping named parameter blocks onto one
// flat array. Layouts are immutable and shared between a model, its
// gradients, and its serialized checkpoints.
class ParamLayout {
 public:
  static std::shared_ptr<const ParamLayout> build(
      std::vector<std::pair<std::string, std::vector<std::size_t>>> blocks);

  const std::vector<LayoutEntry>& entries() const { return entries_; }
  std::size_t total_size() const { return total_; }
  const LayoutEntry& entry(std::size_t i) const { return entries_.at(i); }
  const LayoutEntry* find(const std::string& id) const;
  bool operator==(const ParamLayout& other) const;

 private:
  std::vector<LayoutEntry> entries_;
  std::size_t total_ = 0;
};

class ParamVector {
 public:
  ParamVector() = default;
  explicit ParamVector(std::shared_ptr<const ParamLayout> layout);

  const ParamLayout& layout() const { return *layout_; }
  std::shared_ptr<const ParamLayout> layout_ptr() const { return layout_; }
  bool has_layout() const { return layout_ != nullptr; }
  bool same_layout(const ParamVector& other) const;

  std::size_t size() const { return values_.size(); }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::span<double> span() { return values_; }
  std::span<const double> span() const { return values_; }

  std::span<double> block(const std::string& id);
  std::span<const double> block(const std::string& id) const;
  std::span<double> block(std::size_t entry_index);
  std::span<const double> block(std::size_t entry_index) const;

  void fill(double v);

  // Binary format: u32 little-endian header length, JSON layout header,
  // u64 little-endian count, then count raw little-endian doubles.
  void serialize(std::ostream& out) const;
  static ParamVector deserialize(std::istream& in);
  void save(const std::string& path) const;
  static ParamVector load(const std::string& path);

 private:
  std::shared_ptr<const ParamLayout> layout_;
  std::vector<double> values_;
};

// params - lr * grad, elementwise. Layout mismatch throws.
ParamVector sgd_step(const ParamVector& params, const ParamVector& grad,
                     double learning_rate);

}  // namespace slicesim::nn
