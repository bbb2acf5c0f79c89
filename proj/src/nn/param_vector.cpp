#include "slicesim/nn/param_vector.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "json.hpp"
#include "slicesim/kernels/kernels.hpp"

static_assert(std::endian::native == std::endian::little,
              "serialization assumes a little-endian host");

namespace slicesim::nn {

std::shared_ptr<const ParamLayout> ParamLayout::build(
    std::vector<std::pair<std::string, std::vector<std::size_t>>> blocks) {
  auto layout = std::make_shared<ParamLayout>();
  std::size_t offset = 0;
  for (auto& [id, shape] : blocks) {
    LayoutEntry e;
    e.id = id;
    e.shape = shape;
    e.offset = offset;
    e.size = 1;
    for (std::size_t d : shape) e.size *= d;
    if (e.size == 0) throw std::invalid_argument("empty shape for block " + id);
    offset += e.size;
    layout->entries_.push_back(std::move(e));
  }
  layout->total_ = offset;
  return layout;
}

const LayoutEntry* ParamLayout::find(const std::string& id) const {
  for (const auto& e : entries_)
    if (e.id == id) return &e;
  return nullptr;
}

bool ParamLayout::operator==(const ParamLayout& other) const {
  if (total_ != other.total_ || entries_.size() != other.entries_.size())
    return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].id != other.entries_[i].id ||
        entries_[i].shape != other.entries_[i].shape)
      return false;
  }
  return true;
}

ParamVector::ParamVector(std::shared_ptr<const ParamLayout> layout)
    : layout_(std::move(layout)), values_(layout_->total_size(), 0.0) {}

bool ParamVector::same_layout(const ParamVector& other) const {
  if (layout_ == other.layout_) return true;
  if (!layout_ || !other.layout_) return false;
  return *layout_ == *other.layout_;
}

std::span<double> ParamVector::block(const std::string& id) {
  const LayoutEntry* e = layout_->find(id);
  if (!e) throw std::out_of_range("no parameter block named " + id);
  return {values_.data() + e->offset, e->size};
}

std::span<const double> ParamVector::block(const std::string& id) const {
  const LayoutEntry* e = layout_->find(id);
  if (!e) throw std::out_of_range("no parameter block named " + id);
  return {values_.data() + e->offset, e->size};
}

std::span<double> ParamVector::block(std::size_t entry_index) {
  const LayoutEntry& e = layout_->entry(entry_index);
  return {values_.data() + e.offset, e.size};
}

std::span<const double> ParamVector::block(std::size_t entry_index) const {
  const LayoutEntry& e = layout_->entry(entry_index);
  return {values_.data() + e.offset, e.size};
}

void ParamVector::fill(double v) {
  for (double& x : values_) x = v;
}

void ParamVector::serialize(std::ostream& out) const {
  nlohmann::json header;
  header["layout"] = nlohmann::json::array();
  for (const auto& e : layout_->entries()) {
    header["layout"].push_back({{"id", e.id}, {"shape", e.shape}});
  }
  const std::string text = header.dump();
  const std::uint32_t header_len = static_cast<std::uint32_t>(text.size());
  out.write(reinterpret_cast<const char*>(&header_len), sizeof(header_len));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  const std::uint64_t count = values_.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  out.write(reinterpret_cast<const char*>(values_.data()),
            static_cast<std::streamsize>(count * sizeof(double)));
  if (!out) throw std::runtime_error("parameter serialization failed");
}

ParamVector ParamVector::deserialize(std::istream& in) {
  std::uint32_t header_len = 0;
  in.read(reinterpret_cast<char*>(&header_len), sizeof(header_len));
  std::string text(header_len, '\0');
  in.read(text.data(), header_len);
  if (!in) throw std::runtime_error("truncated parameter header");
  nlohmann::json header = nlohmann::json::parse(text);
  std::vector<std::pair<std::string, std::vector<std::size_t>>> blocks;
  for (const auto& item : header.at("layout")) {
    blocks.emplace_back(item.at("id").get<std::string>(),
                        item.at("shape").get<std::vector<std::size_t>>());
  }
  ParamVector pv(ParamLayout::build(std::move(blocks)));
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  if (!in || count != pv.size())
    throw std::runtime_error("parameter payload does not match layout");
  in.read(reinterpret_cast<char*>(pv.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw std::runtime_error("truncated parameter payload");
  return pv;
}

void ParamVector::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  serialize(out);
}

ParamVector ParamVector::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  return deserialize(in);
}

ParamVector sgd_step(const ParamVector& params, const ParamVector& grad,
                     double learning_rate) {
  if (!params.same_layout(grad))
    throw std::invalid_argument("sgd_step: parameter/gradient layout mismatch");
  if (learning_rate < 0.0)
    throw std::invalid_argument("sgd_step: negative learning rate");
  ParamVector out = params;
  kernels::active().axpy(-learning_rate, grad.data(), out.data(), out.size());
  return out;
}

}  // namespace slicesim::nn
