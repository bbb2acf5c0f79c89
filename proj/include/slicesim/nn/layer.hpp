#pragma once

#include <cstddef>
#include <string>

namespace slicesim::nn {

enum class LayerKind { Dense, Conv1d, Relu, Tanh, LeakyRelu, Sigmoid, Softmax };

const char* layer_kind_name(LayerKind kind);

// For Dense, in_dim/out_dim are vector sizes. For Conv1d they are channel
// counts; the sequence length is taken from the incoming tensor and is
// preserved via zero padding. Activations and Softmax are elementwise over
// whatever size arrives.
struct LayerSpec {
  LayerKind kind;
  std::size_t in_dim = 0;
  std::size_t out_dim = 0;
  std::size_t kernel_width = 0;
  double leaky_slope = 0.01;

  static LayerSpec dense(std::size_t in, std::size_t out) {
    return {LayerKind::Dense, in, out, 0, 0.0};
  }
  static LayerSpec conv1d(std::size_t in_channels, std::size_t out_channels,
                          std::size_t kernel_width) {
    return {LayerKind::Conv1d, in_channels, out_channels, kernel_width, 0.0};
  }
  static LayerSpec relu() { return {LayerKind::Relu, 0, 0, 0, 0.0}; }
  static LayerSpec tanh() { return {LayerKind::Tanh, 0, 0, 0, 0.0}; }
  static LayerSpec leaky_relu(double slope = 0.01) {
    return {LayerKind::LeakyRelu, 0, 0, 0, slope};
  }
  static LayerSpec sigmoid() { return {LayerKind::Sigmoid, 0, 0, 0, 0.0}; }
  static LayerSpec softmax() { return {LayerKind::Softmax, 0, 0, 0, 0.0}; }

  bool has_params() const {
    return kind == LayerKind::Dense || kind == LayerKind::Conv1d;
  }

  // Throws std::invalid_argument naming the offending field.
  void validate(std::size_t layer_index) const;
};

}  // namespace slicesim::nn
