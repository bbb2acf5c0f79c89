#pragma once

#include <cstddef>
#include <vector>

namespace slicesim::kernels {

// Double-precision kernels behind a runtime-dispatched table. Scalar is the
// reference implementation; SIMD variants must agree with it to roundoff
// (see tests/test_kernels.cpp). Transcendental-heavy ops stay scalar.
struct Ops {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  void (*scal)(double alpha, double* x, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*sqnorm)(const double* x, std::size_t n);
  // y = max(x, 0)
  void (*relu)(const double* x, double* y, std::size_t n);
  // y = x > 0 ? x : slope * x
  void (*leaky_relu)(const double* x, double slope, double* y, std::size_t n);
  // z = a*x + b*y
  void (*blend)(double a, const double* x, double b, const double* y, double* z,
                std::size_t n);
};

const Ops& scalar_ops();

#if defined(__x86_64__) || defined(_M_X64)
const Ops& avx2_ops();
bool avx2_supported();
#endif
#if defined(__aarch64__)
const Ops& neon_ops();
#endif

// Backend selected at startup: best supported variant, overridable with
// SLICESIM_KERNELS=scalar|avx2|neon|auto.
const Ops& active();
const char* backend_name();

// Every backend compiled into this binary and usable on this CPU,
// scalar first.
std::vector<const Ops*> available_backends();

}  // namespace slicesim::kernels
