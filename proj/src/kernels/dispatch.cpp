#include "slicesim/kernels/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace slicesim::kernels {
namespace {

const Ops* select() {
  const char* env = std::getenv("SLICESIM_KERNELS");
  std::string_view want = env ? env : "auto";
  if (want == "scalar") return &scalar_ops();
#if defined(__x86_64__) || defined(_M_X64)
  if (want == "avx2" && avx2_supported()) return &avx2_ops();
  if (want == "auto" && avx2_supported()) return &avx2_ops();
#endif
#if defined(__aarch64__)
  if (want == "neon" || want == "auto") return &neon_ops();
#endif
  return &scalar_ops();
}

}  // namespace

const Ops& active() {
  static const Ops* chosen = select();
  return *chosen;
}

const char* backend_name() { return active().name; }

std::vector<const Ops*> available_backends() {
  std::vector<const Ops*> out{&scalar_ops()};
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_supported()) out.push_back(&avx2_ops());
#endif
#if defined(__aarch64__)
  out.push_back(&neon_ops());
#endif
  return out;
}

}  // namespace slicesim::kernels
