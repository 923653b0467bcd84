#include "alise/check.hpp"
#include "alise/kernels.hpp"

namespace alise::kern {

#if !ALISE_HAVE_AVX2_TU
const Ops* avx2_ops() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Ops* select_auto() {
  if (cpu_has_avx2() && avx2_ops() != nullptr) return avx2_ops();
  return &scalar_ops();
}

const Ops*& active_slot() {
  static const Ops* active = select_auto();
  return active;
}

}  // namespace

const Ops& ops() { return *active_slot(); }

std::string_view active_isa() { return ops().name; }

void force_isa(std::string_view which) {
  if (which == "auto") {
    active_slot() = select_auto();
  } else if (which == "scalar") {
    active_slot() = &scalar_ops();
  } else if (which == "avx2") {
    ALISE_CHECK(cpu_has_avx2() && avx2_ops() != nullptr, "avx2 kernels unavailable on this machine");
    active_slot() = avx2_ops();
  } else {
    ALISE_CHECK(false, "unknown isa '" << which << "' (expected scalar|avx2|auto)");
  }
}

}  // namespace alise::kern
