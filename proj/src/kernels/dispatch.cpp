#include <atomic>
#include <cstdlib>
#include <string>

#include "boltssi/error.hpp"
#include "boltssi/kernels.hpp"

namespace boltssi::kernels {

namespace {

constexpr KernelSet kScalar{&scalar::and_popcount, &scalar::cross_counts, &scalar::pair_moments};

#if defined(BOLTSSI_HAVE_AVX2)
constexpr KernelSet kAvx2{&avx2::and_popcount, &avx2::cross_counts, &avx2::pair_moments};
#endif

bool cpu_has_avx2() noexcept {
#if defined(BOLTSSI_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma") &&
         __builtin_cpu_supports("popcnt");
#else
  return false;
#endif
}

Isa detect() noexcept {
  if (const char* forced = std::getenv("BOLTSSI_KERNEL")) {
    if (std::string(forced) == "scalar") return Isa::Scalar;
  }
  return cpu_has_avx2() ? Isa::Avx2 : Isa::Scalar;
}

std::atomic<Isa>& active() {
  static std::atomic<Isa> isa{detect()};
  return isa;
}

}  // namespace

std::string_view to_string(Isa isa) noexcept {
  return isa == Isa::Avx2 ? "avx2" : "scalar";
}

bool isa_available(Isa isa) noexcept {
  return isa == Isa::Scalar || (isa == Isa::Avx2 && cpu_has_avx2());
}

std::vector<Isa> available_isas() {
  std::vector<Isa> out{Isa::Scalar};
  if (isa_available(Isa::Avx2)) out.push_back(Isa::Avx2);
  return out;
}

Isa active_isa() noexcept { return active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) {
  if (!isa_available(isa)) {
    throw Error(ErrorKind::InvalidConfig,
                "kernel variant '" + std::string(to_string(isa)) + "' is not available");
  }
  active().store(isa, std::memory_order_relaxed);
}

const KernelSet& kernel_set(Isa isa) {
#if defined(BOLTSSI_HAVE_AVX2)
  if (isa == Isa::Avx2) return kAvx2;
#endif
  (void)isa;
  return kScalar;
}

}  // namespace boltssi::kernels
