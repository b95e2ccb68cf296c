#include <atomic>
#include <cstdlib>
#include <string>

#include "dualkge/error.hpp"
#include "dualkge/kernels.hpp"

namespace dualkge::kernels {

namespace {

constexpr KernelTable kScalar{Isa::Scalar,     scalar::translation_l1,   scalar::translation_l2sq,
                              scalar::trilinear, scalar::squared_distance, scalar::dot};

#ifdef DUALKGE_HAVE_AVX2_KERNELS
constexpr KernelTable kAvx2{Isa::Avx2,       avx2::translation_l1,   avx2::translation_l2sq,
                            avx2::trilinear, avx2::squared_distance, avx2::dot};
#endif

const KernelTable* initial_table() {
  if (const char* env = std::getenv("DUALKGE_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return &kScalar;
#ifdef DUALKGE_HAVE_AVX2_KERNELS
    if (want == "avx2" && supported(Isa::Avx2)) return &kAvx2;
#endif
  }
#ifdef DUALKGE_HAVE_AVX2_KERNELS
  if (supported(Isa::Avx2)) return &kAvx2;
#endif
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{initial_table()};
  return table;
}

}  // namespace

bool supported(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return true;
    case Isa::Avx2:
#if defined(DUALKGE_HAVE_AVX2_KERNELS) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
  }
  return false;
}

const KernelTable& table(Isa isa) {
  if (!supported(isa)) throw ArgumentError("kernel variant '" + std::string(name(isa)) + "' not supported on this CPU");
#ifdef DUALKGE_HAVE_AVX2_KERNELS
  if (isa == Isa::Avx2) return kAvx2;
#endif
  return kScalar;
}

const KernelTable& active() noexcept { return *current().load(std::memory_order_acquire); }

void select(Isa isa) { current().store(&table(isa), std::memory_order_release); }

std::string_view name(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar:
      return "scalar";
    case Isa::Avx2:
      return "avx2";
  }
  return "unknown";
}

}  // namespace dualkge::kernels
