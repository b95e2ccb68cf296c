#pragma once

#include <cstddef>
#include <string_view>

// Inner-loop arithmetic for scoring and distances. Each kernel has a portable
// scalar reference and an AVX2/FMA variant; the active table is chosen once at
// runtime from CPU features and can be overridden with DUALKGE_SIMD=scalar|avx2.

namespace dualkge::kernels {

enum class Isa { Scalar, Avx2 };

using TernaryFn = double (*)(const double* a, const double* b, const double* c, std::size_t n);
using BinaryFn = double (*)(const double* a, const double* b, std::size_t n);

struct KernelTable {
  Isa isa;
  /// sum_i |a_i + b_i - c_i|
  TernaryFn translation_l1;
  /// sum_i (a_i + b_i - c_i)^2
  TernaryFn translation_l2sq;
  /// sum_i a_i * b_i * c_i
  TernaryFn trilinear;
  /// sum_i (a_i - b_i)^2
  BinaryFn squared_distance;
  /// sum_i a_i * b_i
  BinaryFn dot;
};

namespace scalar {
double translation_l1(const double* h, const double* r, const double* t, std::size_t n);
double translation_l2sq(const double* h, const double* r, const double* t, std::size_t n);
double trilinear(const double* a, const double* b, const double* c, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define DUALKGE_HAVE_AVX2_KERNELS 1
namespace avx2 {
double translation_l1(const double* h, const double* r, const double* t, std::size_t n);
double translation_l2sq(const double* h, const double* r, const double* t, std::size_t n);
double trilinear(const double* a, const double* b, const double* c, std::size_t n);
double squared_distance(const double* a, const double* b, std::size_t n);
double dot(const double* a, const double* b, std::size_t n);
}  // namespace avx2
#endif

/// True when the running CPU can execute the given variant.
bool supported(Isa isa) noexcept;

/// Kernel table for a specific variant; throws ArgumentError if unsupported.
const KernelTable& table(Isa isa);

/// Currently selected table.
const KernelTable& active() noexcept;

/// Overrides the runtime choice. Not thread-safe with concurrent kernel use.
void select(Isa isa);

std::string_view name(Isa isa) noexcept;

}  // namespace dualkge::kernels
