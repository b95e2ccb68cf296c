#include <cmath>

#include "dualkge/kernels.hpp"

namespace dualkge::kernels::scalar {

double translation_l1(const double* h, const double* r, const double* t, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += std::fabs(h[i] + r[i] - t[i]);
  return sum;
}

double translation_l2sq(const double* h, const double* r, const double* t, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = h[i] + r[i] - t[i];
    sum += d * d;
  }
  return sum;
}

double trilinear(const double* a, const double* b, const double* c, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i] * c[i];
  return sum;
}

double squared_distance(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

double dot(const double* a, const double* b, std::size_t n) {
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) sum += a[i] * b[i];
  return sum;
}

}  // namespace dualkge::kernels::scalar
