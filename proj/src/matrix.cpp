#include "mcvc/matrix.hpp"

#include <cmath>

namespace mcvc {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(std::span<const double> a) { return std::sqrt(dot(a, a)); }

double cosine(std::span<const double> a, std::span<const double> b) {
  const double na = norm(a);
  const double nb = norm(b);
  if (na == 0.0 || nb == 0.0) {
    throw InvalidArgument("cosine: zero-norm vector");
  }
  return dot(a, b) / (na * nb);
}

}  // namespace mcvc
