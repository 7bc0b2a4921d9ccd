#include "fednc/analysis.hpp"

#include <cmath>
#include <string>

namespace fednc::analysis {

namespace {

void require_positive(int k) {
  if (k < 1) throw std::invalid_argument("generation size must be >= 1");
}

}  // namespace

double coupon_expectation_exact(int k) {
  require_positive(k);
  double harmonic = 0.0;
  for (int i = 1; i <= k; ++i) harmonic += 1.0 / i;
  return k * harmonic;
}

double coupon_expectation_asymptotic(int k) {
  require_positive(k);
  return k * std::log(static_cast<double>(k)) + kEulerMascheroni * k + 0.5;
}

namespace {

// Exact power of two; underflows cleanly to 0 for large exponents.
double pow2_neg(long e) {
  if (e > 1100) return 0.0;
  return std::ldexp(1.0, static_cast<int>(-e));
}

}  // namespace

double invertibility_probability(int k, unsigned s) {
  require_positive(k);
  double p = 1.0;
  for (int i = 1; i <= k; ++i) {
    p *= 1.0 - pow2_neg(static_cast<long>(s) * i);
  }
  return p;
}

double prop2_error_bound(unsigned s, double eta) {
  return 1.0 - std::pow(1.0 - pow2_neg(s), eta);
}

double success_lower_bound_general(int d, unsigned s, double eta) {
  if (d < 1) throw std::invalid_argument("receiver count must be >= 1");
  if (static_cast<double>(s) <= std::log2(static_cast<double>(d))) {
    throw FieldTooSmallError("bound requires s > log2(d); got s=" +
                             std::to_string(s) + ", d=" + std::to_string(d));
  }
  return std::pow(1.0 - d * pow2_neg(s), eta);
}

double coded_collection_expectation(int k, unsigned s) {
  require_positive(k);
  double total = 0.0;
  for (int j = 1; j <= k; ++j) {
    total += 1.0 / (1.0 - pow2_neg(static_cast<long>(s) * j));
  }
  return total;
}

}  // namespace fednc::analysis
