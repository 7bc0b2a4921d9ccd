#pragma once

// Closed-form evaluators for the coupon-collector expectation, the
// random-matrix invertibility probability over GF(2^s), and the per-round
// decoding-error bound, used both for reporting and as test oracles.

#include <stdexcept>

namespace fednc::analysis {

struct FieldTooSmallError : std::invalid_argument {
  explicit FieldTooSmallError(const std::string& what)
      : std::invalid_argument(what) {}
};

inline constexpr double kEulerMascheroni = 0.5772156649;

// K * H_K, the exact expected number of uniform draws with replacement to
// see all K packet types. Summed ascending for accuracy.
double coupon_expectation_exact(int k);

// K ln K + gamma K + 1/2, the leading terms of the same expectation.
double coupon_expectation_asymptotic(int k);

// Probability that a uniform K x K matrix over GF(2^s) is invertible:
// prod_{i=1..K} (1 - 2^(-s*i)). One FedNC round fails with the complement.
double invertibility_probability(int k, unsigned s);

// Upper bound on the per-round decoding error: 1 - (1 - 2^(-s))^eta.
double prop2_error_bound(unsigned s, double eta);

// Lower bound (1 - d*2^(-s))^eta on the probability that all d receivers
// decode; requires s > log2(d). With d=1 this is the complement of
// prop2_error_bound.
double success_lower_bound_general(int d, unsigned s, double eta);

// Expected uniform coded draws until a decoder over GF(2^s) reaches rank K:
// sum_{j=1..K} 1 / (1 - 2^(-s*j)).
double coded_collection_expectation(int k, unsigned s);

}  // namespace fednc::analysis
