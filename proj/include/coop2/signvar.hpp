// Sign-variation counts of real vectors and membership in the cones of
// vectors with at most k-1 sign variations.
//
// An entry counts as zero only when it is exactly 0.0. Callers that work
// with computed data should pass the vector through snap() first.
#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace coop2 {

inline constexpr double kDefaultSnapTol = 1e-12;

/// Copy of x with every |x_i| <= tol replaced by an exact zero.
std::vector<double> snap(std::span<const double> x, double tol = kDefaultSnapTol);

/// Number of sign changes between adjacent entries. Throws
/// std::invalid_argument if x contains a zero entry.
std::size_t sigma(std::span<const double> x);

/// Sign changes after deleting zeros; the zero vector gives 0.
std::size_t s_minus(std::span<const double> x);

/// Maximum number of sign changes over all +-1 substitutions of the zero
/// entries; the zero vector gives n-1. Exhaustive over 2^z substitutions,
/// so x may hold at most 20 zeros.
std::size_t s_plus(std::span<const double> x);

struct ConeMembership {
  std::size_t k = 1;
  bool in_P_minus = false;  // s_minus(x) <= k-1
  bool in_P_plus = false;   // s_plus(x) <= k-1
};

/// Throws std::invalid_argument unless 1 <= k <= x.size().
ConeMembership cone_membership(std::span<const double> x, std::size_t k);

}  // namespace coop2
