// Qualitative (sign-pattern) analysis of square matrices.
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "coop2/types.hpp"

namespace coop2 {

enum class Sign { Any, Zero, NonNeg, NonPos };

/// "*", "0", ">=0" or "<=0".
std::string to_string(Sign s);
/// Accepts the to_string() forms plus "+", "-", ">0", "<0". Throws
/// std::invalid_argument on anything else.
Sign parse_sign(const std::string& text);

/// Dense row-major n x n real matrix.
class MatrixN {
 public:
  explicit MatrixN(std::size_t n = 0) : n_(n), a_(n * n, 0.0) {}
  MatrixN(const Mat3& m);  // NOLINT(google-explicit-constructor)

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return a_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return a_[i * n_ + j]; }
  MatrixN transposed() const;

 private:
  std::size_t n_;
  std::vector<double> a_;
};

class SignPattern {
 public:
  explicit SignPattern(std::size_t n = 0) : n_(n), cells_(n * n, Sign::Any) {}
  SignPattern(std::initializer_list<std::initializer_list<Sign>> rows);

  std::size_t size() const { return n_; }
  Sign& operator()(std::size_t i, std::size_t j) { return cells_[i * n_ + j]; }
  Sign operator()(std::size_t i, std::size_t j) const { return cells_[i * n_ + j]; }

  friend bool operator==(const SignPattern&, const SignPattern&) = default;

 private:
  std::size_t n_;
  std::vector<Sign> cells_;
};

/// True iff every entry of a satisfies its symbol up to tol. Throws
/// std::invalid_argument on a dimension mismatch.
bool conforms(const MatrixN& a, const SignPattern& p, double tol = 0.0);

/// The 2-positivity pattern: Any on the diagonal, NonNeg on the first
/// off-diagonals, NonPos in the two corners, Zero elsewhere. n >= 3.
SignPattern pattern_A2(std::size_t n);

bool is_metzler(const MatrixN& a, double tol = 0.0);

/// Strong connectivity of the digraph with an edge i->j whenever
/// |a_ij| > tol, i != j. A 1x1 matrix is irreducible.
bool is_irreducible(const MatrixN& a, double tol = 0.0);

/// True iff all nine 2x2 minors of exp(a) are strictly positive.
bool verify_strong_2positive_minors(const Mat3& a);

/// The nine 2x2 minors of m, ordered by (row pair, column pair).
std::array<double, 9> minors2(const Mat3& m);

}  // namespace coop2
