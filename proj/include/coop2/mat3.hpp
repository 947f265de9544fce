// Dense 3x3 linear algebra: characteristic polynomial, cubic roots, Routh
// test, matrix exponential, and the spectral splitting of a 3x3 matrix with
// one stable real eigenvalue and an unstable pair.
#pragma once

#include <array>
#include <complex>
#include <stdexcept>
#include <string>

#include "coop2/types.hpp"

namespace coop2 {

double det3(const Mat3& a);
double trace3(const Mat3& a);
Mat3 adjugate3(const Mat3& a);
/// Throws std::domain_error when a is singular.
Mat3 inverse3(const Mat3& a);
/// Condition number in the Frobenius norm; +inf when singular.
double cond_fro(const Mat3& a);
/// Eigenvalues of a symmetric matrix, ascending.
Vec3 symmetric_eigenvalues(const Mat3& s);
/// Smallest singular value.
double sigma_min(const Mat3& a);

/// Monic cubic s^3 + c2 s^2 + c1 s + c0.
struct CharPoly3 {
  double c2 = 0.0;
  double c1 = 0.0;
  double c0 = 0.0;

  template <class T>
  T operator()(T s) const {
    return ((s + c2) * s + c1) * s + c0;
  }
};

CharPoly3 charpoly3(const Mat3& a);

/// Roots of the monic cubic, ordered by ascending real part (ties broken by
/// imaginary part). Complex pairs are returned exactly conjugate, with the
/// negative imaginary part first.
std::array<std::complex<double>, 3> cubic_roots(const CharPoly3& p);

enum class RouthVerdict { Hurwitz, Unstable, Marginal };
std::string to_string(RouthVerdict v);

RouthVerdict routh_classify(const CharPoly3& p, double tol = 1e-12);

/// Matrix exponential by scaling and squaring around a truncated Taylor
/// series.
Mat3 expm3(const Mat3& a);

/// Raised when a matrix does not have the spectral structure of a saddle
/// with one stable real direction, or when that structure cannot be
/// resolved numerically.
class SpectralError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EigenPair {
  double re = 0.0;
  double im = 0.0;  // >= 0
};

struct Spectrum3 {
  double lambda_real = 0.0;  // the negative real eigenvalue
  EigenPair pair[2];         // the two unstable eigenvalues
  bool pair_is_complex = false;
  Vec3 zeta{};               // unit eigenvector of lambda_real, first nonzero entry > 0
};

/// Splits an unstable matrix with negative determinant into its stable real
/// eigenvalue and its unstable pair, and checks that the stable eigenvector
/// alternates in sign (two sign variations after snapping at 1e-10).
/// Throws SpectralError with diagnostics when any of this fails.
Spectrum3 classify_lemma1(const Mat3& a);

enum class PairCase { RealPair, ComplexPair, DefectivePair };
std::string to_string(PairCase c);

/// Real block form
///   inv(T) A T = [[lambda3, 0, 0], [0, u1, v1/delta], [0, v2*delta, u2]]
/// with the first column of T equal to zeta.
struct BlockSchur3 {
  Mat3 T{};
  Mat3 T_inv{};
  double lambda3 = 0.0;
  double u1 = 0.0;
  double u2 = 0.0;
  double v1 = 0.0;
  double v2 = 0.0;
  double delta = 1.0;
  PairCase case_tag = PairCase::RealPair;

  Mat3 block() const;
  /// Symmetric part of the unstable 2x2 block.
  std::array<double, 3> quadratic_form() const;  // (s11, s12, s22)
  /// Smallest eigenvalue of quadratic_form().
  double kappa() const;
};

/// Throws SpectralError when T would be ill-conditioned (cond > 1e12).
BlockSchur3 block_schur3(const Mat3& a, const Spectrum3& spec);

}  // namespace coop2
