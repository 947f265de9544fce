#include "coop2/mat3.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "coop2/signvar.hpp"

namespace coop2 {

using cplx = std::complex<double>;

double det3(const Mat3& a) {
  return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
         a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
         a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
}

double trace3(const Mat3& a) { return a[0][0] + a[1][1] + a[2][2]; }

Mat3 adjugate3(const Mat3& a) {
  Mat3 c{};
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      const std::size_t r0 = (i + 1) % 3, r1 = (i + 2) % 3;
      const std::size_t c0 = (j + 1) % 3, c1 = (j + 2) % 3;
      // Cyclic index choice folds the cofactor sign into the minor.
      c[j][i] = a[r0][c0] * a[r1][c1] - a[r0][c1] * a[r1][c0];
    }
  }
  return c;
}

Mat3 inverse3(const Mat3& a) {
  const double d = det3(a);
  if (d == 0.0 || !std::isfinite(d)) throw std::domain_error("inverse3: singular matrix");
  return (1.0 / d) * adjugate3(a);
}

double cond_fro(const Mat3& a) {
  const double d = det3(a);
  if (d == 0.0 || !std::isfinite(d)) return std::numeric_limits<double>::infinity();
  return norm_fro(a) * norm_fro(inverse3(a));
}

CharPoly3 charpoly3(const Mat3& a) {
  const double minors = (a[0][0] * a[1][1] - a[0][1] * a[1][0]) +
                        (a[0][0] * a[2][2] - a[0][2] * a[2][0]) +
                        (a[1][1] * a[2][2] - a[1][2] * a[2][1]);
  return {-trace3(a), minors, -det3(a)};
}

namespace {

double abs_residual(const CharPoly3& p, cplx z) { return std::abs(p(z)); }

// Newton polish; a step is kept only if it lowers the residual.
cplx polish(const CharPoly3& p, cplx z, int iters = 4) {
  double res = abs_residual(p, z);
  for (int k = 0; k < iters && res > 0.0; ++k) {
    const cplx dp = (3.0 * z + 2.0 * p.c2) * z + p.c1;
    if (dp == 0.0) break;
    const cplx next = z - p(z) / dp;
    const double r = abs_residual(p, next);
    if (!(r < res)) break;
    z = next;
    res = r;
  }
  return z;
}

double polish_real(const CharPoly3& p, double x) { return polish(p, cplx(x, 0.0)).real(); }

// One real root from the closed form: the single real root when the
// discriminant is positive, otherwise the trigonometric root of largest
// magnitude.
double closed_form_real_root(const CharPoly3& poly) {
  const double a = poly.c2, b = poly.c1, c = poly.c0;
  const double shift = a / 3.0;
  const double p = b - a * a / 3.0;
  const double q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  if (p == 0.0 && q == 0.0) return -shift;
  const double disc = 0.25 * q * q + p * p * p / 27.0;
  if (disc > 0.0) {
    const double sq = std::sqrt(disc);
    const double u = std::cbrt(q > 0.0 ? -0.5 * q - sq : -0.5 * q + sq);
    const double v = u != 0.0 ? -p / (3.0 * u) : 0.0;
    return u + v - shift;
  }
  const double r = 2.0 * std::sqrt(-p / 3.0);
  const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
  const double phi = std::acos(arg);
  double best = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double t = r * std::cos(phi / 3.0 - 2.0 * std::numbers::pi * k / 3.0);
    if (k == 0 || std::fabs(t - shift) > std::fabs(best)) best = t - shift;
  }
  return best;
}

std::array<cplx, 2> quadratic_roots(double P, double Q) {
  const double disc = P * P - 4.0 * Q;
  if (disc >= 0.0) {
    const double s = std::sqrt(disc);
    const double t = -0.5 * (P + (P >= 0.0 ? s : -s));
    if (t == 0.0) return {cplx(0.0), cplx(0.0)};
    return {cplx(t), cplx(Q / t)};
  }
  const double im = 0.5 * std::sqrt(-disc);
  return {cplx(-0.5 * P, -im), cplx(-0.5 * P, im)};
}

}  // namespace

std::array<cplx, 3> cubic_roots(const CharPoly3& p) {
  const double r = polish_real(p, closed_form_real_root(p));

  // Deflate by (s - r). Two algebraically equal routes to the quadratic
  // factor; the one with the smaller residual wins.
  std::array<std::array<cplx, 2>, 2> candidates;
  candidates[0] = quadratic_roots(p.c2 + r, p.c1 + r * (p.c2 + r));
  if (r != 0.0) {
    const double Q = -p.c0 / r;
    candidates[1] = quadratic_roots((Q - p.c1) / r, Q);
  } else {
    candidates[1] = candidates[0];
  }
  std::array<cplx, 2> pair{};
  double best = std::numeric_limits<double>::infinity();
  for (auto& cand : candidates) {
    std::array<cplx, 2> polished{polish(p, cand[0]), polish(p, cand[1])};
    if (cand[0].imag() != 0.0) {
      // Keep the pair exactly conjugate.
      const cplx z = polish(p, cand[1]);
      polished = {std::conj(z), z};
    }
    const double res = std::max(abs_residual(p, polished[0]), abs_residual(p, polished[1]));
    if (res < best) {
      best = res;
      pair = polished;
    }
  }
  std::array<cplx, 3> roots{cplx(r, 0.0), pair[0], pair[1]};
  std::sort(roots.begin(), roots.end(), [](cplx x, cplx y) {
    return x.real() != y.real() ? x.real() < y.real() : x.imag() < y.imag();
  });
  return roots;
}

std::string to_string(RouthVerdict v) {
  switch (v) {
    case RouthVerdict::Hurwitz: return "Hurwitz";
    case RouthVerdict::Unstable: return "Unstable";
    case RouthVerdict::Marginal: return "Marginal";
  }
  return "?";
}

RouthVerdict routh_classify(const CharPoly3& p, double tol) {
  // Routh table of a monic cubic: first column 1, c2, (c2 c1 - c0)/c2, c0.
  const double prod = p.c2 * p.c1;
  const double scale_c2 = std::max(1.0, std::fabs(p.c2));
  const double scale_c0 = std::max(1.0, std::fabs(p.c0));
  const double scale_h = std::max({1.0, std::fabs(prod), std::fabs(p.c0)});
  const double h = prod - p.c0;
  if (std::fabs(p.c2) <= tol * scale_c2 || std::fabs(p.c0) <= tol * scale_c0 ||
      std::fabs(h) <= tol * scale_h)
    return RouthVerdict::Marginal;
  if (p.c2 > 0.0 && p.c0 > 0.0 && h > 0.0) return RouthVerdict::Hurwitz;
  return RouthVerdict::Unstable;
}

Mat3 expm3(const Mat3& a) {
  double norm1 = 0.0;
  for (std::size_t j = 0; j < 3; ++j)
    norm1 = std::max(norm1, std::fabs(a[0][j]) + std::fabs(a[1][j]) + std::fabs(a[2][j]));
  int squarings = 0;
  if (norm1 > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm1 / 0.5)));
  const Mat3 b = std::ldexp(1.0, -squarings) * a;

  // Taylor to degree 18: remainder below 0.5^19/19! for ||b|| <= 0.5.
  Mat3 result = identity3();
  Mat3 term = identity3();
  for (int k = 1; k <= 18; ++k) {
    term = (1.0 / k) * (term * b);
    result = result + term;
  }
  for (int s = 0; s < squarings; ++s) result = result * result;
  return result;
}

Vec3 symmetric_eigenvalues(const Mat3& s) {
  const auto roots = cubic_roots(charpoly3(s));
  return {roots[0].real(), roots[1].real(), roots[2].real()};
}

double sigma_min(const Mat3& a) {
  const Vec3 ev = symmetric_eigenvalues(transpose(a) * a);
  return std::sqrt(std::max(0.0, ev[0]));
}

namespace {

// Null vector of a rank-2 matrix: the largest column of its adjugate.
Vec3 null_vector(const Mat3& m) {
  const Mat3 adj = adjugate3(m);
  Vec3 best{};
  double best_norm = -1.0;
  for (std::size_t j = 0; j < 3; ++j) {
    const Vec3 c = column(adj, j);
    const double n = norm2(c);
    if (n > best_norm) {
      best_norm = n;
      best = c;
    }
  }
  if (best_norm <= 0.0) return best;
  return (1.0 / best_norm) * best;
}

// Null vector of (A - lambda I) for complex lambda: cross product of the
// pair of rows with the largest result.
std::array<cplx, 3> complex_null_vector(const Mat3& a, cplx lambda) {
  std::array<std::array<cplx, 3>, 3> m{};
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) m[i][j] = a[i][j] - (i == j ? lambda : 0.0);
  auto cross_c = [](const std::array<cplx, 3>& x, const std::array<cplx, 3>& y) {
    return std::array<cplx, 3>{x[1] * y[2] - x[2] * y[1], x[2] * y[0] - x[0] * y[2],
                               x[0] * y[1] - x[1] * y[0]};
  };
  std::array<cplx, 3> best{};
  double best_norm = -1.0;
  for (const auto& [i, j] : {std::pair{0, 1}, std::pair{0, 2}, std::pair{1, 2}}) {
    const auto c = cross_c(m[i], m[j]);
    const double n = std::sqrt(std::norm(c[0]) + std::norm(c[1]) + std::norm(c[2]));
    if (n > best_norm) {
      best_norm = n;
      best = c;
    }
  }
  return best;
}

Vec3 normalize_sign(Vec3 v) {
  const double n = norm2(v);
  if (n > 0.0) v = (1.0 / n) * v;
  for (double x : v) {
    if (x == 0.0) continue;
    if (x < 0.0) v = -1.0 * v;
    break;
  }
  return v;
}

std::string format_roots(const std::array<cplx, 3>& r) {
  std::ostringstream os;
  os.precision(10);
  for (const auto& z : r) os << ' ' << z.real() << (z.imag() < 0 ? "-" : "+") << std::fabs(z.imag()) << 'i';
  return os.str();
}

}  // namespace

Spectrum3 classify_lemma1(const Mat3& a) {
  const CharPoly3 p = charpoly3(a);
  const double d = det3(a);
  const auto roots = cubic_roots(p);
  if (!(d < 0.0))
    throw SpectralError("classify_lemma1: det(A) = " + std::to_string(d) + " is not negative");
  if (routh_classify(p) != RouthVerdict::Unstable)
    throw SpectralError("classify_lemma1: A is not unstable (Routh verdict " +
                        to_string(routh_classify(p)) + ")");
  if (roots[0].imag() != 0.0 || !(roots[0].real() < 0.0) || !(roots[1].real() > 0.0) ||
      !(roots[2].real() > 0.0))
    throw SpectralError("classify_lemma1: spectrum is not one negative real eigenvalue plus an "
                        "unstable pair; roots:" + format_roots(roots));

  Spectrum3 spec;
  spec.lambda_real = roots[0].real();
  spec.pair_is_complex = roots[1].imag() != 0.0;
  spec.pair[0] = {roots[1].real(), std::fabs(roots[1].imag())};
  spec.pair[1] = {roots[2].real(), std::fabs(roots[2].imag())};
  spec.zeta = normalize_sign(null_vector(a - spec.lambda_real * identity3()));

  const Vec3 residual = a * spec.zeta - spec.lambda_real * spec.zeta;
  if (!(norm2(residual) <= 1e-8 * std::max(1.0, norm_fro(a))))
    throw SpectralError("classify_lemma1: eigenvector residual " +
                        std::to_string(norm2(residual)) + " too large");
  const auto snapped = snap(spec.zeta, 1e-10);
  if (s_minus(snapped) != 2) {
    std::ostringstream os;
    os << "classify_lemma1: stable eigenvector (" << spec.zeta[0] << ", " << spec.zeta[1] << ", "
       << spec.zeta[2] << ") does not alternate in sign";
    throw SpectralError(os.str());
  }
  return spec;
}

std::string to_string(PairCase c) {
  switch (c) {
    case PairCase::RealPair: return "RealPair";
    case PairCase::ComplexPair: return "ComplexPair";
    case PairCase::DefectivePair: return "DefectivePair";
  }
  return "?";
}

Mat3 BlockSchur3::block() const {
  return {{{lambda3, 0.0, 0.0}, {0.0, u1, v1 / delta}, {0.0, v2 * delta, u2}}};
}

std::array<double, 3> BlockSchur3::quadratic_form() const {
  return {u1, 0.5 * (v1 / delta + delta * v2), u2};
}

double BlockSchur3::kappa() const {
  const auto [s11, s12, s22] = quadratic_form();
  const double mean = 0.5 * (s11 + s22);
  const double half = 0.5 * (s11 - s22);
  return mean - std::hypot(half, s12);
}

BlockSchur3 block_schur3(const Mat3& a, const Spectrum3& spec) {
  BlockSchur3 out;
  out.lambda3 = spec.lambda_real;
  const Vec3 zeta = spec.zeta;
  const double l1 = spec.pair[0].re, l2 = spec.pair[1].re;
  const double u = 0.5 * (l1 + l2);
  const double split = spec.pair_is_complex ? 2.0 * spec.pair[0].im : l2 - l1;
  const bool defective = split * split <= 1e-8 * std::max(1.0, u * u);

  if (defective) {
    // Jordan chain inside range(A - lambda3 I), the unstable invariant plane.
    const Mat3 n = a - u * identity3();
    const Mat3 m = a - out.lambda3 * identity3();
    Vec3 w{};
    Vec3 v{};
    double best = -1.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const Vec3 cj = column(m, j);
      const Vec3 nc = n * cj;
      if (norm2(nc) > best) {
        best = norm2(nc);
        w = cj;
        v = nc;
      }
    }
    double wn = 0.0;
    for (std::size_t j = 0; j < 3; ++j) wn = std::max(wn, norm2(column(m, j)));
    if (best <= 1e-7 * wn * std::max(1.0, std::fabs(u))) {
      // Semisimple double eigenvalue: any basis of the plane diagonalizes it.
      Vec3 c0 = column(m, 0), c1 = column(m, 1), c2 = column(m, 2);
      std::array<Vec3, 3> cols{c0, c1, c2};
      std::sort(cols.begin(), cols.end(), [](const Vec3& x, const Vec3& y) { return norm2(x) > norm2(y); });
      Vec3 e1 = (1.0 / norm2(cols[0])) * cols[0];
      Vec3 e2 = cols[1] - dot(cols[1], e1) * e1;
      if (norm2(e2) < 1e-12 * norm2(cols[1])) e2 = cols[2] - dot(cols[2], e1) * e1;
      e2 = (1.0 / norm2(e2)) * e2;
      out.T = from_columns(zeta, e1, e2);
      out.u1 = out.u2 = u;
      out.v1 = out.v2 = 0.0;
      out.delta = 1.0;
      out.case_tag = PairCase::RealPair;
    } else {
      out.case_tag = PairCase::DefectivePair;
      out.u1 = out.u2 = u;
      out.v1 = 1.0;
      out.v2 = 0.0;
      out.delta = 1.0 / u;  // any delta > 1/(2u) keeps the quadratic form definite
      const double s = 1.0 / norm2(v);
      out.T = from_columns(zeta, s * v, (s / out.delta) * w);
    }
  } else if (spec.pair_is_complex) {
    out.case_tag = PairCase::ComplexPair;
    const cplx lambda(spec.pair[0].re, spec.pair[0].im);
    const auto w = complex_null_vector(a, lambda);
    Vec3 re{w[0].real(), w[1].real(), w[2].real()};
    Vec3 im{w[0].imag(), w[1].imag(), w[2].imag()};
    const double s = 1.0 / std::sqrt(dot(re, re) + dot(im, im));
    // A re = u re - w im, A im = w re + u im.
    out.T = from_columns(zeta, s * re, s * im);
    out.u1 = out.u2 = spec.pair[0].re;
    out.v1 = spec.pair[0].im;
    out.v2 = -spec.pair[0].im;
    out.delta = 1.0;
  } else {
    out.case_tag = PairCase::RealPair;
    const Vec3 e1 = null_vector(a - l1 * identity3());
    const Vec3 e2 = null_vector(a - l2 * identity3());
    out.T = from_columns(zeta, e1, e2);
    out.u1 = l1;
    out.u2 = l2;
    out.v1 = out.v2 = 0.0;
    out.delta = 1.0;
  }

  const double cond = cond_fro(out.T);
  if (!(cond <= 1e12))
    throw SpectralError("block_schur3: transformation is ill-conditioned (cond = " +
                        std::to_string(cond) + ")");
  out.T_inv = inverse3(out.T);
  return out;
}

}  // namespace coop2
