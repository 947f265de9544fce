#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>
#include <vector>

#include "coop2/mat3.hpp"
#include "coop2/models.hpp"
#include "coop2/signvar.hpp"

using namespace coop2;
using cplx = std::complex<double>;

namespace {

Mat3 goodwin_je() { return goodwin({}).jac(goodwin_equilibrium({})); }

double max_diff(const Mat3& a, const Mat3& b) { return max_abs(a - b); }

Mat3 random_mat(std::mt19937_64& rng, double lo = -2, double hi = 2) {
  std::uniform_real_distribution<double> u(lo, hi);
  Mat3 a;
  for (auto& r : a)
    for (auto& v : r) v = u(rng);
  return a;
}

}  // namespace

TEST_CASE("det3 and charpoly3") {
  CHECK(det3(identity3()) == 1.0);
  CHECK(det3(Mat3{{{1, 2, 3}, {1, 2, 3}, {4, 5, 6}}}) == 0.0);
  const FieldNoyesParams fp;
  CHECK(det3(field_noyes(fp).jac(field_noyes_equilibrium(fp))) == doctest::Approx(-1.1722).epsilon(1e-3));

  const CharPoly3 g = charpoly3(goodwin_je());
  CHECK(g.c2 == doctest::Approx(1.5).epsilon(1e-3));
  CHECK(g.c1 == doctest::Approx(0.74).epsilon(1e-3));
  CHECK(g.c0 == doctest::Approx(1.1478).epsilon(1e-3));

  const CharPoly3 z = charpoly3(zero3());
  CHECK((z.c2 == 0.0 && z.c1 == 0.0 && z.c0 == 0.0));

  // det(sI - A) by direct expansion at s in {0, 1, -1}
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const Mat3 a = random_mat(rng);
    const CharPoly3 p = charpoly3(a);
    for (double s : {0.0, 1.0, -1.0}) {
      const double direct = det3(s * identity3() - a);
      CHECK(p(s) == doctest::Approx(direct).epsilon(1e-12).scale(1.0));
    }
  }
}

TEST_CASE("cubic roots examples") {
  auto r = cubic_roots({1.5, 0.74, 1.1478});
  CHECK(r[0].real() == doctest::Approx(-1.5125).epsilon(1e-3));
  CHECK(r[0].imag() == 0.0);
  CHECK(std::fabs(r[1].real() - 0.0062) < 1e-3);
  CHECK(std::fabs(std::fabs(r[1].imag()) - 0.8711) < 1e-3);
  CHECK(r[1] == std::conj(r[2]));

  r = cubic_roots({0, 0, -1});
  CHECK(std::abs(r[0] - cplx(-0.5, -std::sqrt(3.0) / 2)) < 1e-12);
  CHECK(std::abs(r[1] - cplx(-0.5, std::sqrt(3.0) / 2)) < 1e-12);
  CHECK(std::abs(r[2] - cplx(1.0, 0.0)) < 1e-12);

  r = cubic_roots({-6, 11, -6});
  CHECK(std::abs(r[0] - 1.0) < 1e-12);
  CHECK(std::abs(r[1] - 2.0) < 1e-12);
  CHECK(std::abs(r[2] - 3.0) < 1e-12);
}

TEST_CASE("cubic roots recover 1000 random constructions") {
  std::mt19937_64 rng(1000);
  std::uniform_real_distribution<double> u(-10, 10);
  std::bernoulli_distribution complex_pair(0.5);
  for (int t = 0; t < 1000; ++t) {
    std::vector<cplx> want;
    want.emplace_back(u(rng), 0.0);
    if (complex_pair(rng)) {
      const cplx z(u(rng), std::fabs(u(rng)) + 1e-3);
      want.push_back(z);
      want.push_back(std::conj(z));
    } else {
      want.emplace_back(u(rng), 0.0);
      want.emplace_back(u(rng), 0.0);
    }
    // expand (s - r0)(s - r1)(s - r2)
    const cplx e1 = want[0] + want[1] + want[2];
    const cplx e2 = want[0] * want[1] + want[0] * want[2] + want[1] * want[2];
    const cplx e3 = want[0] * want[1] * want[2];
    const CharPoly3 p{-e1.real(), e2.real(), -e3.real()};
    const auto got = cubic_roots(p);
    const double pnorm = std::max({std::fabs(p.c2), std::fabs(p.c1), std::fabs(p.c0)});
    for (const cplx& z : got) CHECK(std::abs(p(z)) <= 1e-9 * (1.0 + pnorm) * std::max(1.0, std::pow(std::abs(z), 3)));
    // multiset match: greedy nearest pairing
    std::vector<cplx> left(got.begin(), got.end());
    for (const cplx& w : want) {
      auto it = std::min_element(left.begin(), left.end(),
                                 [&](cplx a, cplx b) { return std::abs(a - w) < std::abs(b - w); });
      // close real roots are ill-conditioned (error ~ sqrt(eps) / gap)
      double gap = 1e300;
      for (const cplx& o : want)
        if (&o != &w) gap = std::min(gap, std::abs(o - w));
      const double tol = gap < 1e-2 ? 1e-5 : 1e-7 * std::max(1.0, std::abs(w));
      CHECK(std::abs(*it - w) <= tol);
      left.erase(it);
    }
  }
}

TEST_CASE("routh classification") {
  CHECK(routh_classify({1.5, 0.74, 1.1478}) == RouthVerdict::Unstable);
  CHECK(routh_classify({1630.8886, -4.8311, 1.1722}) == RouthVerdict::Unstable);
  CHECK(routh_classify({3, 3, 1}) == RouthVerdict::Hurwitz);
  CHECK(routh_classify({1, 1, 1}) == RouthVerdict::Marginal);  // s = +-i
  CHECK(routh_classify({1, 1, 0}) == RouthVerdict::Marginal);  // s = 0
  // agree with the roots away from the boundary
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int t = 0; t < 500; ++t) {
    const CharPoly3 p{u(rng), u(rng), u(rng)};
    const auto r = cubic_roots(p);
    const double maxre = std::max({r[0].real(), r[1].real(), r[2].real()});
    if (std::fabs(maxre) < 1e-6) continue;
    CHECK((routh_classify(p) == RouthVerdict::Hurwitz) == (maxre < 0));
  }
}

TEST_CASE("expm3") {
  CHECK(max_diff(expm3(zero3()), identity3()) == 0.0);
  const Mat3 e = expm3(Mat3{{{1, 0, 0}, {0, 2, 0}, {0, 0, 3}}});
  CHECK(e[0][0] == doctest::Approx(std::exp(1.0)).epsilon(1e-13));
  CHECK(e[1][1] == doctest::Approx(std::exp(2.0)).epsilon(1e-13));
  CHECK(e[2][2] == doctest::Approx(std::exp(3.0)).epsilon(1e-13));
  CHECK(e[0][1] == 0.0);
  // rotation generator
  const Mat3 r = expm3(Mat3{{{0, -1, 0}, {1, 0, 0}, {0, 0, 0}}});
  CHECK(r[0][0] == doctest::Approx(std::cos(1.0)).epsilon(1e-13));
  CHECK(r[1][0] == doctest::Approx(std::sin(1.0)).epsilon(1e-13));

  std::mt19937_64 rng(11);
  for (int t = 0; t < 200; ++t) {
    const Mat3 a = random_mat(rng, -3, 3);
    CHECK(det3(expm3(a)) == doctest::Approx(std::exp(trace3(a))).epsilon(1e-8));
    // exp(A) exp(-A) = I
    CHECK(max_diff(expm3(a) * expm3(-1.0 * a), identity3()) < 1e-10);
  }
}

TEST_CASE("inverse and conditioning") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const Mat3 a = random_mat(rng);
    if (std::fabs(det3(a)) < 1e-3) continue;
    CHECK(max_diff(a * inverse3(a), identity3()) < 1e-9 * cond_fro(a));
  }
  CHECK_THROWS_AS(inverse3(Mat3{{{1, 2, 3}, {2, 4, 6}, {0, 0, 1}}}), std::domain_error);
  CHECK(std::isinf(cond_fro(zero3())));
  const Vec3 ev = symmetric_eigenvalues(Mat3{{{2, 1, 0}, {1, 2, 0}, {0, 0, 5}}});
  CHECK(ev[0] == doctest::Approx(1.0));
  CHECK(ev[1] == doctest::Approx(3.0));
  CHECK(ev[2] == doctest::Approx(5.0));
  CHECK(sigma_min(Mat3{{{3, 0, 0}, {0, 0.5, 0}, {0, 0, 2}}}) == doctest::Approx(0.5));
}

TEST_CASE("classify_lemma1 on the Goodwin Jacobian") {
  const Mat3 a = goodwin_je();
  const Spectrum3 s = classify_lemma1(a);
  CHECK(s.lambda_real == doctest::Approx(-1.5125).epsilon(1e-3));
  CHECK(s.pair_is_complex);
  const Vec3 ref{0.5999, -0.5393, 0.5910};
  const double k = norm2(ref);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::fabs(s.zeta[i] * k - ref[i]) < 1e-3);
  CHECK(norm2(a * s.zeta - s.lambda_real * s.zeta) <= 1e-8 * norm_fro(a));
}

TEST_CASE("classify_lemma1 on a constructed spectrum") {
  // T diag(-1, [[0.1, -1], [1, 0.1]]) inv(T), with T chosen so the result
  // conforms to the 2-positivity pattern
  const Mat3 t{{{1, 1, 0}, {-1, 0.3, 1}, {1, -0.2, 0.4}}};
  const Mat3 b{{{-1, 0, 0}, {0, 0.1, -1}, {0, 1, 0.1}}};
  const Mat3 a = t * b * inverse3(t);
  const Spectrum3 s = classify_lemma1(a);
  CHECK(s.lambda_real == doctest::Approx(-1.0).epsilon(1e-10));
  CHECK(s.pair[0].re == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(s.pair[0].im == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(s_minus(s.zeta) == 2);
}

TEST_CASE("classify_lemma1 rejects a Hurwitz matrix") {
  CHECK_THROWS_AS(classify_lemma1(Mat3{{{-1, 1, 0}, {0, -1, 1}, {0, 0, -1}}}), SpectralError);
  CHECK_THROWS_AS(classify_lemma1(-1.0 * identity3()), SpectralError);
}

namespace {
void check_block(const Mat3& a, const BlockSchur3& bs) {
  const Mat3 m = bs.T_inv * a * bs.T;
  const Mat3 want{{{bs.lambda3, 0, 0}, {0, bs.u1, bs.v1 / bs.delta}, {0, bs.v2 * bs.delta, bs.u2}}};
  CHECK(max_diff(m, want) <= 1e-8 * std::max(1.0, norm_fro(a)));
  CHECK(bs.kappa() > 0.0);
}
}  // namespace

TEST_CASE("block_schur3 complex pair") {
  const Mat3 a = goodwin_je();
  const BlockSchur3 bs = block_schur3(a, classify_lemma1(a));
  CHECK(bs.case_tag == PairCase::ComplexPair);
  CHECK(std::fabs(bs.u1 - 0.0062) < 1e-3);
  CHECK(bs.u1 == bs.u2);
  CHECK(bs.v1 / bs.delta == doctest::Approx(-bs.v2 * bs.delta));
  CHECK(bs.kappa() == doctest::Approx(bs.u1));
  check_block(a, bs);
  // inv(T) zeta is parallel to e1
  const Vec3 q = bs.T_inv * classify_lemma1(a).zeta;
  CHECK(std::fabs(q[1]) + std::fabs(q[2]) < 1e-12 * std::fabs(q[0]));
}

TEST_CASE("block_schur3 real pair") {
  Spectrum3 s;
  s.lambda_real = -1;
  s.pair[0] = {1, 0};
  s.pair[1] = {2, 0};
  s.zeta = {1, 0, 0};
  const Mat3 a{{{-1, 0, 0}, {0, 1, 0}, {0, 0, 2}}};
  const BlockSchur3 bs = block_schur3(a, s);
  CHECK(bs.case_tag == PairCase::RealPair);
  CHECK(bs.v1 == 0.0);
  CHECK(bs.v2 == 0.0);
  CHECK(bs.delta == 1.0);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      if (i != j) CHECK(std::fabs(bs.T[i][j]) < 1e-12);
  check_block(a, bs);
}

TEST_CASE("block_schur3 defective pair") {
  const double u = 0.3;
  const Mat3 t{{{1, 0.2, 0.5}, {-1, 1, 0.1}, {1, 0.3, 1}}};
  const Mat3 j{{{-2, 0, 0}, {0, u, 1}, {0, 0, u}}};
  const Mat3 a = t * j * inverse3(t);
  const Spectrum3 s = classify_lemma1(a);
  const BlockSchur3 bs = block_schur3(a, s);
  CHECK(bs.case_tag == PairCase::DefectivePair);
  CHECK(bs.v1 == 1.0);
  CHECK(bs.v2 == 0.0);
  CHECK(bs.delta > 1.0 / (2.0 * u));
  check_block(a, bs);
}

TEST_CASE("block_schur3 residual on random saddles") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> diag(-3, 3), off(0.05, 3);
  int n = 0;
  while (n < 100) {
    Mat3 a{};
    for (int i = 0; i < 3; ++i) a[i][i] = diag(rng);
    a[0][1] = off(rng); a[1][0] = off(rng); a[1][2] = off(rng); a[2][1] = off(rng);
    a[0][2] = -off(rng); a[2][0] = -off(rng);
    if (det3(a) >= 0 || routh_classify(charpoly3(a)) != RouthVerdict::Unstable) continue;
    ++n;
    const Spectrum3 s = classify_lemma1(a);
    const BlockSchur3 bs = block_schur3(a, s);
    check_block(a, bs);
  }
}
