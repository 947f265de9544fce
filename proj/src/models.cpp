#include "coop2/models.hpp"

#include <cmath>
#include <stdexcept>

#include "coop2/mat3.hpp"

namespace coop2 {

bool Box3::contains(const Vec3& x, double tol) const {
  for (std::size_t i = 0; i < 3; ++i)
    if (x[i] < lower[i] - tol || x[i] > upper[i] + tol) return false;
  return true;
}

bool Box3::interior(const Vec3& x) const {
  for (std::size_t i = 0; i < 3; ++i)
    if (!(x[i] > lower[i] && x[i] < upper[i])) return false;
  return true;
}

double Box3::excursion(const Vec3& x) const {
  double out = 0.0;
  for (std::size_t i = 0; i < 3; ++i)
    out = std::fmax(out, std::fmax(lower[i] - x[i], x[i] - upper[i]));
  return out;
}

double SystemModel::param(const std::string& key) const {
  for (const auto& [k, v] : params)
    if (k == key) return v;
  throw std::out_of_range("model '" + name + "' has no parameter '" + key + "'");
}

Mat3 numeric_jacobian(const std::function<Vec3(const Vec3&)>& f, const Vec3& x) {
  Mat3 j{};
  for (std::size_t c = 0; c < 3; ++c) {
    const double h = 1e-6 * (1.0 + std::fabs(x[c]));
    Vec3 xp = x, xm = x;
    xp[c] += h;
    xm[c] -= h;
    const Vec3 d = (1.0 / (2.0 * h)) * (f(xp) - f(xm));
    for (std::size_t r = 0; r < 3; ++r) j[r][c] = d[r];
  }
  return j;
}

namespace {

void validate(const GoodwinParams& p) {
  if (!(p.alpha > 0.0 && p.beta > 0.0 && p.gamma > 0.0))
    throw std::invalid_argument("goodwin: alpha, beta, gamma must be positive");
  if (p.m < 1) throw std::invalid_argument("goodwin: m must be a positive integer");
}

void validate(const FieldNoyesParams& p) {
  if (!(p.s > 0.0 && p.q > 0.0 && p.f > 0.0 && p.w > 0.0))
    throw std::invalid_argument("field-noyes: s, q, f, w must be positive");
}

}  // namespace

Vec3 goodwin_equilibrium(const GoodwinParams& p) {
  validate(p);
  const double k = p.alpha * p.beta * p.gamma;
  const auto Q = [&](double s) { return k * std::pow(s, p.m + 1) + k * s - 1.0; };
  // Q(0) = -1 and Q(1/k) = k^-m > 0; Q is increasing on (0, inf).
  double lo = 0.0, hi = 1.0 / k;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (Q(mid) < 0.0 ? lo : hi) = mid;
  }
  double s = 0.5 * (lo + hi);
  for (int it = 0; it < 4; ++it) {
    const double dq = k * (p.m + 1) * std::pow(s, p.m) + k;
    const double next = s - Q(s) / dq;
    if (!(std::fabs(Q(next)) < std::fabs(Q(s)))) break;
    s = next;
  }
  return {p.beta * p.gamma * s, p.gamma * s, s};
}

SystemModel goodwin(const GoodwinParams& p) {
  validate(p);
  SystemModel m;
  m.name = "goodwin";
  m.params = {{"alpha", p.alpha}, {"beta", p.beta}, {"gamma", p.gamma},
              {"m", static_cast<double>(p.m)}};
  m.f = [p](const Vec3& x) -> Vec3 {
    return {-p.alpha * x[0] + 1.0 / (1.0 + std::pow(x[2], p.m)), -p.beta * x[1] + x[0],
            -p.gamma * x[2] + x[1]};
  };
  m.jac = [p](const Vec3& x) -> Mat3 {
    const double xm = std::pow(x[2], p.m);
    const double d = 1.0 + xm;
    const double j13 = -p.m * std::pow(x[2], p.m - 1) / (d * d);
    return {{{-p.alpha, 0.0, j13}, {1.0, -p.beta, 0.0}, {0.0, 1.0, -p.gamma}}};
  };
  const double a = p.alpha, ab = p.alpha * p.beta, abg = ab * p.gamma;
  m.box = {{0.0, 0.0, 0.0}, {1.0 / a, 1.0 / ab, 1.0 / abg}};
  m.sign_certificate = pattern_A2(3);
  m.equilibrium = [p] { return goodwin_equilibrium(p); };
  m.uniqueness_argument =
      "e3 is the unique positive root of the strictly increasing polynomial "
      "a*b*g*s^(m+1) + a*b*g*s - 1";
  m.default_x0 = Vec3{0.1, 0.1, 0.1};
  return m;
}

Vec3 field_noyes_equilibrium(const FieldNoyesParams& p) {
  validate(p);
  const double b = 1.0 - p.f - p.q;
  const double root = std::sqrt(b * b + 4.0 * p.q * (1.0 + p.f));
  // Rationalized form when b < 0 avoids cancellation in b + root.
  const double e1 = b >= 0.0 ? (b + root) / (2.0 * p.q) : 2.0 * (1.0 + p.f) / (root - b);
  const double e2 = e1 * p.f / (1.0 + e1);
  return {e1, e2, e1};
}

double field_noyes_det_at_equilibrium(const FieldNoyesParams& p) {
  const double b = 1.0 - p.f - p.q;
  const Vec3 e = field_noyes_equilibrium(p);
  return -p.w * e[0] * std::sqrt(b * b + 4.0 * p.q * (1.0 + p.f));
}

SystemModel field_noyes(const FieldNoyesParams& p) {
  validate(p);
  SystemModel m;
  m.name = "field-noyes";
  m.params = {{"s", p.s}, {"q", p.q}, {"f", p.f}, {"w", p.w}};
  m.f = [p](const Vec3& x) -> Vec3 {
    return {p.s * (x[1] - x[0] * x[1] + x[0] - p.q * x[0] * x[0]),
            (x[2] * p.f - x[1] - x[0] * x[1]) / p.s, p.w * (x[0] - x[2])};
  };
  m.jac = [p](const Vec3& x) -> Mat3 {
    return {{{p.s * (1.0 - x[1] - 2.0 * p.q * x[0]), p.s * (1.0 - x[0]), 0.0},
             {-x[1] / p.s, -(1.0 + x[0]) / p.s, p.f / p.s},
             {p.w, 0.0, -p.w}}};
  };
  m.box = {{1.0, p.q * p.f / (1.0 + p.q), 1.0}, {1.0 / p.q, p.f / (2.0 * p.q), 1.0 / p.q}};
  m.sign_certificate = SignPattern{{Sign::Any, Sign::NonPos, Sign::Zero},
                                   {Sign::NonPos, Sign::Any, Sign::NonNeg},
                                   {Sign::NonNeg, Sign::Zero, Sign::Any}};
  // diag(1,-1,-1) J diag(1,-1,-1) has the 2-positivity pattern.
  m.signature = {1.0, -1.0, -1.0};
  m.equilibrium = [p] { return field_noyes_equilibrium(p); };
  m.uniqueness_argument =
      "the only nonzero equilibrium in the nonnegative orthant is given in closed form; the "
      "other equilibrium is the origin, outside the box";
  m.default_x0 = Vec3{732.2670, 9.9795, 732.2670};
  if (p.q >= 0.01)
    m.warnings.push_back("q = " + std::to_string(p.q) +
                         " is not small; the invariant box assumes q << 1");
  return m;
}

std::optional<Vec3> newton_equilibrium(const SystemModel& model, Vec3 x, double tol,
                                       int max_iter) {
  for (int it = 0; it < max_iter; ++it) {
    const Vec3 fx = model.f(x);
    if (!std::isfinite(norm_inf(fx))) return std::nullopt;
    const double scale = std::max(1.0, norm_inf(x));
    if (norm_inf(fx) <= tol * scale) return x;
    Mat3 inv;
    try {
      inv = inverse3(model.jac(x));
    } catch (const std::domain_error&) {
      return std::nullopt;
    }
    const Vec3 step = inv * fx;
    // Damped step: halve until the residual drops.
    double t = 1.0;
    Vec3 next = x - step;
    for (int k = 0; k < 30 && !(norm_inf(model.f(next)) < norm_inf(fx)); ++k) {
      t *= 0.5;
      next = x - t * step;
    }
    x = next;
  }
  const double scale = std::max(1.0, norm_inf(x));
  if (norm_inf(model.f(x)) <= tol * scale) return x;
  return std::nullopt;
}

}  // namespace coop2
