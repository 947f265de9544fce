#include "coop2/sim.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "coop2/signvar.hpp"

namespace coop2 {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// Difference between the 5th- and 4th-order weights.
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

double rms_norm(const Vec3& v, const Vec3& scale) {
  double s = 0.0;
  for (std::size_t i = 0; i < 3; ++i) {
    const double r = v[i] / scale[i];
    s += r * r;
  }
  return std::sqrt(s / 3.0);
}

}  // namespace

Vec3 Step::at(double t) const {
  const double h = t1 - t0;
  if (h == 0.0) return x1;
  const double s = (t - t0) / h;
  const double s2 = s * s, s3 = s2 * s;
  const double h00 = 2 * s3 - 3 * s2 + 1, h10 = s3 - 2 * s2 + s;
  const double h01 = -2 * s3 + 3 * s2, h11 = s3 - s2;
  Vec3 out{};
  for (std::size_t i = 0; i < 3; ++i)
    out[i] = h00 * x0[i] + h10 * h * f0[i] + h01 * x1[i] + h11 * h * f1[i];
  return out;
}

IntegrationStats integrate_steps(const SystemModel& model, const Vec3& x_start, double t0,
                                 double t_end, const IntegrateOptions& opts,
                                 const std::function<bool(const Step&)>& observer) {
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0))
    throw std::invalid_argument("integrate: rtol and atol must be positive");
  IntegrationStats stats;
  stats.t_final = t0;
  stats.x_final = x_start;
  if (!(t_end > t0)) return stats;

  const Vec3 atol_scale = opts.atol_scale.value_or(Vec3{1.0, 1.0, 1.0});
  const Vec3 atol = opts.atol * atol_scale;
  const auto& f = model.f;

  auto scale_of = [&](const Vec3& a, const Vec3& b) {
    Vec3 s{};
    for (std::size_t i = 0; i < 3; ++i)
      s[i] = atol[i] + opts.rtol * std::max(std::fabs(a[i]), std::fabs(b[i]));
    return s;
  };

  double t = t0;
  Vec3 x = x_start;
  Vec3 k1 = f(x);

  // Initial step (Hairer, Norsett & Wanner, II.4).
  double h;
  {
    const Vec3 sc = scale_of(x, x);
    const double d0 = rms_norm(x, sc), d1 = rms_norm(k1, sc);
    const double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    const Vec3 x1 = x + h0 * k1;
    const double d2 = rms_norm(f(x1) - k1, sc) / h0;
    const double dm = std::max(d1, d2);
    const double h1 = dm <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / dm, 0.2);
    h = std::min(100.0 * h0, h1);
  }

  const double h_min = 1e-14 * std::fabs(t_end);
  bool last_rejected = false;
  while (t < t_end) {
    if (stats.accepted + stats.rejected >= opts.max_steps)
      throw StiffnessError("integrate: step budget exhausted at t = " + std::to_string(t), t, x);
    if (h < h_min)
      throw StiffnessError("integrate: step size underflow at t = " + std::to_string(t) +
                               "; the system is too stiff for the explicit integrator (reduce "
                               "t_end or rescale the box)",
                           t, x);
    if (t + h > t_end) h = t_end - t;

    const Vec3 k2 = f(x + (h * a21) * k1);
    const Vec3 k3 = f(x + h * (a31 * k1 + a32 * k2));
    const Vec3 k4 = f(x + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vec3 k5 = f(x + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vec3 k6 = f(x + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    const Vec3 x_new = x + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vec3 k7 = f(x_new);
    const Vec3 err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double en = rms_norm(err, scale_of(x, x_new));
    if (!std::isfinite(en)) en = 1e10;

    if (en <= 1.0) {
      const double t_new = (t + h >= t_end || t_end - (t + h) < h_min) ? t_end : t + h;
      if (opts.check_box) {
        // excess over the allowed 10 atol_i, positive once the state is out
        auto excess = [&](const Vec3& y) {
          double w = -std::numeric_limits<double>::infinity();
          for (std::size_t i = 0; i < 3; ++i)
            w = std::max(w, std::max(model.box.lower[i] - y[i], y[i] - model.box.upper[i]) - 10.0 * atol[i]);
          return w;
        };
        stats.max_box_excursion = std::max(stats.max_box_excursion, model.box.excursion(x_new));
        if (excess(x_new) > 0.0) {
          // clip at the crossing on the dense output
          const Step full{t, t_new, x, x_new, k1, k7};
          double lo = t, hi = t_new;
          for (int it = 0; it < 100 && hi - lo > 1e-12 * std::max(1.0, std::fabs(hi)); ++it) {
            const double mid = 0.5 * (lo + hi);
            (excess(full.at(mid)) > 0.0 ? hi : lo) = mid;
          }
          const Vec3 x_exit = full.at(hi);
          stats.left_box = true;
          stats.exit_time = hi;
          ++stats.accepted;
          stats.t_final = hi;
          stats.x_final = x_exit;
          observer(Step{t, hi, x, x_exit, k1, f(x_exit)});
          break;
        }
      }
      Step step{t, t_new, x, x_new, k1, k7};
      ++stats.accepted;
      t = t_new;
      x = x_new;
      k1 = k7;
      stats.t_final = t;
      stats.x_final = x;
      if (!observer(step)) break;
      double fac = 0.9 * std::pow(std::max(en, 1e-10), -0.2);
      fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 5.0);
      h *= fac;
      last_rejected = false;
    } else {
      ++stats.rejected;
      h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
      last_rejected = true;
    }
  }
  return stats;
}

Trajectory integrate(const SystemModel& model, const Vec3& x0, double t_end,
                     const IntegrateOptions& opts) {
  if (!(opts.rtol > 0.0) || !(opts.atol > 0.0))
    throw std::invalid_argument("integrate: rtol and atol must be positive");
  if (!(t_end >= 0.0)) throw std::invalid_argument("integrate: t_end must be non-negative");
  if (!model.box.contains(x0))
    throw std::invalid_argument("integrate: initial state lies outside the model box");
  Trajectory traj;
  traj.rtol = opts.rtol;
  traj.atol = opts.atol;
  if (t_end == 0.0) return traj;

  if (opts.uniform_samples == 0) {
    traj.times.push_back(0.0);
    traj.states.push_back(x0);
    traj.stats = integrate_steps(model, x0, 0.0, t_end, opts, [&](const Step& s) {
      traj.times.push_back(s.t1);
      traj.states.push_back(s.x1);
      return true;
    });
    return traj;
  }

  const std::size_t n = std::max<std::size_t>(opts.uniform_samples, 2);
  auto sample_time = [&](std::size_t k) {
    return k + 1 == n ? t_end : t_end * static_cast<double>(k) / static_cast<double>(n - 1);
  };
  traj.times.reserve(n);
  traj.states.reserve(n);
  traj.times.push_back(0.0);
  traj.states.push_back(x0);
  std::size_t next = 1;
  traj.stats = integrate_steps(model, x0, 0.0, t_end, opts, [&](const Step& s) {
    while (next < n && sample_time(next) <= s.t1) {
      const double ts = sample_time(next);
      traj.times.push_back(ts);
      traj.states.push_back(ts == s.t1 ? s.x1 : s.at(ts));
      ++next;
    }
    return true;
  });
  return traj;
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const Trajectory& traj) {
  os << "t,x1,x2,x3\n";
  for (std::size_t i = 0; i < traj.times.size(); ++i) {
    const Vec3& x = traj.states[i];
    os << format_double(traj.times[i]) << ',' << format_double(x[0]) << ','
       << format_double(x[1]) << ',' << format_double(x[2]) << '\n';
  }
}

PeriodEstimate detect_orbit(const SystemModel& model, const Vec3& x0, const OrbitOptions& opts) {
  if (opts.section_coord > 2) throw std::invalid_argument("detect_orbit: section_coord must be 0..2");
  if (opts.k < 1) throw std::invalid_argument("detect_orbit: k must be >= 1");
  const std::size_t c = opts.section_coord;
  double level = opts.section_value;
  if (std::isnan(level)) {
    if (!model.equilibrium)
      throw std::invalid_argument(
          "detect_orbit: model has no equilibrium routine; give the section level explicitly");
    level = model.equilibrium()[c];
  }

  IntegrateOptions iopts;
  iopts.rtol = opts.rtol;
  iopts.atol = opts.atol;
  iopts.atol_scale = opts.atol_scale;

  std::vector<double> times;
  std::vector<Vec3> points;
  std::vector<Vec3> cycle_amp;  // amplitude of the cycle ending at each return
  Vec3 lo{x0}, hi{x0};

  integrate_steps(model, x0, 0.0, opts.horizon, iopts, [&](const Step& s) {
    const double g0 = s.x0[c] - level, g1 = s.x1[c] - level;
    if (g0 < 0.0 && g1 >= 0.0) {
      double a = s.t0, b = s.t1;
      for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        (s.at(mid)[c] - level < 0.0 ? a : b) = mid;
      }
      const double tc = 0.5 * (a + b);
      Vec3 p = s.at(tc);
      p[c] = level;
      // Close the current cycle at the crossing.
      for (std::size_t i = 0; i < 3; ++i) {
        lo[i] = std::min(lo[i], p[i]);
        hi[i] = std::max(hi[i], p[i]);
      }
      times.push_back(tc);
      points.push_back(p);
      cycle_amp.push_back(hi - lo);
      lo = p;
      hi = p;
    }
    for (std::size_t i = 0; i < 3; ++i) {
      lo[i] = std::min(lo[i], s.x1[i]);
      hi[i] = std::max(hi[i], s.x1[i]);
    }
    return true;
  });

  PeriodEstimate est;
  est.return_times = times;
  est.return_points = points;

  // Transient: ends at the first return whose two preceding full cycles have
  // amplitudes agreeing to 1% in every coordinate, capped by the fraction.
  double t_trans = opts.transient_fraction * opts.horizon;
  for (std::size_t r = 2; r < times.size(); ++r) {
    bool same = true;
    for (std::size_t i = 0; i < 3; ++i) {
      const double a0 = cycle_amp[r - 1][i], a1 = cycle_amp[r][i];
      if (std::fabs(a1 - a0) > 0.01 * std::max(std::fabs(a0), std::fabs(a1))) same = false;
    }
    if (same) {
      t_trans = std::min(t_trans, times[r]);
      break;
    }
  }
  est.transient_skipped = t_trans;

  std::size_t first = 0;
  while (first < times.size() && times[first] < t_trans) ++first;
  est.n_returns = times.size() - first;
  if (est.n_returns < opts.k + 2) {
    est.diagnostics = "only " + std::to_string(est.n_returns) +
                      " section returns after the transient (need " + std::to_string(opts.k + 2) +
                      "); the solution may be converging to the equilibrium or the horizon is "
                      "too short";
    return est;
  }

  const std::size_t n = times.size();
  const std::size_t begin = n - (opts.k + 1);
  std::vector<double> intervals;
  for (std::size_t j = begin; j + 1 < n; ++j) intervals.push_back(times[j + 1] - times[j]);
  double mean = 0.0;
  for (double d : intervals) mean += d;
  mean /= static_cast<double>(intervals.size());
  double var = 0.0;
  for (double d : intervals) var += (d - mean) * (d - mean);
  const double kk = static_cast<double>(intervals.size());
  est.period = mean;
  est.period_stderr = kk > 1 ? std::sqrt(var / (kk - 1.0) / kk) : 0.0;

  double closure = 0.0;
  for (std::size_t j = begin; j + 1 < n; ++j)
    closure = std::max(closure, norm_inf(points[j + 1] - points[j]));
  double diameter = 0.0;
  for (std::size_t j = begin + 1; j < n; ++j)
    for (std::size_t i = 0; i < 3; ++i) diameter = std::max(diameter, cycle_amp[j][i]);
  est.closure_distance = closure;
  est.orbit_diameter = diameter;
  est.abs_tol = opts.closure_tol * diameter;

  const auto [mn, mx] = std::minmax_element(intervals.begin(), intervals.end());
  const bool time_ok = (*mx - *mn) <= opts.rel_tol * mean;
  const bool closure_ok = closure <= est.abs_tol;
  const bool amplitude_ok = diameter > opts.min_amplitude * std::max(1.0, norm_inf(points.back()));
  est.converged = time_ok && closure_ok && amplitude_ok;
  if (!amplitude_ok)
    est.diagnostics = "orbit amplitude collapsed; the solution is converging to the equilibrium";
  else if (!closure_ok)
    est.diagnostics = "return points not yet closed (spread " + format_double(closure) +
                      " > " + format_double(est.abs_tol) + ")";
  else if (!time_ok)
    est.diagnostics = "return times not yet stationary";
  return est;
}

std::vector<SignSample> pair_sign_variation_series(const SystemModel& model, const Vec3& a,
                                                   const Vec3& b, double t_end,
                                                   std::size_t n_samples,
                                                   const IntegrateOptions& opts) {
  IntegrateOptions o = opts;
  o.uniform_samples = std::max<std::size_t>(n_samples, 2);
  const Trajectory ta = integrate(model, a, t_end, o);
  const Trajectory tb = integrate(model, b, t_end, o);
  const std::size_t n = std::min(ta.times.size(), tb.times.size());
  std::vector<SignSample> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec3 z = hadamard(model.signature, ta.states[i] - tb.states[i]);
    // A difference is only trusted beyond the integration error of its own component.
    std::vector<double> zs(z.begin(), z.end());
    for (std::size_t j = 0; j < 3; ++j) {
      const double scale = std::max(std::fabs(ta.states[i][j]), std::fabs(tb.states[i][j]));
      const double err = o.rtol * scale + o.atol * (o.atol_scale ? (*o.atol_scale)[j] : 1.0);
      if (std::fabs(zs[j]) <= 10.0 * err) zs[j] = 0.0;
    }
    out.push_back({ta.times[i], s_minus(zs), s_plus(zs)});
  }
  return out;
}

}  // namespace coop2
