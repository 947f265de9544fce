// Adaptive Dormand-Prince 5(4) integration with Hermite dense output, and
// periodic-orbit detection on a Poincare section.
#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "coop2/models.hpp"

namespace coop2 {

struct IntegrateOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  /// Per-component multiplier of atol; defaults to all ones.
  std::optional<Vec3> atol_scale;
  /// 0: record every accepted step; n >= 2: n uniform samples on [0, t_end].
  std::size_t uniform_samples = 0;
  /// Stop and flag when the state leaves model.box by more than 10 atol_i.
  bool check_box = true;
  std::size_t max_steps = 50'000'000;
};

/// One accepted step with its cubic Hermite interpolant.
struct Step {
  double t0 = 0.0, t1 = 0.0;
  Vec3 x0{}, x1{}, f0{}, f1{};
  Vec3 at(double t) const;
};

struct IntegrationStats {
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  bool left_box = false;
  double exit_time = std::numeric_limits<double>::quiet_NaN();
  double max_box_excursion = 0.0;
  double t_final = 0.0;
  Vec3 x_final{};
};

/// Step size fell below 1e-14 * t_end (or the step budget ran out).
class StiffnessError : public std::runtime_error {
 public:
  StiffnessError(const std::string& what, double t, const Vec3& x)
      : std::runtime_error(what), t_(t), x_(x) {}
  double time() const { return t_; }
  const Vec3& state() const { return x_; }

 private:
  double t_;
  Vec3 x_;
};

/// Integrates from (t0, x0) to t_end, handing every accepted step to the
/// observer; integration stops early when the observer returns false.
IntegrationStats integrate_steps(const SystemModel& model, const Vec3& x0, double t0,
                                 double t_end, const IntegrateOptions& opts,
                                 const std::function<bool(const Step&)>& observer);

struct Trajectory {
  std::vector<double> times;
  std::vector<Vec3> states;
  IntegrationStats stats;
  double rtol = 0.0;
  double atol = 0.0;
};

/// Throws std::invalid_argument when x0 lies outside the model box or a
/// tolerance is not positive; StiffnessError on step-size underflow.
/// t_end == 0 yields an empty trajectory.
Trajectory integrate(const SystemModel& model, const Vec3& x0, double t_end,
                     const IntegrateOptions& opts = {});

/// Header "t,x1,x2,x3", shortest round-trip decimal formatting.
void write_csv(std::ostream& os, const Trajectory& traj);
/// Shortest round-trip decimal representation.
std::string format_double(double v);

struct OrbitOptions {
  double horizon = 2000.0;
  /// Coordinate (0-based) whose level set is the section.
  std::size_t section_coord = 1;
  /// Section level; NaN selects the equilibrium coordinate.
  double section_value = std::numeric_limits<double>::quiet_NaN();
  std::size_t k = 5;
  /// Return-point spread tolerance, relative to the orbit diameter.
  double closure_tol = 1e-4;
  /// Return-time spread tolerance, relative to the period.
  double rel_tol = 1e-4;
  /// Upper bound on the transient, as a fraction of the horizon.
  double transient_fraction = 0.5;
  /// Amplitude floor below which the orbit is treated as collapsed onto the
  /// equilibrium, relative to max(1, |section point|).
  double min_amplitude = 1e-6;
  double rtol = 1e-10;
  double atol = 1e-12;
  std::optional<Vec3> atol_scale;
};

struct PeriodEstimate {
  double period = 0.0;
  double period_stderr = 0.0;
  double closure_distance = 0.0;  // max gap between consecutive returns
  double abs_tol = 0.0;           // closure tolerance actually applied
  double orbit_diameter = 0.0;
  std::size_t n_returns = 0;      // returns after the transient
  bool converged = false;
  double transient_skipped = 0.0;
  std::vector<double> return_times;
  std::vector<Vec3> return_points;
  std::string diagnostics;
};

/// Upward crossings (increasing section coordinate) of the section plane,
/// with crossing times refined by bisection on the dense output to 1e-10.
PeriodEstimate detect_orbit(const SystemModel& model, const Vec3& x0, const OrbitOptions& opts = {});

struct SignSample {
  double t = 0.0;
  std::size_t s_minus = 0;
  std::size_t s_plus = 0;
};

/// Sign variations of signature * (x(t,a) - x(t,b)) at n_samples uniform
/// times on [0, t_end]. Component j counts as zero when it lies within
/// 10 (rtol |x_j| + atol_j) of zero.
std::vector<SignSample> pair_sign_variation_series(const SystemModel& model, const Vec3& a,
                                                   const Vec3& b, double t_end,
                                                   std::size_t n_samples,
                                                   const IntegrateOptions& opts = {});

}  // namespace coop2
