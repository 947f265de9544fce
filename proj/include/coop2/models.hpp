// Three-dimensional autonomous systems x' = f(x) together with the data the
// certification pipeline needs: Jacobian, invariant box, equilibrium.
#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "coop2/signpat.hpp"
#include "coop2/types.hpp"

namespace coop2 {

struct Box3 {
  Vec3 lower{};
  Vec3 upper{};

  Vec3 width() const { return upper - lower; }
  bool contains(const Vec3& x, double tol = 0.0) const;
  bool interior(const Vec3& x) const;
  /// Largest amount by which x lies outside the box (0 inside).
  double excursion(const Vec3& x) const;
};

struct SystemModel {
  std::string name;
  std::vector<std::pair<std::string, double>> params;
  std::function<Vec3(const Vec3&)> f;
  std::function<Mat3(const Vec3&)> jac;
  Box3 box;
  /// Sign pattern the Jacobian is claimed to have on int(box).
  std::optional<SignPattern> sign_certificate;
  /// Diagonal +-1 matrix d such that diag(d) J diag(d) has the 2-positivity
  /// pattern. Sign variations of state differences are counted on d * z.
  Vec3 signature{1.0, 1.0, 1.0};
  /// Dedicated equilibrium routine; empty for generic models.
  std::function<Vec3()> equilibrium;
  /// Analytic argument for uniqueness of the equilibrium in the box, empty
  /// when uniqueness must be searched for numerically.
  std::string uniqueness_argument;
  std::optional<Vec3> default_x0;
  std::vector<std::string> warnings;

  double param(const std::string& key) const;
};

/// Central differences with h = 1e-6 (1 + |x_i|).
Mat3 numeric_jacobian(const std::function<Vec3(const Vec3&)>& f, const Vec3& x);

struct GoodwinParams {
  double alpha = 0.5;
  double beta = 0.4;
  double gamma = 0.6;
  int m = 10;
};

struct FieldNoyesParams {
  double s = 0.3;
  double q = 8.375e-6;
  double f = 1.0;
  double w = 0.2934;
};

/// Throws std::invalid_argument on non-positive rates or m < 1.
SystemModel goodwin(const GoodwinParams& p);
/// Unique positive root e3 of a b g s^(m+1) + a b g s - 1, with
/// e = (b g e3, g e3, e3).
Vec3 goodwin_equilibrium(const GoodwinParams& p);

/// Throws std::invalid_argument on non-positive constants. Warns (via
/// SystemModel::warnings) when q >= 0.01.
SystemModel field_noyes(const FieldNoyesParams& p);
Vec3 field_noyes_equilibrium(const FieldNoyesParams& p);
/// Closed form of det J(e): -w e1 sqrt((1-f-q)^2 + 4q(1+f)).
double field_noyes_det_at_equilibrium(const FieldNoyesParams& p);

/// Newton iteration on f with the model Jacobian. Returns std::nullopt when
/// it fails to converge to ||f|| <= tol.
std::optional<Vec3> newton_equilibrium(const SystemModel& model, Vec3 x0, double tol = 1e-11,
                                       int max_iter = 60);

}  // namespace coop2
