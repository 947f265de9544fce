// Checks the hypotheses of the periodic-orbit convergence theorem for 3D
// strongly 2-cooperative systems, and builds the equilibrium-free invariant
// set inside the union of the six "low sign variation" sub-boxes.
//
// All set-level constants are sampled on grids. The resulting certificate
// is numerical at the stated grid resolution, not a proof.
#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "coop2/mat3.hpp"
#include "coop2/models.hpp"

namespace coop2 {

/// The box B split into eight closed sub-boxes by the equilibrium e. The
/// sub-box of a point is determined by the signs of d = signature * (x - e):
///   B1 (-,-,-)  B2 (+,-,-)  B3 (+,+,-)  B4 (+,+,+)
///   B5 (-,+,+)  B6 (-,-,+)  B7 (+,-,+)  B8 (-,+,-)
struct BoxPartition {
  Box3 box;
  Vec3 e{};
  Vec3 signature{1.0, 1.0, 1.0};

  static constexpr std::array<std::array<int, 3>, 8> kOrthants{{{-1, -1, -1},
                                                                {+1, -1, -1},
                                                                {+1, +1, -1},
                                                                {+1, +1, +1},
                                                                {-1, +1, +1},
                                                                {-1, -1, +1},
                                                                {+1, -1, +1},
                                                                {-1, +1, -1}}};

  /// Displacement in the sign-variation coordinates, snapped at tol.
  Vec3 displacement(const Vec3& x, double tol = 1e-12) const;
  /// Bit k-1 is set iff x lies in the closed sub-box B_k.
  std::uint8_t membership(const Vec3& x) const;
  /// Sup-norm distance from x to B1 u ... u B6 (0 inside).
  double distance_to_b16(const Vec3& x) const;
};

/// Throws std::invalid_argument unless e lies in the interior of b.
BoxPartition partition(const Box3& b, const Vec3& e, const Vec3& signature = {1.0, 1.0, 1.0});

/// x in B and s^-(d) <= 1, with d snapped at 1e-12.
bool b16_contains(const BoxPartition& part, const Vec3& x);
/// x in B1 u ... u B6, tested box by box on the same snapped displacement.
bool b16_contains_union(const BoxPartition& part, const Vec3& x);

enum class Conclusion { Certified, Refuted, Inconclusive };
std::string to_string(Conclusion c);

struct CertificationReport {
  std::string model_name;
  std::size_t grid_n = 0;
  /// Fraction of interior grid points where the Jacobian conforms to the
  /// model's sign certificate (to the 2-positivity pattern when absent).
  double pattern_ok = 0.0;
  /// Same for diag(signature) J diag(signature) against the 2-positivity pattern.
  double a2_pattern_ok = 0.0;
  double irreducible_ok = 0.0;
  Vec3 equilibrium{};
  double equilibrium_residual = 0.0;
  bool equilibrium_interior = false;
  bool unique_in_box = false;
  std::string uniqueness_method;
  Mat3 jacobian_at_e{};
  CharPoly3 charpoly;
  std::array<std::complex<double>, 3> eigenvalues{};
  RouthVerdict routh = RouthVerdict::Marginal;
  double det = 0.0;
  bool det_negative = false;
  /// All 2x2 minors of exp of the transformed Jacobian at e are positive.
  bool exp_minors_positive = false;
  /// Spectral data of diag(signature) J(e) diag(signature).
  std::optional<Spectrum3> spectrum;
  std::optional<BlockSchur3> schur;
  Conclusion conclusion = Conclusion::Inconclusive;
  std::string reason;
  std::vector<std::string> notes;
};

struct CertifyOptions {
  std::size_t grid_n = 12;
  std::size_t workers = 0;  // 0: worker_count()
};

/// Throws std::invalid_argument when grid_n < 5.
CertificationReport check_theorem(const SystemModel& model, const CertifyOptions& opts = {});

struct InvariantSetCert {
  double xi = 0.0;
  double M = 0.0;
  double M_grid = 0.0;      // grid part of M
  double M_hessian = 0.0;   // second-order Taylor part of M at the equilibrium
  double kappa = 0.0;
  double M_prime = 0.0;
  double eta_star = 0.0;
  double eta = 0.0;
  /// Largest sampled |s| / V^(3/2) over the B16 grid; bounded by M_prime.
  double s_ratio_max = 0.0;
  /// H_eta excludes the ball of this radius around e.
  double exclusion_radius = 0.0;
  std::size_t grid_n = 0;
  std::string grid_resolution;

  Vec3 e{};
  Vec3 signature{1.0, 1.0, 1.0};
  Mat3 T_inv{};

  /// Transformed coordinates q = inv(T) * signature * (x - e).
  Vec3 q_of(const Vec3& x) const;
  /// V = (q2^2 + q3^2) / 2.
  double V(const Vec3& x) const;
};

/// Throws std::invalid_argument unless report.conclusion is Certified, and
/// std::runtime_error("angle margin not established ...") when xi <= 0.
InvariantSetCert construct_invariant_set(const SystemModel& model, const CertificationReport& report,
                                         std::size_t grid_n, double eta_fraction = 0.5,
                                         std::size_t workers = 0);

enum class StartStatus { Valid, Excluded, OutsideClaim };

struct InvarianceReport {
  std::size_t n_traj = 0;           // valid starts integrated
  std::size_t n_excluded = 0;       // starts at e or with V <= eta
  std::size_t n_outside = 0;        // starts outside B16
  std::size_t n_excursions = 0;     // trajectories leaving B16 by more than tol
  std::size_t n_v_violations = 0;   // trajectories with V <= eta (1 - v_tol)
  std::size_t n_integration_failures = 0;
  double max_excursion = 0.0;
  double min_V = 0.0;
  double min_V_over_eta = 0.0;
  double min_distance_to_e = 0.0;
  std::vector<StartStatus> statuses;
  bool ok() const {
    return n_excursions == 0 && n_v_violations == 0 && n_integration_failures == 0;
  }
};

StartStatus classify_start(const BoxPartition& part, const InvariantSetCert& cert, const Vec3& x);

struct InvarianceOptions {
  double horizon = 500.0;
  double tol = 1e-6;     // allowed excursion outside B16
  double v_tol = 1e-3;   // relative slack on V > eta
  double rtol = 1e-10;
  double atol = 1e-12;
  std::size_t workers = 0;
};

/// Integrates from the given starts; only Valid starts are checked.
InvarianceReport verify_invariance(const SystemModel& model, const BoxPartition& part,
                                   const InvariantSetCert& cert, const std::vector<Vec3>& starts,
                                   const InvarianceOptions& opts = {});

/// Draws n_traj uniform starts in H_eta (rejection sampling with the given
/// seed) and verifies them.
InvarianceReport verify_invariance(const SystemModel& model, const BoxPartition& part,
                                   const InvariantSetCert& cert, std::size_t n_traj,
                                   std::uint64_t seed, const InvarianceOptions& opts = {});

/// Uniform samples of H_eta by rejection; throws std::runtime_error if the
/// acceptance rate is too low.
std::vector<Vec3> sample_h_eta(const BoxPartition& part, const InvariantSetCert& cert,
                               std::size_t n, std::uint64_t seed);

}  // namespace coop2
