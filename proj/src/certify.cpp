#include "coop2/certify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

#include "coop2/parallel.hpp"
#include "coop2/signpat.hpp"
#include "coop2/signvar.hpp"
#include "coop2/sim.hpp"

namespace coop2 {

Vec3 BoxPartition::displacement(const Vec3& x, double tol) const {
  Vec3 d = hadamard(signature, x - e);
  for (double& v : d)
    if (std::fabs(v) <= tol) v = 0.0;
  return d;
}

std::uint8_t BoxPartition::membership(const Vec3& x) const {
  const Vec3 d = displacement(x);
  std::uint8_t bits = 0;
  for (std::size_t k = 0; k < 8; ++k) {
    bool in = true;
    for (std::size_t i = 0; i < 3; ++i) {
      if (kOrthants[k][i] > 0 ? d[i] < 0.0 : d[i] > 0.0) in = false;
    }
    if (in) bits |= static_cast<std::uint8_t>(1U << k);
  }
  return bits;
}

double BoxPartition::distance_to_b16(const Vec3& x) const {
  const double box_gap = box.excursion(x);
  const Vec3 d = hadamard(signature, x - e);
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < 6; ++k) {
    double gap = 0.0;
    for (std::size_t i = 0; i < 3; ++i)
      gap = std::max(gap, kOrthants[k][i] > 0 ? -d[i] : d[i]);
    best = std::min(best, gap);
  }
  return std::max(best, box_gap);
}

BoxPartition partition(const Box3& b, const Vec3& e, const Vec3& signature) {
  if (!b.interior(e))
    throw std::invalid_argument("partition: equilibrium is not in the interior of the box");
  return {b, e, signature};
}

bool b16_contains(const BoxPartition& part, const Vec3& x) {
  if (!part.box.contains(x)) return false;
  return s_minus(part.displacement(x)) <= 1;
}

bool b16_contains_union(const BoxPartition& part, const Vec3& x) {
  if (!part.box.contains(x)) return false;
  return (part.membership(x) & 0x3F) != 0;
}

std::string to_string(Conclusion c) {
  switch (c) {
    case Conclusion::Certified: return "Certified";
    case Conclusion::Refuted: return "Refuted";
    case Conclusion::Inconclusive: return "Inconclusive";
  }
  return "?";
}

namespace {

Vec3 grid_point(const Box3& b, std::size_t i, std::size_t j, std::size_t k, std::size_t div,
                std::size_t offset) {
  const double n = static_cast<double>(div);
  const Vec3 w = b.width();
  return {b.lower[0] + w[0] * static_cast<double>(i + offset) / n,
          b.lower[1] + w[1] * static_cast<double>(j + offset) / n,
          b.lower[2] + w[2] * static_cast<double>(k + offset) / n};
}

// Distinct equilibria found by damped Newton from interior grid seeds.
std::vector<Vec3> search_equilibria(const SystemModel& model, std::size_t grid_n,
                                    std::size_t workers) {
  const std::size_t n3 = grid_n * grid_n * grid_n;
  std::vector<std::optional<Vec3>> found(n3);
  parallel_for(
      n3,
      [&](std::size_t idx) {
        const std::size_t i = idx / (grid_n * grid_n), j = (idx / grid_n) % grid_n, k = idx % grid_n;
        const Vec3 seed = grid_point(model.box, i, j, k, grid_n + 1, 1);
        auto root = newton_equilibrium(model, seed);
        if (root && model.box.contains(*root, 1e-9 * std::max(1.0, norm_inf(*root))))
          found[idx] = root;
      },
      workers);
  std::vector<Vec3> distinct;
  for (const auto& r : found) {
    if (!r) continue;
    const bool seen = std::any_of(distinct.begin(), distinct.end(), [&](const Vec3& d) {
      return norm_inf(d - *r) <= 1e-6 * std::max(1.0, norm_inf(d));
    });
    if (!seen) distinct.push_back(*r);
  }
  return distinct;
}

}  // namespace

CertificationReport check_theorem(const SystemModel& model, const CertifyOptions& opts) {
  if (opts.grid_n < 5) throw std::invalid_argument("check_theorem: grid_n must be >= 5");
  CertificationReport rep;
  rep.model_name = model.name;
  rep.grid_n = opts.grid_n;
  const std::size_t g = opts.grid_n;
  const SignPattern a2 = pattern_A2(3);
  const SignPattern& cert = model.sign_certificate ? *model.sign_certificate : a2;

  // (a), (b): sign pattern and irreducibility on a strictly interior grid.
  const std::size_t n3 = g * g * g;
  std::vector<std::array<char, 3>> flags(n3);
  parallel_for(
      n3,
      [&](std::size_t idx) {
        const std::size_t i = idx / (g * g), j = (idx / g) % g, k = idx % g;
        const Mat3 jx = model.jac(grid_point(model.box, i, j, k, g + 1, 1));
        flags[idx] = {static_cast<char>(conforms(jx, cert, 0.0)),
                      static_cast<char>(conforms(conjugate_signature(jx, model.signature), a2, 0.0)),
                      static_cast<char>(is_irreducible(jx, 0.0))};
      },
      opts.workers);
  std::size_t ok_cert = 0, ok_a2 = 0, ok_irr = 0;
  for (const auto& f : flags) {
    ok_cert += f[0];
    ok_a2 += f[1];
    ok_irr += f[2];
  }
  const double total = static_cast<double>(n3);
  rep.pattern_ok = ok_cert / total;
  rep.a2_pattern_ok = ok_a2 / total;
  rep.irreducible_ok = ok_irr / total;
  for (const auto& w : model.warnings) rep.notes.push_back(w);

  // (c), (d): equilibrium and its uniqueness in the box.
  bool have_e = false;
  if (model.equilibrium) {
    rep.equilibrium = model.equilibrium();
    have_e = true;
    rep.unique_in_box = !model.uniqueness_argument.empty();
    rep.uniqueness_method = rep.unique_in_box ? "analytic: " + model.uniqueness_argument
                                              : "not established";
  } else {
    const auto roots = search_equilibria(model, g, opts.workers);
    std::ostringstream os;
    os << "numerical: damped Newton from " << n3 << " interior seeds found " << roots.size()
       << " distinct equilibria in the box";
    rep.uniqueness_method = os.str();
    rep.unique_in_box = roots.size() == 1;
    if (!roots.empty()) {
      rep.equilibrium = roots.front();
      have_e = true;
    }
    if (roots.size() > 1) {
      rep.conclusion = Conclusion::Refuted;
      rep.reason = "unique_equilibrium=false: " + rep.uniqueness_method;
    }
  }

  auto finish = [&](Conclusion c, std::string reason) {
    if (rep.reason.empty()) {
      rep.conclusion = c;
      rep.reason = std::move(reason);
    }
    return rep;
  };

  if (!have_e) return finish(Conclusion::Inconclusive, "no equilibrium found in the box");
  rep.equilibrium_residual = norm_inf(model.f(rep.equilibrium));
  rep.equilibrium_interior = model.box.interior(rep.equilibrium);

  // (e), (f), (g): local analysis at e.
  rep.jacobian_at_e = model.jac(rep.equilibrium);
  const Mat3 a = conjugate_signature(rep.jacobian_at_e, model.signature);
  rep.charpoly = charpoly3(rep.jacobian_at_e);
  rep.eigenvalues = cubic_roots(rep.charpoly);
  rep.routh = routh_classify(rep.charpoly);
  rep.det = det3(rep.jacobian_at_e);
  rep.det_negative = rep.det < 0.0;
  rep.exp_minors_positive = verify_strong_2positive_minors(a);
  std::string spectral_error;
  try {
    rep.spectrum = classify_lemma1(a);
    rep.schur = block_schur3(a, *rep.spectrum);
  } catch (const SpectralError& err) {
    spectral_error = err.what();
  }

  if (rep.pattern_ok < 1.0)
    return finish(Conclusion::Refuted, "sign_pattern=false: Jacobian violates the sign certificate "
                                       "at some interior grid points");
  if (rep.a2_pattern_ok < 1.0)
    return finish(Conclusion::Refuted, "sign_pattern=false: transformed Jacobian violates the "
                                       "2-positivity pattern at some interior grid points");
  if (rep.irreducible_ok < 1.0)
    return finish(Conclusion::Refuted,
                  "irreducible=false: Jacobian is reducible at some interior grid points");
  if (!rep.equilibrium_interior)
    return finish(Conclusion::Refuted, "interior=false: equilibrium is not in the interior of the box");
  if (rep.equilibrium_residual > 1e-8 * std::max(1.0, norm_inf(rep.equilibrium)))
    return finish(Conclusion::Inconclusive, "equilibrium residual too large");
  if (!rep.unique_in_box)
    return finish(Conclusion::Inconclusive, "unique_equilibrium=unknown: " + rep.uniqueness_method);
  if (rep.routh == RouthVerdict::Hurwitz)
    return finish(Conclusion::Refuted, "unstable=false: characteristic polynomial is Hurwitz");
  if (rep.routh == RouthVerdict::Marginal)
    return finish(Conclusion::Inconclusive, "unstable=marginal: Routh test on the boundary");
  if (!rep.det_negative) return finish(Conclusion::Refuted, "det_negative=false");
  if (!spectral_error.empty()) return finish(Conclusion::Inconclusive, spectral_error);
  return finish(Conclusion::Certified, "all hypotheses verified");
}

Vec3 InvariantSetCert::q_of(const Vec3& x) const { return T_inv * hadamard(signature, x - e); }

double InvariantSetCert::V(const Vec3& x) const {
  const Vec3 q = q_of(x);
  return 0.5 * (q[1] * q[1] + q[2] * q[2]);
}

InvariantSetCert construct_invariant_set(const SystemModel& model, const CertificationReport& report,
                                         std::size_t grid_n, double eta_fraction,
                                         std::size_t workers) {
  if (report.conclusion != Conclusion::Certified || !report.schur)
    throw std::invalid_argument("construct_invariant_set: model is not certified");
  if (grid_n < 1) throw std::invalid_argument("construct_invariant_set: grid_n must be >= 1");
  if (!(eta_fraction > 0.0 && eta_fraction <= 1.0))
    throw std::invalid_argument("construct_invariant_set: eta_fraction must be in (0, 1]");

  const BlockSchur3& bs = *report.schur;
  InvariantSetCert cert;
  cert.grid_n = grid_n;
  cert.e = report.equilibrium;
  cert.signature = model.signature;
  cert.T_inv = bs.T_inv;
  const Mat3 lambda = bs.block();
  const BoxPartition part = partition(model.box, cert.e, model.signature);
  const Vec3& d = model.signature;

  // Face directions of each closed orthant: one coordinate equal to 1, the
  // others on the grid {0, 1/n, ..., 1}. Doubling n refines the sample.
  auto face_directions = [grid_n](const std::array<int, 3>& signs, auto&& visit) {
    const double n = static_cast<double>(grid_n);
    for (std::size_t face = 0; face < 3; ++face)
      for (std::size_t i = 0; i <= grid_n; ++i)
        for (std::size_t j = 0; j <= grid_n; ++j) {
          Vec3 v{};
          const std::size_t o1 = (face + 1) % 3, o2 = (face + 2) % 3;
          v[face] = 1.0;
          v[o1] = static_cast<double>(i) / n;
          v[o2] = static_cast<double>(j) / n;
          for (std::size_t c = 0; c < 3; ++c) v[c] *= signs[c];
          visit(v);
        }
  };
  auto abs_cos = [](const Vec3& q) { return std::fabs(q[0]) / norm2(q); };

  double max_cos = 0.0;
  for (std::size_t k = 0; k < 6; ++k)
    face_directions(BoxPartition::kOrthants[k],
                    [&](const Vec3& z) { max_cos = std::max(max_cos, abs_cos(bs.T_inv * z)); });

  // Second-order Taylor bound at the equilibrium: g(q) ~ (1/2) T^-1 D f''(e)[w, w].
  double m_hess = 0.0;
  const double eps_base = 1e-4 * std::max(1.0, norm_inf(cert.e));
  for (std::size_t k = 0; k < 8; ++k)
    face_directions(BoxPartition::kOrthants[k], [&](const Vec3& u_raw) {
      const Vec3 u = (1.0 / norm2(u_raw)) * u_raw;
      const Vec3 w = hadamard(d, bs.T * u);
      const double eps = eps_base / std::max(1e-300, norm_inf(w));
      const Mat3 dj = (1.0 / (2.0 * eps)) * (model.jac(cert.e + eps * w) - model.jac(cert.e - eps * w));
      const Vec3 second = bs.T_inv * hadamard(d, dj * w);
      m_hess = std::max(m_hess, 0.5 * norm_inf(second));
    });

  // Grid over the whole box: remainder bound M, plus the angle and |s|/V^1.5
  // samples at grid points of B16.
  const std::size_t np = grid_n + 1;
  struct Slice {
    double m = 0.0, cos = 0.0;
    std::vector<std::pair<double, double>> sv;  // (|s|, V) at B16 points
  };
  std::vector<Slice> slices(np);
  parallel_for(
      np,
      [&](std::size_t i) {
        Slice& sl = slices[i];
        for (std::size_t j = 0; j < np; ++j)
          for (std::size_t k = 0; k < np; ++k) {
            const Vec3 x = grid_point(model.box, i, j, k, grid_n, 0);
            const Vec3 q = cert.q_of(x);
            const double qn = norm2(q);
            if (qn < 1e-6) continue;
            const Vec3 h = bs.T_inv * hadamard(d, model.f(x));
            const Vec3 gq = h - lambda * q;
            sl.m = std::max(sl.m, norm_inf(gq) / (qn * qn));
            if (b16_contains(part, x)) {
              sl.cos = std::max(sl.cos, abs_cos(q));
              const double s = q[1] * gq[1] + q[2] * gq[2];
              sl.sv.emplace_back(std::fabs(s), 0.5 * (q[1] * q[1] + q[2] * q[2]));
            }
          }
      },
      workers);
  double m_grid = 0.0;
  for (const auto& sl : slices) {
    m_grid = std::max(m_grid, sl.m);
    max_cos = std::max(max_cos, sl.cos);
  }

  cert.xi = 1.0 - max_cos;
  if (!(cert.xi > 0.0))
    throw std::runtime_error("angle margin not established at this resolution (xi = " +
                             format_double(cert.xi) + ")");
  cert.M_grid = m_grid;
  cert.M_hessian = m_hess;
  cert.M = std::max(m_grid, m_hess);
  cert.kappa = bs.kappa();
  if (!(cert.kappa > 0.0))
    throw std::runtime_error("quadratic form of the unstable block is not positive definite");

  // Inside B16, |q1| <= (1 - xi)|q|, so |q|^2 <= 2V / (1 - (1 - xi)^2) =: 2V / c.
  // Then |q_i g_i| <= |q_i| M |q|^2 <= |q_i| 2 M V / c, and with
  // |q2| + |q3| <= sqrt(2) sqrt(q2^2 + q3^2) = 2 sqrt(V):
  //   |s| <= (2 M V / c) (|q2| + |q3|) <= (4 M / c) V^(3/2).
  const double c = 1.0 - (1.0 - cert.xi) * (1.0 - cert.xi);
  cert.M_prime = 4.0 * cert.M / c;
  if (!(cert.M_prime > 0.0))
    throw std::runtime_error("remainder bound vanished; the vector field looks linear");
  cert.eta_star = cert.kappa * cert.kappa / (4.0 * cert.M_prime * cert.M_prime);
  cert.eta = eta_fraction * cert.eta_star;

  for (const auto& sl : slices)
    for (const auto& [s, v] : sl.sv)
      if (v > 0.0) cert.s_ratio_max = std::max(cert.s_ratio_max, s / std::pow(v, 1.5));

  cert.exclusion_radius = std::sqrt(2.0 * cert.eta) * sigma_min(bs.T);
  std::ostringstream os;
  os << "numerical at resolution grid_n=" << grid_n << ": " << np * np * np << " box points, "
     << 18 * (grid_n + 1) * (grid_n + 1) << " orthant-face directions";
  cert.grid_resolution = os.str();
  return cert;
}

StartStatus classify_start(const BoxPartition& part, const InvariantSetCert& cert, const Vec3& x) {
  if (!b16_contains(part, x)) return StartStatus::OutsideClaim;
  if (!(cert.V(x) > cert.eta)) return StartStatus::Excluded;
  return StartStatus::Valid;
}

InvarianceReport verify_invariance(const SystemModel& model, const BoxPartition& part,
                                   const InvariantSetCert& cert, const std::vector<Vec3>& starts,
                                   const InvarianceOptions& opts) {
  InvarianceReport rep;
  rep.statuses.reserve(starts.size());
  std::vector<Vec3> valid;
  for (const Vec3& x : starts) {
    const StartStatus st = classify_start(part, cert, x);
    rep.statuses.push_back(st);
    if (st == StartStatus::Valid)
      valid.push_back(x);
    else if (st == StartStatus::Excluded)
      ++rep.n_excluded;
    else
      ++rep.n_outside;
  }
  rep.n_traj = valid.size();

  struct Result {
    double excursion = 0.0;
    double min_v = std::numeric_limits<double>::infinity();
    double min_dist = std::numeric_limits<double>::infinity();
    bool failed = false;
  };
  std::vector<Result> results(valid.size());
  IntegrateOptions iopts;
  iopts.rtol = opts.rtol;
  iopts.atol = opts.atol;
  const Vec3 w = model.box.width();
  iopts.atol_scale = Vec3{std::max(1.0, w[0]), std::max(1.0, w[1]), std::max(1.0, w[2])};

  parallel_for(
      valid.size(),
      [&](std::size_t i) {
        Result& r = results[i];
        auto visit = [&](const Vec3& x) {
          r.excursion = std::max(r.excursion, part.distance_to_b16(x));
          r.min_v = std::min(r.min_v, cert.V(x));
          r.min_dist = std::min(r.min_dist, norm2(x - cert.e));
        };
        visit(valid[i]);
        try {
          const auto stats = integrate_steps(model, valid[i], 0.0, opts.horizon, iopts,
                                             [&](const Step& s) {
                                               visit(s.x1);
                                               return true;
                                             });
          if (stats.left_box) r.excursion = std::max(r.excursion, stats.max_box_excursion);
        } catch (const StiffnessError&) {
          r.failed = true;
        }
      },
      opts.workers);

  rep.min_V = std::numeric_limits<double>::infinity();
  rep.min_distance_to_e = std::numeric_limits<double>::infinity();
  for (const Result& r : results) {
    rep.max_excursion = std::max(rep.max_excursion, r.excursion);
    rep.min_V = std::min(rep.min_V, r.min_v);
    rep.min_distance_to_e = std::min(rep.min_distance_to_e, r.min_dist);
    if (r.excursion > opts.tol) ++rep.n_excursions;
    if (!(r.min_v > cert.eta * (1.0 - opts.v_tol))) ++rep.n_v_violations;
    if (r.failed) ++rep.n_integration_failures;
  }
  rep.min_V_over_eta = cert.eta > 0.0 ? rep.min_V / cert.eta : 0.0;
  return rep;
}

std::vector<Vec3> sample_h_eta(const BoxPartition& part, const InvariantSetCert& cert,
                               std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> out;
  out.reserve(n);
  const Vec3 w = part.box.width();
  std::size_t tries = 0;
  while (out.size() < n) {
    if (++tries > 1000 * (n + 10))
      throw std::runtime_error("sample_h_eta: acceptance rate too low");
    const Vec3 x{part.box.lower[0] + w[0] * u(rng), part.box.lower[1] + w[1] * u(rng),
                 part.box.lower[2] + w[2] * u(rng)};
    if (classify_start(part, cert, x) == StartStatus::Valid) out.push_back(x);
  }
  return out;
}

InvarianceReport verify_invariance(const SystemModel& model, const BoxPartition& part,
                                   const InvariantSetCert& cert, std::size_t n_traj,
                                   std::uint64_t seed, const InvarianceOptions& opts) {
  return verify_invariance(model, part, cert, sample_h_eta(part, cert, n_traj, seed), opts);
}

}  // namespace coop2
