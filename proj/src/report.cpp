#include "coop2/report.hpp"

namespace coop2 {

using nlohmann::json;

namespace {

json vec(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json mat(const Mat3& m) { return json::array({vec(m[0]), vec(m[1]), vec(m[2])}); }

}  // namespace

json params_json(const SystemModel& model) {
  json p = json::object();
  for (const auto& [k, v] : model.params) p[k] = v;
  return p;
}

json to_json(const CertificationReport& rep) {
  json j;
  j["conclusion"] = to_string(rep.conclusion);
  j["reason"] = rep.reason;
  j["grid_n"] = rep.grid_n;
  j["pattern_ok"] = rep.pattern_ok;
  j["a2_pattern_ok"] = rep.a2_pattern_ok;
  j["irreducible_ok"] = rep.irreducible_ok;
  j["equilibrium"] = vec(rep.equilibrium);
  j["equilibrium_residual"] = rep.equilibrium_residual;
  j["equilibrium_interior"] = rep.equilibrium_interior;
  j["unique_in_box"] = rep.unique_in_box;
  j["uniqueness_method"] = rep.uniqueness_method;
  j["jacobian_at_e"] = mat(rep.jacobian_at_e);
  j["charpoly"] = {{"c2", rep.charpoly.c2}, {"c1", rep.charpoly.c1}, {"c0", rep.charpoly.c0}};
  json eig = json::array();
  for (const auto& z : rep.eigenvalues) eig.push_back({{"re", z.real()}, {"im", z.imag()}});
  j["eigenvalues"] = eig;
  j["routh"] = to_string(rep.routh);
  j["det"] = rep.det;
  j["det_negative"] = rep.det_negative;
  j["exp_minors_positive"] = rep.exp_minors_positive;
  if (rep.spectrum) {
    const auto& s = *rep.spectrum;
    j["spectrum"] = {{"lambda_real", s.lambda_real},
                     {"pair", json::array({{{"re", s.pair[0].re}, {"im", s.pair[0].im}},
                                           {{"re", s.pair[1].re}, {"im", s.pair[1].im}}})},
                     {"pair_is_complex", s.pair_is_complex},
                     {"zeta", vec(s.zeta)}};
  }
  if (rep.schur) {
    const auto& b = *rep.schur;
    j["block_schur"] = {{"case", to_string(b.case_tag)}, {"T", mat(b.T)},   {"lambda3", b.lambda3},
                        {"u1", b.u1},  {"u2", b.u2},  {"v1", b.v1},  {"v2", b.v2},
                        {"delta", b.delta}};
  }
  j["notes"] = rep.notes;
  return j;
}

json to_json(const InvariantSetCert& c) {
  return {{"xi", c.xi},
          {"M", c.M},
          {"M_grid", c.M_grid},
          {"M_hessian", c.M_hessian},
          {"kappa", c.kappa},
          {"M_prime", c.M_prime},
          {"eta_star", c.eta_star},
          {"eta", c.eta},
          {"s_ratio_max", c.s_ratio_max},
          {"exclusion_radius", c.exclusion_radius},
          {"grid_n", c.grid_n},
          {"grid_resolution", c.grid_resolution}};
}

json to_json(const InvarianceReport& r) {
  return {{"n_traj", r.n_traj},
          {"n_excluded", r.n_excluded},
          {"n_outside", r.n_outside},
          {"n_excursions", r.n_excursions},
          {"n_v_violations", r.n_v_violations},
          {"n_integration_failures", r.n_integration_failures},
          {"max_excursion", r.max_excursion},
          {"min_V", r.min_V},
          {"min_V_over_eta", r.min_V_over_eta},
          {"min_distance_to_e", r.min_distance_to_e},
          {"ok", r.ok()}};
}

json to_json(const PeriodEstimate& e) {
  return {{"converged", e.converged},
          {"period", e.period},
          {"period_stderr", e.period_stderr},
          {"closure_distance", e.closure_distance},
          {"abs_tol", e.abs_tol},
          {"orbit_diameter", e.orbit_diameter},
          {"n_returns", e.n_returns},
          {"transient_skipped", e.transient_skipped},
          {"diagnostics", e.diagnostics}};
}

}  // namespace coop2
