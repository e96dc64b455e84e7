#include "grazing/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

#include "grazing/errors.hpp"

namespace grazing {

namespace {

const char* kGenerator = "grazing 1.0.0";

Json condition_json(const Condition& c, std::initializer_list<
                        std::pair<const char*, Json>> witnesses,
                    std::initializer_list<std::pair<const char*, double>>
                        tolerances) {
  Json w = Json::object();
  for (const auto& [k, v] : witnesses) w[k] = v;
  w["detail"] = c.detail;
  Json t = Json::object();
  for (const auto& [k, v] : tolerances) t[k] = v;
  return Json{{"verdict", c.pass}, {"witnesses", w}, {"tolerances", t}};
}

Json vec_json(const Vec3& v) { return Json::array({v(0), v(1), v(2)}); }

}  // namespace

std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

Json to_json(const NormalFormParams& p) {
  return Json{{"tau_L", p.tau_L},     {"sigma_L", p.sigma_L},
              {"delta_L", p.delta_L}, {"tau_R", p.tau_R},
              {"sigma_R", p.sigma_R}, {"delta_R", p.delta_R},
              {"mu", p.mu}};
}

NormalFormParams params_from_json(const Json& j) {
  try {
    NormalFormParams p;
    p.tau_L = j.at("tau_L").get<double>();
    p.sigma_L = j.at("sigma_L").get<double>();
    p.delta_L = j.at("delta_L").get<double>();
    p.tau_R = j.at("tau_R").get<double>();
    p.sigma_R = j.at("sigma_R").get<double>();
    p.delta_R = j.at("delta_R").get<double>();
    p.mu = j.value("mu", 1.0);
    return p;
  } catch (const Json::exception& e) {
    throw IoError(std::string("map parameter file: ") + e.what());
  }
}

Json to_json(const OdeParams& p) {
  return Json{{"alpha", {p.alpha1, p.alpha2, p.alpha3}},
              {"beta", {p.beta1, p.beta2}},
              {"gamma", p.gamma}};
}

OdeParams ode_from_json(const Json& j) {
  try {
    OdeParams p;
    const auto& a = j.at("alpha");
    const auto& b = j.at("beta");
    if (a.size() != 3 || b.size() != 2) {
      throw IoError("flow parameter file: alpha needs 3 entries, beta 2");
    }
    p.alpha1 = a.at(0).get<double>();
    p.alpha2 = a.at(1).get<double>();
    p.alpha3 = a.at(2).get<double>();
    p.beta1 = b.at(0).get<double>();
    p.beta2 = b.at(1).get<double>();
    p.gamma = j.value("gamma", 0.0);
    return p;
  } catch (const Json::exception& e) {
    throw IoError(std::string("flow parameter file: ") + e.what());
  }
}

Json to_json(const TheoremReport& r, const Tolerances& tol) {
  Json eigs = Json::array();
  for (const Cplx& l : r.eigs) {
    eigs.push_back(Json{{"re", l.real()}, {"im", l.imag()}});
  }
  Json conditions = Json::object();
  conditions["i"] = condition_json(
      r.i, {{"multipliers", eigs}, {"lambda1", r.lambda1},
            {"lambda2", r.lambda2}},
      {{"eq_tol", tol.eq_tol}});
  conditions["ii"] = condition_json(
      r.ii, {{"det_C", r.detC}, {"e1_zeta1", r.e1_zeta1},
             {"zeta1", vec_json(r.zeta1)}},
      {{"eq_tol", tol.eq_tol}});
  conditions["iii"] = condition_json(
      r.iii, {{"cycle_margin", r.cycle_margin},
              {"cycle_residual", r.xcycle.residual}},
      {{"on_sigma", tol.on_sigma}, {"cycle_residual", tol.cycle_residual}});
  conditions["iv_a"] = condition_json(r.iv_a, {}, {{"on_sigma", tol.on_sigma}});
  conditions["iv_b"] = condition_json(
      r.iv_b, {{"y0", vec_json(r.y0)}}, {{"on_sigma", tol.on_sigma}});
  conditions["iv_c"] = condition_json(
      r.iv_c, {{"abs_e1_y_alpha", r.e1_y_alpha}, {"alpha", r.alpha}},
      {{"on_sigma", tol.on_sigma}});
  Json hits = Json::array();
  for (long i : r.sigma_hits) hits.push_back(i);
  conditions["iv_d"] = condition_json(
      r.iv_d, {{"on_plane_indices", hits}}, {{"on_sigma", tol.on_sigma}});
  return Json{{"generator", kGenerator},
              {"overall", r.overall},
              {"alpha", r.alpha},
              {"forward_stop", r.forward_stop},
              {"conditions", conditions}};
}

Json to_json(const NewtonReport& r) {
  Json hist = Json::array();
  for (double h : r.history) hist.push_back(h);
  return Json{{"params", to_json(r.params)},
              {"residual_norm", r.residual.norm()},
              {"iterations", r.iterations},
              {"jacobian_condition", r.jacobian_cond},
              {"residual_history", hist}};
}

Json to_json(const SolveCandidate& c) {
  Json j = to_json(c.newton.params);
  j["report"] = to_json(c.newton);
  j["verified"] = c.verified;
  if (!c.verified) j["note"] = "spurious root: residual zero, verifier fails";
  return j;
}

Json to_json(const FitReport& r) {
  auto pair_json = [](const std::array<Cplx, 3>& a) {
    Json out = Json::array();
    for (const Cplx& l : a) {
      out.push_back(Json{{"re", l.real()}, {"im", l.imag()}});
    }
    return out;
  };
  Json j = to_json(r.params);
  j["report"] = Json{
      {"targets",
       {{"lambda_L", {r.targets.lambdaL1, r.targets.lambdaL23.real(),
                      r.targets.lambdaL23.imag()}},
        {"lambda_R", {r.targets.lambdaR1, r.targets.lambdaR2}}}},
      {"achieved_L", pair_json(r.achieved_L)},
      {"achieved_R", pair_json(r.achieved_R)},
      {"residual_L", r.residual_L},
      {"residual_R", r.residual_R},
      {"alpha_imag_residue", r.alphas.imag_residue},
      {"fit_denominator", r.betas.denominator}};
  return j;
}

Json to_json(const GrazingData& g) {
  return Json{{"gamma_graz", g.gamma_graz},
              {"t_graz", g.t_graz},
              {"X_graz", vec_json(g.X_graz)},
              {"Z_graz", g.Z_graz}};
}

Json to_json(const LeadingOrderNF& nf) {
  auto mat = [](const Mat3& m) {
    Json rows = Json::array();
    for (int i = 0; i < 3; ++i) {
      rows.push_back(Json::array({m(i, 0), m(i, 1), m(i, 2)}));
    }
    return rows;
  };
  return Json{{"A_L", mat(nf.A_L)},
              {"A_R", mat(nf.A_R)},
              {"D1", mat(nf.D1)},
              {"b", vec_json(nf.b)},
              {"det_O_L", nf.det_O_L},
              {"rho_b", nf.rho_b}};
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  try {
    Json j;
    in >> j;
    return j;
  } catch (const Json::exception& e) {
    throw IoError("cannot parse " + path + ": " + e.what());
  }
}

void save_json(const std::string& path, Json j) {
  if (j.is_object() && !j.contains("generator")) j["generator"] = kGenerator;
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << j.dump(2) << "\n";
  if (!out.good()) throw IoError("write failed: " + path);
}

void write_cycle_csv(const std::string& path,
                     const std::vector<EnumerationRow>& rows) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "# " << kGenerator << "\n";
  out << "word,k,i,x1,x2,x3,side,admissible,max_eig_modulus\n";
  for (const EnumerationRow& r : rows) {
    if (!r.cycle) {
      out << "# " << r.word.str() << ": " << r.error << "\n";
      continue;
    }
    const double top =
        *std::max_element(r.stability.moduli.begin(),
                          r.stability.moduli.end());
    for (std::size_t i = 0; i < r.cycle->points.size(); ++i) {
      const Vec3& x = r.cycle->points[i];
      out << r.word.str() << ',' << r.k << ',' << i << ','
          << format_double(x(0)) << ',' << format_double(x(1)) << ','
          << format_double(x(2)) << ',' << r.word[i] << ','
          << (r.cycle->admissible ? 1 : 0) << ',' << format_double(top)
          << "\n";
    }
  }
  if (!out.good()) throw IoError("write failed: " + path);
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<TrajectorySample>& samples) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "# " << kGenerator << "\n";
  out << "t,X,Y,Z,regime\n";
  for (const TrajectorySample& s : samples) {
    out << format_double(s.t) << ',' << format_double(s.x(0)) << ','
        << format_double(s.x(1)) << ',' << format_double(s.x(2)) << ','
        << (s.sliding ? "sliding" : "left") << "\n";
  }
  if (!out.good()) throw IoError("write failed: " + path);
}

void write_branch_csv(const std::string& path, const GrazingData& g,
                      const std::vector<Branch>& branches) {
  std::vector<const Branch*> order;
  for (const Branch& b : branches) order.push_back(&b);
  std::sort(order.begin(), order.end(),
            [](const Branch* a, const Branch* b) {
              return a->label < b->label;
            });
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path + " for writing");
  out << "# " << kGenerator << "\n";
  for (const Branch* b : order) {
    out << "# " << b->label << ": diagram index " << b->diag_index;
    if (b->fold) {
      out << ", fold at gamma - gamma_graz = "
          << format_double(b->fold->gamma_k - g.gamma_graz) << " with "
          << b->fold->partner;
    }
    out << "\n";
  }
  out << "gamma_minus_gamma_graz,label,stability,X_value,diag_value\n";
  for (const Branch* b : order) {
    for (const BranchPoint& bp : b->points) {
      const std::size_t i = bp.loop_points.empty()
                                ? 0
                                : std::min<std::size_t>(
                                      b->diag_index,
                                      bp.loop_points.size() - 1);
      const double xv =
          bp.loop_points.empty() ? 0 : bp.loop_points[i].X;
      out << format_double(bp.gamma - g.gamma_graz) << ',' << b->label
          << ',' << to_string(bp.stability) << ',' << format_double(xv)
          << ',' << format_double(bp.diag_value) << "\n";
    }
  }
  if (!out.good()) throw IoError("write failed: " + path);
}

}  // namespace grazing
