#include "symflow/flows.hpp"

#include <cmath>
#include <ostream>

#include "symflow/ode.hpp"

namespace symflow {

Weight weight_from_string(const std::string& name) {
  if (name == "hitchin") return Weight::HitchinGradient;
  if (name == "type-iia" || name == "typeiia") return Weight::TypeIIA;
  if (name == "dual-ricci" || name == "dualricci") return Weight::DualRicci;
  if (name == "epsilon" || name == "epsilon-reg") return Weight::EpsilonReg;
  throw ConfigError("unknown weight '" + name + "' (expected hitchin, type-iia, dual-ricci, epsilon)");
}

std::string to_string(Weight w) {
  switch (w) {
    case Weight::HitchinGradient: return "hitchin";
    case Weight::TypeIIA: return "type-iia";
    case Weight::DualRicci: return "dual-ricci";
    case Weight::EpsilonReg: return "epsilon";
  }
  return "?";
}

void FlowSpec::validate() const {
  if (weight == Weight::EpsilonReg && !(epsilon > 0.0))
    throw ConfigError("epsilon regularization requires epsilon > 0");
  if (!(dt > 0.0)) throw ConfigError("dt must be positive");
  if (!(horizon >= 0.0)) throw ConfigError("horizon must be non-negative");
  if (stride < 1) throw ConfigError("stride must be >= 1");
  if (!(rtol > 0.0)) throw ConfigError("rtol must be positive");
}

double weight_value(const FlowSpec& spec, double s) {
  switch (spec.weight) {
    case Weight::HitchinGradient: return 1.0;
    case Weight::TypeIIA: return s / 16.0;
    case Weight::DualRicci:
      if (s < spec.log_floor)
        throw GeometricError("dual Ricci weight: |phi|^2 = " + std::to_string(s) + " below log floor");
      return std::log(s);
    case Weight::EpsilonReg: return std::pow(s, spec.epsilon / 2.0);
  }
  throw ConfigError("invalid weight enum");
}

double weight_derivative(const FlowSpec& spec, double s) {
  switch (spec.weight) {
    case Weight::HitchinGradient: return 0.0;
    case Weight::TypeIIA: return 1.0 / 16.0;
    case Weight::DualRicci:
      if (s < spec.log_floor)
        throw GeometricError("dual Ricci weight: |phi|^2 below log floor");
      return 1.0 / s;
    case Weight::EpsilonReg: return 0.5 * spec.epsilon * std::pow(s, spec.epsilon / 2.0 - 1.0);
  }
  throw ConfigError("invalid weight enum");
}

Form<double> flow_rhs(const Form<double>& phi, const FlowSpec& spec, const Frame& f) {
  TypeIIAStructure st = make_structure(f, phi);
  double w = weight_value(spec, st.norm_sq);
  Form<double> weighted = st.phi_hat * w;
  return exterior_d(lambda_contract(exterior_d(weighted, f), f), f);
}

bool Trajectory::hitchin_density_monotone(double slack) const {
  for (std::size_t i = 1; i < samples.size(); ++i)
    if (samples[i].hitchin_density < samples[i - 1].hitchin_density - slack) return false;
  return true;
}

namespace {

FlowSample sample_at(const AnsatzFamily& family, double t, const Eigen::VectorXd& p) {
  const Frame& f = family.frame();
  Form<double> phi = family.member(p);
  TypeIIAStructure st = make_structure(f, phi);
  MetricLieFrame mlf{&f, st.g, st.J};
  double nij = nijenhuis(mlf).norm_sq;
  return {t,
          p,
          st.norm_sq,
          std::log(st.norm_sq),
          0.5 * st.norm_sq,
          nij,
          closedness_residual(phi, f),
          primitivity_residual(phi, f),
          st.lambda};
}

}  // namespace

Trajectory run_flow(const AnsatzFamily& family, const Eigen::VectorXd& initial, const FlowSpec& spec,
                    double span_residual_cap) {
  spec.validate();
  if (initial.size() != family.dimension())
    throw ConfigError("run_flow: initial data has wrong dimension for ansatz '" + family.name() + "'");
  const Frame& f = family.frame();

  Trajectory traj;
  auto deriv = [&](double, const Eigen::VectorXd& p) -> Eigen::VectorXd {
    Form<double> rhs = flow_rhs(family.member(p), spec, f);
    auto proj = family.project_tangent(rhs);
    if (proj.residual > span_residual_cap)
      throw ConfigError("run_flow: flow left the ansatz span (projection residual " +
                        std::to_string(proj.residual) + "); the family is not flow-invariant");
    traj.max_proj_resid = std::max(traj.max_proj_resid, proj.residual);
    return proj.coords;
  };

  auto record = [&](double t, const Eigen::VectorXd& p) {
    FlowSample s = sample_at(family, t, p);
    if (!(s.lambda < 0.0))
      throw GeometricError("run_flow: positivity lost at t = " + std::to_string(t));
    traj.max_d_resid = std::max(traj.max_d_resid, s.d_resid);
    traj.max_prim_resid = std::max(traj.max_prim_resid, s.prim_resid);
    traj.samples.push_back(std::move(s));
  };

  Eigen::VectorXd p = initial;
  record(0.0, p);

  if (spec.horizon == 0.0) return traj;

  if (spec.integrator == IntegratorKind::RK4) {
    const long total_steps = std::lround(std::ceil(spec.horizon / spec.dt - 1e-12));
    double t = 0.0;
    for (long step = 1; step <= total_steps; ++step) {
      double dt = std::min(spec.dt, spec.horizon - t);
      p = rk4_step(p, t, dt, deriv);
      t += dt;
      if (step % spec.stride == 0 || step == total_steps) record(t, p);
    }
  } else {
    const double sample_dt = spec.dt * spec.stride;
    double t = 0.0;
    while (t < spec.horizon - 1e-12) {
      double t_next = std::min(t + sample_dt, spec.horizon);
      p = dp45_integrate(p, t, t_next, spec.rtol, spec.rtol * 1e-2, deriv);
      t = t_next;
      record(t, p);
    }
  }
  return traj;
}

Eigen::VectorXd nilmanifold_solution(double t, const Eigen::VectorXd& initial) {
  if (initial.size() != 2) throw ConfigError("nilmanifold oracle expects (a0, b0)");
  const double a0 = initial[0], b0 = initial[1];
  const double q0 = 1.0 + a0 - b0 * b0;
  if (!(q0 > 0.0)) throw NotPositiveError("nilmanifold oracle: initial form is not positive");
  const double q = std::pow(std::pow(q0, 1.5) + 3.0 * t, 2.0 / 3.0);
  Eigen::VectorXd out(2);
  out << q - 1.0 + b0 * b0, b0;
  return out;
}

Eigen::VectorXd solvmanifold_solution(double t, const Eigen::VectorXd& initial) {
  if (initial.size() != 4) throw ConfigError("solvmanifold oracle expects (alpha0, beta0, gamma0, delta0)");
  const double al = initial[0], be = initial[1], ga = initial[2], de = initial[3];
  if (!(al > 0 && be > 0 && ga > 0 && de > 0))
    throw NotPositiveError("solvmanifold oracle: parameters must be positive");
  const double lam = solvmanifold_lambda();
  const double tau = 2.0 * lam * lam * t;  // the reduction's linear time rescaling
  const double c1 = al / de, c2 = be / ga;
  const double A = 0.5 * (std::sqrt(al * de) + std::sqrt(be * ga));
  const double B = 0.5 * (std::sqrt(al * de) - std::sqrt(be * ga));
  const double ep = A * std::exp(tau) + B * std::exp(-tau);
  const double em = A * std::exp(tau) - B * std::exp(-tau);
  Eigen::VectorXd out(4);
  out << std::sqrt(c1) * ep, std::sqrt(c2) * em, em / std::sqrt(c2), ep / std::sqrt(c1);
  return out;
}

Eigen::VectorXd oracle_solution(Preset p, double t, const Eigen::VectorXd& initial) {
  switch (p) {
    case Preset::NilmanifoldDbt: return nilmanifold_solution(t, initial);
    case Preset::SolvmanifoldTv: return solvmanifold_solution(t, initial);
    case Preset::Torus: return initial;  // every positive member is stationary
  }
  throw ConfigError("invalid preset enum");
}

Eigen::VectorXd solvmanifold_limit_params(const Eigen::VectorXd& initial) {
  if (initial.size() != 4) throw ConfigError("solvmanifold limit expects 4 parameters");
  const double al = initial[0], be = initial[1], ga = initial[2], de = initial[3];
  if (!(al > 0 && be > 0 && ga > 0 && de > 0))
    throw NotPositiveError("solvmanifold limit: parameters must be positive");
  const double c1 = al / de, c2 = be / ga;
  Eigen::VectorXd out(4);
  out << std::sqrt(c1 / 8.0), std::sqrt(c2 / 8.0), std::sqrt(1.0 / (8.0 * c2)), std::sqrt(1.0 / (8.0 * c1));
  return out;
}

StationaryReport stationary_check(const Form<double>& phi, const Frame& f) {
  if (!(lambda_invariant(phi, f) < 0.0))
    throw NotPositiveError("stationary_check: phi is not positive");
  // assembled directly so non-closed forms (e.g. the 90-degree rotation of a
  // flow state) can be probed as well
  Form<double> rhs = exterior_d(lambda_contract(exterior_d(dual_three_form(phi, f), f), f), f);
  Eigen::VectorXd r = to_coefficients(rhs);
  Eigen::VectorXd pv = to_coefficients(phi);
  const double c = r.dot(pv) / pv.squaredNorm();
  return {(rhs - phi * c).max_abs(), c};
}

MetricFlowReport metric_flow_check(const Trajectory& traj, const AnsatzFamily& family) {
  if (traj.samples.size() < 3) throw ConfigError("metric_flow_check: need at least 3 samples");
  const Frame& f = family.frame();
  MetricFlowReport rep{0.0, 0.0};
  for (std::size_t i = 1; i + 1 < traj.samples.size(); ++i) {
    const auto& prev = traj.samples[i - 1];
    const auto& mid = traj.samples[i];
    const auto& next = traj.samples[i + 1];
    const double two_dt = next.t - prev.t;

    TypeIIAStructure sp = make_structure(f, family.member(prev.params));
    TypeIIAStructure sm = make_structure(f, family.member(mid.params));
    TypeIIAStructure sn = make_structure(f, family.member(next.params));

    Mat6 dg_dt = (sn.g - sp.g) / two_dt;
    CurvatureTensors cur = curvature_tensors({&f, sm.g, sm.J});
    Mat6 chi = -cur.ricci + ricci_j_invariant_part(cur, sm.J);
    double denom = std::max(chi.cwiseAbs().maxCoeff(), 1e-14);
    rep.max_rel_metric = std::max(rep.max_rel_metric, (dg_dt - chi).cwiseAbs().maxCoeff() / denom);

    double du_dt = (std::log(sn.norm_sq) - std::log(sp.norm_sq)) / two_dt;
    double nij = nijenhuis({&f, sm.g, sm.J}).norm_sq;
    rep.max_rel_u = std::max(rep.max_rel_u, std::abs(du_dt - nij) / std::max(nij, 1e-14));
  }
  return rep;
}

void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const AnsatzFamily& family) {
  os << "t";
  for (const auto& n : family.param_names()) os << "," << n;
  os << ",normSq,u,H,nijSq,dResid,primResid,lambda\n";
  char buf[512];
  for (const auto& s : traj.samples) {
    int n = std::snprintf(buf, sizeof(buf), "%.17g", s.t);
    os.write(buf, n);
    for (int i = 0; i < s.params.size(); ++i) {
      n = std::snprintf(buf, sizeof(buf), ",%.17g", s.params[i]);
      os.write(buf, n);
    }
    n = std::snprintf(buf, sizeof(buf), ",%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.norm_sq, s.u,
                      s.hitchin_density, s.nij_sq, s.d_resid, s.prim_resid, s.lambda);
    os.write(buf, n);
  }
}

}  // namespace symflow
