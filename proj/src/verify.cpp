#include "symflow/verify.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <sstream>

#include "symflow/flows.hpp"
#include "symflow/semiflat.hpp"
#include "symflow/symbol.hpp"

namespace symflow {

namespace {

using F = Form<double>;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(3);
  os << v;
  return os.str();
}

/// Random (a, b) with 1 + a - b^2 safely positive.
Eigen::VectorXd random_nil_params(std::mt19937& rng) {
  std::uniform_real_distribution<double> da(-0.5, 2.0), db(-0.8, 0.8);
  for (;;) {
    double a = da(rng), b = db(rng);
    if (1.0 + a - b * b > 0.05) {
      Eigen::VectorXd p(2);
      p << a, b;
      return p;
    }
  }
}

Eigen::VectorXd random_solv_params(std::mt19937& rng) {
  std::uniform_real_distribution<double> d(0.3, 2.5);
  Eigen::VectorXd p(4);
  for (int i = 0; i < 4; ++i) p[i] = d(rng);
  return p;
}

/// Basis of the primitive 3-forms (kernel of omega ^ .) on the standard frame.
std::vector<F> primitive_basis(const Frame& f) {
  const auto& three = masks_of_degree(3);
  const auto& five = masks_of_degree(5);
  Eigen::MatrixXd m(static_cast<int>(five.size()), static_cast<int>(three.size()));
  for (std::size_t j = 0; j < three.size(); ++j) {
    F w = wedge(f.omega(), F::basis(three[j]));
    for (std::size_t r = 0; r < five.size(); ++r) m(static_cast<int>(r), static_cast<int>(j)) = w.coeff(five[r]);
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > 1e-10 * sv[0]) ++rank;
  std::vector<F> out;
  for (int j = rank; j < svd.matrixV().cols(); ++j) out.push_back(from_coefficients(3, svd.matrixV().col(j)));
  return out;
}

CheckResult check_adapted_reconstruction() {
  auto t0 = Clock::now();
  const Frame& f = preset_frame(Preset::Torus);
  const double tol = 1e-10;
  TypeIIAStructure st = make_structure(f, adapted_model_phi());

  double j_err = 0.0;
  for (int k = 0; k < 3; ++k) {
    j_err = std::max(j_err, (st.J * Vec6::Unit(2 * k) - Vec6::Unit(2 * k + 1)).cwiseAbs().maxCoeff());
    j_err = std::max(j_err, (st.J * Vec6::Unit(2 * k + 1) + Vec6::Unit(2 * k)).cwiseAbs().maxCoeff());
  }
  double hat_err = max_abs_diff(st.phi_hat, adapted_model_phi_hat());
  double norm_err = std::abs(st.norm_sq - 1.0);
  double g_err = (st.g - Mat6::Identity()).cwiseAbs().maxCoeff();
  double elapsed = seconds_since(t0);

  bool pass = j_err <= tol && hat_err <= tol && norm_err <= tol && g_err <= tol && elapsed < 1.0;
  return {1, "adapted-frame reconstruction (J, phi_hat, |phi|^2, g)", pass,
          "J err " + fmt(j_err) + ", phi_hat err " + fmt(hat_err) + ", |phi|^2 err " + fmt(norm_err) +
              ", g err " + fmt(g_err) + ", " + fmt(elapsed) + " s"};
}

CheckResult check_gradient_flow_equivalence(std::mt19937& rng) {
  const Frame& f = preset_frame(Preset::NilmanifoldDbt);
  const AnsatzFamily& fam = preset_ansatz(Preset::NilmanifoldDbt);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::VectorXd p = random_nil_params(rng);
    F phi = fam.member(p);
    TypeIIAStructure st = make_structure(f, phi);
    F lhs = exterior_d(codifferential(phi, st.g, f), f);
    F rhs = exterior_d(lambda_contract(exterior_d(st.phi_hat, f), f), f);
    worst = std::max(worst, max_abs_diff(lhs, rhs));
  }
  return {2, "d d^dagger phi = d Lambda d phi_hat on the nilmanifold ansatz", worst <= 1e-9,
          "max residual " + fmt(worst) + " over 20 samples (tol 1e-9)"};
}

CheckResult check_nilmanifold_oracle() {
  FlowSpec spec;  // HitchinGradient, RK4, dt 1e-3
  spec.horizon = 10.0;
  spec.stride = 100;
  Eigen::VectorXd init(2);
  init << 0.0, 0.0;
  Trajectory traj = run_flow(preset_ansatz(Preset::NilmanifoldDbt), init, spec);

  double worst_a = 0.0, worst_b = 0.0, worst_n = 0.0;
  for (const auto& s : traj.samples) {
    double lhs = std::pow(1.0 + s.params[0], 1.5);
    double expect = 1.0 + 3.0 * s.t;
    worst_a = std::max(worst_a, std::abs(lhs - expect) / expect);
    worst_b = std::max(worst_b, std::abs(s.params[1]));
    worst_n = std::max(worst_n, std::abs(s.nij_sq - 1.0 / expect) / (1.0 / expect));
  }
  bool pass = worst_a <= 1e-6 && worst_b < 1e-12 && worst_n <= 1e-6;
  return {3, "Example 1 closed form: (1+a)^{3/2} = 1+3t and |N|^2 decay", pass,
          "rel err a " + fmt(worst_a) + ", b drift " + fmt(worst_b) + ", rel err |N|^2 " + fmt(worst_n)};
}

CheckResult check_solvmanifold_limit() {
  const double lam = solvmanifold_lambda();
  const AnsatzFamily& fam = preset_ansatz(Preset::SolvmanifoldTv);
  const Frame& f = fam.frame();

  FlowSpec spec;
  spec.horizon = 5.0 / (2.0 * lam * lam);  // rescaled time tau = 5
  spec.stride = 50;
  Eigen::VectorXd init(4);
  init << 1.0, 2.0, 2.0, 1.0;
  Trajectory traj = run_flow(fam, init, spec);

  const double c1 = init[0] / init[3], c2 = init[1] / init[2];
  double ratio_err = 0.0;
  for (const auto& s : traj.samples) {
    ratio_err = std::max(ratio_err, std::abs(s.params[0] / s.params[3] - c1) / c1);
    ratio_err = std::max(ratio_err, std::abs(s.params[1] / s.params[2] - c2) / c2);
  }

  Eigen::VectorXd limit = solvmanifold_limit_params(init);
  F phi_inf = fam.member(limit);
  const auto& last = traj.back();
  F phi_unit = fam.member(last.params) * (1.0 / std::sqrt(last.norm_sq));
  double dist = max_abs_diff(phi_unit, phi_inf);

  StationaryReport rep = stationary_check(phi_inf, f);
  double c_expected = 2.0 * lam * lam;
  bool pass = ratio_err <= 1e-8 && dist < 1e-4 && rep.residual < 1e-8 &&
              std::abs(rep.best_scale - c_expected) < 1e-8;
  return {4, "Example 2: conserved ratios, phi/|phi| -> phi_inf, eigenform residual", pass,
          "ratio err " + fmt(ratio_err) + ", limit dist " + fmt(dist) + ", eigenform resid " +
              fmt(rep.residual) + ", c - 2 lambda^2 = " + fmt(rep.best_scale - c_expected)};
}

CheckResult check_curvature_identities(std::mt19937& rng) {
  double worst_scalar = 0.0, worst_nid = 0.0, worst_cal = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Preset preset = (trial % 2 == 0) ? Preset::NilmanifoldDbt : Preset::SolvmanifoldTv;
    const Frame& f = preset_frame(preset);
    Eigen::VectorXd p = (preset == Preset::NilmanifoldDbt) ? random_nil_params(rng) : random_solv_params(rng);
    TypeIIAStructure st = make_structure(f, preset_ansatz(preset).member(p));
    MetricLieFrame m{&f, st.g, st.J};
    CurvatureTensors cur = curvature_tensors(m);
    NijenhuisTensors nij = nijenhuis(m);
    worst_scalar = std::max(worst_scalar, std::abs(cur.scalar + nij.norm_sq) / std::max(1.0, nij.norm_sq));
    Mat6 resid = nij.n_minus_sq - (2.0 * nij.n_plus_sq - 0.25 * nij.norm_sq * m.g);
    worst_nid = std::max(worst_nid, resid.cwiseAbs().maxCoeff() / std::max(1.0, nij.norm_sq));
  }
  for (int trial = 0; trial < 10; ++trial) {
    const Frame& f = preset_frame(Preset::NilmanifoldDbt);
    Eigen::VectorXd p = random_nil_params(rng);
    TypeIIAStructure st = make_structure(f, preset_ansatz(Preset::NilmanifoldDbt).member(p));
    double nij = nijenhuis({&f, st.g, st.J}).norm_sq;
    double expect = std::pow(1.0 + p[0] - p[1] * p[1], -1.5);
    worst_cal = std::max(worst_cal, std::abs(nij - expect) / expect);
  }
  bool pass = worst_scalar <= 1e-8 && worst_nid <= 1e-8 && worst_cal <= 1e-10;
  return {5, "curvature identities: R = -|N|^2, (N-)^2 = 2(N+)^2 - 1/4 |N|^2 g, calibration", pass,
          "R+|N|^2 rel " + fmt(worst_scalar) + ", quadratic identity rel " + fmt(worst_nid) +
              ", calibration rel " + fmt(worst_cal)};
}

CheckResult check_metric_flow_consistency() {
  FlowSpec spec;
  spec.horizon = 0.3;
  spec.stride = 1;

  Eigen::VectorXd nil_init(2);
  nil_init << 0.2, 0.1;
  Trajectory nil_traj = run_flow(preset_ansatz(Preset::NilmanifoldDbt), nil_init, spec);
  MetricFlowReport nil_rep = metric_flow_check(nil_traj, preset_ansatz(Preset::NilmanifoldDbt));

  Eigen::VectorXd solv_init(4);
  solv_init << 1.0, 2.0, 2.0, 1.0;
  Trajectory solv_traj = run_flow(preset_ansatz(Preset::SolvmanifoldTv), solv_init, spec);
  MetricFlowReport solv_rep = metric_flow_check(solv_traj, preset_ansatz(Preset::SolvmanifoldTv));

  double worst_g = std::max(nil_rep.max_rel_metric, solv_rep.max_rel_metric);
  double worst_u = std::max(nil_rep.max_rel_u, solv_rep.max_rel_u);
  bool pass = worst_g < 1e-4 && worst_u < 1e-4;
  return {6, "induced flow: dg/dt = -Ric + Ric(J.,J.) and du/dt = |N|^2", pass,
          "dg rel " + fmt(worst_g) + ", du rel " + fmt(worst_u) + " (tol 1e-4)"};
}

CheckResult check_symbol_lemma() {
  SymbolProblem hitchin = SymbolProblem::canonical(Weight::HitchinGradient);
  SymbolReport rep = symbol_spectrum(hitchin);
  const double tol = 1e-10;

  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
  expected(0, 0) = 1.0;  // kappa -> kappa
  expected(2, 2) = 1.0;  // mu2+ -> mu2+
  expected(3, 3) = 1.0;  // mu1- -> mu1-
  double matrix_err = (rep.matrix - expected).cwiseAbs().maxCoeff();

  std::vector<double> want = {0.0, 0.0, 1.0, 1.0, 1.0};
  double ev_err = 0.0;
  for (std::size_t i = 0; i < want.size(); ++i) ev_err = std::max(ev_err, std::abs(rep.eigenvalues[i] - want[i]));

  SymbolProblem iia = SymbolProblem::canonical(Weight::TypeIIA);
  SymbolReport rep_iia = symbol_spectrum(iia);

  bool pass = matrix_err <= tol && ev_err <= tol && rep.kernel_dim == 2 && rep_iia.kernel_dim == 1 &&
              rep.off_space_residual <= tol && rep_iia.off_space_residual <= tol;
  return {7, "symbol lemma: Hitchin spectrum {0,0,1,1,1}, Type IIA kernel dim 1", pass,
          "matrix err " + fmt(matrix_err) + ", eigenvalue err " + fmt(ev_err) + ", kernel dims " +
              std::to_string(rep.kernel_dim) + "/" + std::to_string(rep_iia.kernel_dim)};
}

CheckResult check_variation_formula(std::mt19937& rng) {
  const Frame& f = preset_frame(Preset::Torus);
  const std::vector<F> prim = primitive_basis(f);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  const double h = 1e-5;

  double worst = 0.0;
  int bases = 0;
  while (bases < 5) {
    F phi = adapted_model_phi();
    for (const auto& b : prim) phi = phi + b * (0.15 * d(rng));
    if (lambda_invariant(phi, f) >= -1e-3) continue;
    if (primitivity_residual(phi, f) > 1e-12) continue;
    ++bases;
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd rv(20);
      for (int i = 0; i < 20; ++i) rv[i] = d(rng);
      F dphi = from_coefficients(3, rv);
      F analytic = linearized_dual(phi, dphi, f);
      F fd = (dual_three_form(phi + dphi * h, f) - dual_three_form(phi - dphi * h, f)) * (1.0 / (2.0 * h));
      worst = std::max(worst, max_abs_diff(analytic, fd) / std::max(1.0, analytic.max_abs()));
    }
  }
  return {8, "variation formula vs central finite differences of the dual map", worst <= 1e-6,
          "max rel err " + fmt(worst) + " over 50 directions at 5 base points (h = 1e-5)"};
}

CheckResult check_semiflat_duality(const VerifyOptions& opts) {
  auto t0 = Clock::now();
  std::vector<int> grids = opts.quick ? std::vector<int>{16, 32} : std::vector<int>{16, 32, 64};
  const double dt = 1e-5;
  const int steps = 6;

  std::vector<PerturbationMode> modes = {
      {{1, 0, 0}, 1e-2, 0.3}, {{0, 1, 0}, 8e-4, 1.1}, {{1, 1, 1}, 3e-4, 2.0}};

  double norm_identity_worst = 0.0;
  std::ostringstream detail;
  bool pass = true;
  for (SemiflatFlow flow : {SemiflatFlow::IIB, SemiflatFlow::KR}) {
    std::vector<double> resid;
    for (int n : grids) {
      SemiflatConfig cfg;
      cfg.n = n;
      cfg.modes = modes;
      cfg.dt = dt;
      cfg.steps = steps;
      cfg.stride = steps / 2;
      cfg.flow = flow;
      SemiflatRunResult run = run_semiflat(cfg);
      norm_identity_worst = std::max(norm_identity_worst, run.max_norm_identity_resid);
      resid.push_back(run.rows.front().max_resid);
    }
    detail << (flow == SemiflatFlow::IIB ? "IIB" : "KR") << " residuals";
    for (double r : resid) detail << " " << fmt(r);
    for (std::size_t i = 0; i + 1 < resid.size(); ++i) {
      double order = std::log2(resid[i] / resid[i + 1]);
      detail << " order " << fmt(order);
      if (!(order >= 1.8)) pass = false;
    }
    detail << "; ";
  }
  double elapsed = seconds_since(t0);
  if (norm_identity_worst > 1e-12) pass = false;
  if (elapsed >= 120.0) pass = false;
  detail << "|phi|^2-4detg " << fmt(norm_identity_worst) << ", " << fmt(elapsed) << " s";
  return {9, "semi-flat duality: spatial order >= 1.8 for IIB and KR reductions", pass, detail.str()};
}

CheckResult check_structural_invariants() {
  double worst_monitor = 0.0;
  bool monotone = true;

  {
    FlowSpec spec;
    spec.horizon = 10.0;
    spec.stride = 100;
    Eigen::VectorXd init(2);
    init << 0.0, 0.0;
    Trajectory traj = run_flow(preset_ansatz(Preset::NilmanifoldDbt), init, spec);
    worst_monitor = std::max({worst_monitor, traj.max_d_resid, traj.max_prim_resid, traj.max_proj_resid});
    monotone = monotone && traj.hitchin_density_monotone();
  }
  {
    const double lam = solvmanifold_lambda();
    FlowSpec spec;
    spec.horizon = 5.0 / (2.0 * lam * lam);
    spec.stride = 50;
    Eigen::VectorXd init(4);
    init << 1.0, 2.0, 2.0, 1.0;
    Trajectory traj = run_flow(preset_ansatz(Preset::SolvmanifoldTv), init, spec);
    worst_monitor = std::max({worst_monitor, traj.max_d_resid, traj.max_prim_resid, traj.max_proj_resid});
    monotone = monotone && traj.hitchin_density_monotone();
  }
  for (Weight w : {Weight::TypeIIA, Weight::DualRicci, Weight::EpsilonReg}) {
    FlowSpec spec;
    spec.weight = w;
    spec.epsilon = 0.5;
    spec.horizon = 1.0;
    spec.stride = 20;
    Eigen::VectorXd init(2);
    init << 0.3, 0.1;
    Trajectory traj = run_flow(preset_ansatz(Preset::NilmanifoldDbt), init, spec);
    worst_monitor = std::max({worst_monitor, traj.max_d_resid, traj.max_prim_resid, traj.max_proj_resid});
    for (const auto& s : traj.samples)
      if (!(s.lambda < 0.0)) monotone = false;
  }

  bool pass = worst_monitor < 1e-10 && monotone;
  return {10, "closedness/primitivity/positivity monitors and Hitchin density monotonicity", pass,
          "worst monitor " + fmt(worst_monitor) + (monotone ? ", monotone" : ", MONOTONICITY VIOLATED")};
}

}  // namespace

std::vector<CheckResult> run_acceptance_checks(const VerifyOptions& opts) {
  std::mt19937 rng(opts.seed);
  std::vector<CheckResult> out;
  out.push_back(check_adapted_reconstruction());
  out.push_back(check_gradient_flow_equivalence(rng));
  out.push_back(check_nilmanifold_oracle());
  out.push_back(check_solvmanifold_limit());
  out.push_back(check_curvature_identities(rng));
  out.push_back(check_metric_flow_consistency());
  out.push_back(check_symbol_lemma());
  out.push_back(check_variation_formula(rng));
  out.push_back(check_semiflat_duality(opts));
  out.push_back(check_structural_invariants());
  return out;
}

}  // namespace symflow
