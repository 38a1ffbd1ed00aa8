#pragma once

// The flow family d/dt phi = d Lambda_omega d(w(|phi|^2) phi_hat) with weights
// w in {1, s/16, log s, s^(eps/2)}, integrated as an ODE on the invariant
// ansatz coordinates of a preset, plus the closed-form oracles of the two
// example geometries and the diagnostic checks along trajectories.

#include <iosfwd>
#include <vector>

#include "symflow/curvature.hpp"
#include "symflow/hitchin.hpp"
#include "symflow/homogeneous.hpp"

namespace symflow {

enum class Weight {
  HitchinGradient,  // w = 1
  TypeIIA,          // w = |phi|^2 / 16
  DualRicci,        // w = log |phi|^2
  EpsilonReg        // w = |phi|^eps, eps > 0
};

Weight weight_from_string(const std::string& name);
std::string to_string(Weight w);

enum class IntegratorKind { RK4, RK45 };

struct FlowSpec {
  Weight weight = Weight::HitchinGradient;
  double epsilon = 0.0;   // for EpsilonReg; must be > 0
  IntegratorKind integrator = IntegratorKind::RK4;
  double dt = 1e-3;       // fixed step for RK4
  double rtol = 1e-9;     // tolerance for RK45
  double horizon = 10.0;
  int stride = 10;        // record every stride-th step
  double log_floor = 1e-6;  // abort DualRicci below this |phi|^2

  void validate() const;
};

/// w(s) and dw/ds at s = |phi|^2.
double weight_value(const FlowSpec& spec, double norm_sq);
double weight_derivative(const FlowSpec& spec, double norm_sq);

/// d Lambda_omega d(w(|phi|^2) phi_hat).  Requires phi closed, primitive,
/// positive; throws NotPositiveError / GeometricError (DualRicci floor).
Form<double> flow_rhs(const Form<double>& phi, const FlowSpec& spec, const Frame& f);

struct FlowSample {
  double t;
  Eigen::VectorXd params;
  double norm_sq;          // |phi|^2
  double u;                // log |phi|^2
  double hitchin_density;  // H = |phi|^2 / 2
  double nij_sq;           // |N|^2
  double d_resid;          // ||d phi||
  double prim_resid;       // ||omega ^ phi||
  double lambda;           // Hitchin invariant, < 0 along valid runs
};

struct Trajectory {
  std::vector<FlowSample> samples;
  double max_proj_resid = 0.0;
  double max_d_resid = 0.0;
  double max_prim_resid = 0.0;

  const FlowSample& front() const { return samples.front(); }
  const FlowSample& back() const { return samples.back(); }

  /// Hitchin density non-decreasing within slack (absolute, per step).
  bool hitchin_density_monotone(double slack = 1e-12) const;
};

/// Integrates the projected ODE p'(t) = Proj_span(flow_rhs(phi(p))).  Aborts
/// (GeometricError) on positivity loss; a projection residual above
/// span_residual_cap means the family is not flow-invariant and aborts too.
Trajectory run_flow(const AnsatzFamily& family, const Eigen::VectorXd& initial, const FlowSpec& spec,
                    double span_residual_cap = 1e-8);

/// Closed-form Example 1 solution: (1 + a - b0^2)^{3/2} = (1 + a0 - b0^2)^{3/2} + 3t, b = b0.
Eigen::VectorXd nilmanifold_solution(double t, const Eigen::VectorXd& initial);

/// Closed-form Example 2 solution in raw flow time (the reduction in rescaled
/// time tau uses tau = 2 lambda^2 t).
Eigen::VectorXd solvmanifold_solution(double t, const Eigen::VectorXd& initial);

Eigen::VectorXd oracle_solution(Preset p, double t, const Eigen::VectorXd& initial);

/// phi_inf parameters: lim phi/|phi| along the Example 2 flow started at
/// `initial` (all four parameters positive).
Eigen::VectorXd solvmanifold_limit_params(const Eigen::VectorXd& initial);

struct StationaryReport {
  double residual;    // min_c ||d Lambda d phi_hat - c phi|| (max-abs norm)
  double best_scale;  // the minimizing c
};

/// Detects eigenform/soliton behavior of the Hitchin-gradient right-hand side.
StationaryReport stationary_check(const Form<double>& phi, const Frame& f);

struct MetricFlowReport {
  double max_rel_metric;  // |dg/dt - (-Ric + Ric(J.,J.))| / |rhs|, max over samples
  double max_rel_u;       // |du/dt - |N|^2| / |N|^2
};

/// Finite-difference check of the induced metric flow (homogeneous case of
/// the coupled system: dg/dt = -Ric + Ric(J.,J.), du/dt = |N|^2) along a
/// trajectory recorded with stride 1.
MetricFlowReport metric_flow_check(const Trajectory& traj, const AnsatzFamily& family);

/// CSV export: header t,<params...>,normSq,u,H,nijSq,dResid,primResid,lambda
/// with 17 significant digits (deterministic bytes for identical runs).
void write_trajectory_csv(std::ostream& os, const Trajectory& traj, const AnsatzFamily& family);

}  // namespace symflow
