#pragma once

// Semi-flat reduction over the base T^3: periodic Hessian metrics evolved by
// the Monge-Ampere reduction (d/dt g = 1/4 D^2 det g) or the Kahler-Ricci
// reduction (1/2 D^2 log det g), reconstruction of the dual-side forms
// (omega, phi, phi_hat) with grid-field coefficients, and residual checks of
// the two duality theorems.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symflow/frame.hpp"
#include "symflow/grid.hpp"

namespace symflow {

/// Symmetric 3x3 field, components ordered g11,g12,g13,g22,g23,g33.
struct SymmetricMetricField {
  std::shared_ptr<const Grid> grid;
  std::array<GridField, 6> comp;

  static int slot(int i, int j);  // 0-based i,j
  const GridField& entry(int i, int j) const { return comp[static_cast<std::size_t>(slot(i, j))]; }

  GridField determinant() const;
  Eigen::Matrix3d at_point(int i, int j, int k) const;

  /// Smallest eigenvalue over all grid points.
  double min_eigenvalue() const;

  /// First grid point violating positive definiteness (Sylvester minors).
  std::optional<std::array<int, 3>> positivity_violation() const;

  SymmetricMetricField operator+(const SymmetricMetricField& o) const;
  SymmetricMetricField operator*(double s) const;
};

struct PerturbationMode {
  std::array<int, 3> k;
  double amplitude = 0.0;
  double phase = 0.0;
};

/// Hessian of Phi = 1/2 x.A x + sum_m eps_m cos(2 pi k_m.x + theta_m),
/// sampled analytically.  Enforces the SPD margin
/// sum |eps_m| (2 pi |k_m|)^2 < lambda_min(A)/2 (ConfigError otherwise).
SymmetricMetricField hessian_metric(std::shared_ptr<const Grid> grid, const Eigen::Matrix3d& A,
                                    const std::vector<PerturbationMode>& modes);

/// d/dt g_jk = 1/4 d^2(det g)/dx^j dx^k.  Throws GeometricError with the grid
/// location when g stops being positive definite.
SymmetricMetricField iib_rhs(const SymmetricMetricField& g);

/// d/dt g_jk = 1/2 d^2(log det g)/dx^j dx^k.
SymmetricMetricField kr_rhs(const SymmetricMetricField& g);

enum class SemiflatFlow { IIB, KR };
SemiflatFlow semiflat_flow_from_string(const std::string& name);

/// Coframe (dx^1, dx^2, dx^3, dy_1, dy_2, dy_3): all closed, the first three
/// slots carry the base derivatives, omega = e^14 + e^25 + e^36.
const Frame& semiflat_frame();

struct SemiflatForms {
  Form<GridField> phi;
  Form<GridField> phi_hat;
  GridField norm_sq;  // |phi|^2 = 4 det g, algebraic
};

/// phi, phi_hat from the Legendre substitution dx_j = g_jk dx^k in the
/// holomorphic volume form of z_j = x_j + i y_j.
SemiflatForms reconstruct_forms(const SymmetricMetricField& g);

/// RK4 time step of the chosen reduction.
SymmetricMetricField semiflat_step(const SymmetricMetricField& g, double dt, SemiflatFlow flow);

/// Parabolic step bound 0.1 h^2 / max det g.
double cfl_limit(const SymmetricMetricField& g);

struct DualityReport {
  double max_resid;
  double l2_resid;
  double min_det;
};

/// Residual of the duality theorem at the middle state of a centered triple:
/// d/dt phi (central differences) against (1/16) d Lambda d(|phi|^2 phi_hat)
/// for IIB, or (1/2) d Lambda d(log |phi|^2 phi_hat) for KR.  With
/// phase_rotated the pair (phi, phi_hat) is replaced by (phi_hat, -phi).
DualityReport duality_residual(const SymmetricMetricField& prev, const SymmetricMetricField& mid,
                               const SymmetricMetricField& next, double dt, SemiflatFlow flow,
                               bool phase_rotated = false);

struct ComponentIdentityReport {
  double metric_identity_resid;  // d/dt g_jk - (1/16) d_j d_k |phi|^2
  double top_form_resid;         // d/dt det g - (det g/16) sum_j d^2 |phi|^2 / dx_j dx^j
  double trace_identity_resid;   // sum g^{jk} d/dt g_jk - (d/dt det g)/det g
};

/// Residuals of the component identities of the IIB duality proof.
ComponentIdentityReport component_identity_check(const SymmetricMetricField& prev,
                                                 const SymmetricMetricField& mid,
                                                 const SymmetricMetricField& next, double dt);

struct SemiflatConfig {
  int n = 32;
  Eigen::Matrix3d A = Eigen::Matrix3d::Identity();
  std::vector<PerturbationMode> modes;
  double dt = 1e-5;
  int steps = 100;
  SemiflatFlow flow = SemiflatFlow::IIB;
  int stride = 10;  // residual evaluation stride

  void validate() const;
};

struct SemiflatRunRow {
  int step;
  double max_resid;
  double l2_resid;
  double min_det;
};

struct SemiflatRunResult {
  std::vector<SemiflatRunRow> rows;
  SymmetricMetricField final_state;
  double max_norm_identity_resid;  // max | |phi|^2 - 4 det g | over checked states
};

/// Time-steps the configured reduction, evaluating the duality residual at
/// every stride-th step (centered differences on stored neighbours).
SemiflatRunResult run_semiflat(const SemiflatConfig& config);

/// Raw little-endian float64 dump, row-major with axis order x1 x2 x3, plus a
/// JSON sidecar describing the shape.  Returns the pair of file paths.
std::pair<std::string, std::string> dump_field(const GridField& f, const std::string& dir,
                                               const std::string& name);

}  // namespace symflow
