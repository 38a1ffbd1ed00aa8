#pragma once

// Left-invariant Riemannian and almost-complex diagnostics on a metric Lie
// frame: Levi-Civita connection via the Koszul formula, Riemann/Ricci/scalar
// curvature, and the Nijenhuis tensor with its quadratic contractions.

#include <optional>

#include "symflow/frame.hpp"

namespace symflow {

/// c[i][j][k]: [e_i, e_j] = sum_k c[i][j][k] e_k (from the differential table,
/// d e^k (e_i, e_j) = -e^k([e_i, e_j])).
using StructureConstants = std::array<std::array<std::array<double, kDim>, kDim>, kDim>;

StructureConstants structure_constants(const Frame& f);

struct MetricLieFrame {
  const Frame* frame;
  Mat6 g;                 // SPD metric in the frame
  std::optional<Mat6> J;  // optional compatible almost complex structure
};

struct Connection {
  /// gamma[i][j][k]: nabla_{e_i} e_j = sum_k gamma[i][j][k] e_k.
  std::array<std::array<std::array<double, kDim>, kDim>, kDim> gamma;
  double torsion_residual;       // max |Gamma^k_ij - Gamma^k_ji - c^k_ij|
  double metric_compat_residual; // max |g(nabla_i e_j, e_k) + g(e_j, nabla_i e_k)|
};

/// Koszul formula on a left-invariant metric; the returned residuals are
/// re-verified numerically at construction.
Connection levi_civita(const MetricLieFrame& m);

struct CurvatureTensors {
  /// riem[i][j][k][l]: R(e_i, e_j) e_k = sum_l riem[i][j][k][l] e_l, with
  /// R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.
  std::array<std::array<std::array<std::array<double, kDim>, kDim>, kDim>, kDim> riem;
  Mat6 ricci;     // Ric_jk = sum_i riem[i][j][k][i]
  double scalar;  // g^{jk} Ric_jk
};

CurvatureTensors curvature_tensors(const MetricLieFrame& m);

/// Ric(J.,J.) as a matrix, the anti-complexified partner of Ricci.
Mat6 ricci_j_invariant_part(const CurvatureTensors& c, const Mat6& J);

struct NijenhuisTensors {
  /// n[i][j][k]: N(e_i, e_j) = sum_k n[i][j][k] e_k.
  std::array<std::array<std::array<double, kDim>, kDim>, kDim> n;
  double norm_sq;   // |N|^2, full g-contraction
  Mat6 n_plus_sq;   // (N+^2)_ij = N^{pk}_i N_{pkj}
  Mat6 n_minus_sq;  // (N-^2)_ij = N^{kp}_i N_{pkj}
};

/// N(X,Y) = 1/4 ([JX,JY] - J[JX,Y] - J[X,JY] - [X,Y]); the 1/4 normalization
/// is calibrated on the nilmanifold family (|N|^2 = (1+a-b^2)^{-3/2}).
/// Throws when m.J is absent or J^2 != -Id.
NijenhuisTensors nijenhuis(const MetricLieFrame& m);

inline constexpr double kNijenhuisNormalization = 0.25;

}  // namespace symflow
