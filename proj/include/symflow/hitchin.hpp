#pragma once

// Stable 3-form constructions: from a positive 3-form phi (and the frame's
// symplectic form) build the endomorphism K, the invariant lambda, the almost
// complex structure J, the dual form phi_hat = J phi, the norm |phi|^2 and
// the metrics g, g_tilde = |phi|^2 g.  All operations are pointwise and pure.

#include "symflow/frame.hpp"

namespace symflow {

/// K e_a is the vector paired by iota_{e_a} phi ^ phi ^ alpha = alpha(K e_a) vol.
/// Sign convention fixed so that on the adapted model form J = K/sqrt(-lambda)
/// satisfies J e1 = e2.
Mat6 k_endomorphism(const Form<double>& phi, const Frame& f);

/// lambda(phi) = tr(K^2)/6; phi is positive iff lambda < 0.
double lambda_invariant(const Form<double>& phi, const Frame& f);

/// J = K/sqrt(-lambda); J^2 = -Id.  Throws NotPositiveError when lambda >= 0.
Mat6 almost_complex(const Form<double>& phi, const Frame& f);

/// phi_hat(X,Y,Z) = phi(JX, JY, JZ).  Throws NotPositiveError.
Form<double> dual_three_form(const Form<double>& phi, const Frame& f);

/// |phi|^2 from phi ^ phi_hat = |phi|^2 omega^3/3!.  Throws NotPositiveError.
double norm_squared(const Form<double>& phi, const Frame& f);

double primitivity_residual(const Form<double>& phi, const Frame& f);
double closedness_residual(const Form<double>& phi, const Frame& f);

struct MetricPair {
  Mat6 g;        // g(X,Y) = omega(X, J Y)
  Mat6 g_tilde;  // g_tilde_ij = -phi_jkp phi_iab omega^{ka} omega^{pb}
};

/// Both metric formulas, computed independently and cross-checked to tol.
/// Throws NotPositiveError when lambda >= 0 and NotPrimitiveError when
/// omega ^ phi != 0 (equivalently, when the candidate metric is asymmetric).
MetricPair metric_from(const Form<double>& phi, const Frame& f, double tol = 1e-10);

/// A compatible pair (omega, phi) with every derived quantity cached.
struct TypeIIAStructure {
  const Frame* frame;
  Form<double> phi;
  Form<double> phi_hat;
  Mat6 K;
  Mat6 J;
  Mat6 g;
  Mat6 g_tilde;
  double lambda;
  double norm_sq;
};

/// Validates positivity and primitivity (and closedness unless disabled for
/// pointwise use) and assembles the cached structure.
TypeIIAStructure make_structure(const Frame& f, const Form<double>& phi, bool check_closed = true,
                                double tol = 1e-10);

}  // namespace symflow
