#pragma once

// Principal-symbol analysis of the flow family at a point: the constrained
// variation space W = {dphi : xi ^ dphi = 0, Lambda dphi = 0}, the linearized
// dual map, and the eigenvalues of the symbol restricted to W.

#include <nlohmann/json_fwd.hpp>

#include "symflow/flows.hpp"

namespace symflow {

/// Linearization of phi -> phi_hat at a positive primitive base point:
/// dphi_hat = -J dphi - 2<dphi,phi_hat>/|phi|^2 phi + 2<dphi,phi>/|phi|^2 phi_hat,
/// inner products in the metric g_phi.
Form<double> linearized_dual(const Form<double>& phi, const Form<double>& dphi, const Frame& f);

/// Same linearization but reusing a cached structure at the base point.
Form<double> linearized_dual(const TypeIIAStructure& st, const Form<double>& dphi);

struct SymbolProblem {
  const Frame* frame;
  Form<double> phi;       // positive primitive base point (constant coefficients)
  Form<double> xi;        // nonzero covector (1-form)
  FlowSpec spec;          // supplies the weight family

  static SymbolProblem canonical(Weight w = Weight::HitchinGradient, double epsilon = 0.0);
};

/// Basis of the 5-dimensional constraint space W.  For the canonical setup
/// (adapted model form, xi = e^1) this is the block basis
/// e^1 ^ {kappa, mu1+, mu2+, mu1-, mu2-} with kappa = e^34 - e^56,
/// mu1± = e^45 ± e^36, mu2± = e^35 ± e^46; otherwise an orthonormal
/// numerical nullspace basis.
std::vector<Form<double>> constraint_space(const SymbolProblem& p);

struct SymbolReport {
  std::vector<Form<double>> basis;
  Eigen::MatrixXd matrix;             // symbol map in that basis
  std::vector<double> eigenvalues;    // sorted ascending (real parts)
  double max_imaginary;               // largest |Im| over the spectrum
  int kernel_dim;                     // eigenvalues with |ev| < kernel_tol
  double kernel_tol;
  double off_space_residual;          // part of the image outside span(W)
  bool canonical_basis;
};

/// Symbol of dphi -> xi ^ Lambda[xi ^ delta(w phi_hat)(dphi)] on W, with the
/// sign fixed so that the Hitchin-gradient spectrum on the adapted model is
/// {0, 0, 1, 1, 1}.
SymbolReport symbol_spectrum(const SymbolProblem& p);

nlohmann::json symbol_report_json(const SymbolProblem& p, const SymbolReport& rep);

/// Frame adaptation of a positive primitive structure: a basis change T
/// (columns = new frame vectors) with T*omega = e^12 + e^34 + e^56 and
/// T*phi equal to the adapted model form (phase rotation included).
struct AdaptedTransform {
  Mat6 T;
  Form<double> phi_adapted;   // pullback of phi/|phi| through T, equals the model
  double model_residual;      // ||phi_adapted - model||
};

AdaptedTransform adapt_structure(const TypeIIAStructure& st);

/// The adapted model pair on the standard frame.
Form<double> adapted_model_phi();
Form<double> adapted_model_phi_hat();

}  // namespace symflow
