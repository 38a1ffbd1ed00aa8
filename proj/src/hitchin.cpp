#include "symflow/hitchin.hpp"

#include <cmath>

namespace symflow {

namespace {

/// Fully antisymmetric phi components as a dense lookup, phi[i][j][k] 0-based.
struct PhiComponents {
  double c[6][6][6] = {};
  explicit PhiComponents(const Form<double>& phi) {
    for (const auto& [mask, v] : phi.terms()) {
      const auto idx = mask_indices(mask);
      const int i = idx[0] - 1, j = idx[1] - 1, k = idx[2] - 1;
      c[i][j][k] = v;
      c[j][k][i] = v;
      c[k][i][j] = v;
      c[j][i][k] = -v;
      c[i][k][j] = -v;
      c[k][j][i] = -v;
    }
  }
};

}  // namespace

Mat6 k_endomorphism(const Form<double>& phi, const Frame& f) {
  if (phi.degree() != 3) throw DegreeError("k_endomorphism: phi must be a 3-form");
  Mat6 k_mat;
  for (int a = 1; a <= kDim; ++a) {
    Form<double> five = wedge(interior(a, phi), phi);
    for (int b = 1; b <= kDim; ++b) {
      Form<double> top = wedge(five, Form<double>::basis(index_bit(b)));
      k_mat(b - 1, a - 1) = top.coeff(kFullMask) / f.vol_coeff();
    }
  }
  return k_mat;
}

double lambda_invariant(const Form<double>& phi, const Frame& f) {
  Mat6 k_mat = k_endomorphism(phi, f);
  return (k_mat * k_mat).trace() / 6.0;
}

Mat6 almost_complex(const Form<double>& phi, const Frame& f) {
  Mat6 k_mat = k_endomorphism(phi, f);
  double lambda = (k_mat * k_mat).trace() / 6.0;
  if (!(lambda < 0.0))
    throw NotPositiveError("almost_complex: lambda(phi) = " + std::to_string(lambda) + " >= 0");
  return k_mat / std::sqrt(-lambda);
}

Form<double> dual_three_form(const Form<double>& phi, const Frame& f) {
  return endo_pullback(almost_complex(phi, f), phi);
}

double norm_squared(const Form<double>& phi, const Frame& f) {
  Form<double> top = wedge(phi, dual_three_form(phi, f));
  double n = top.coeff(kFullMask) / f.vol_coeff();
  if (!(n > 0.0)) throw NotPositiveError("norm_squared: phi ^ phi_hat is not positive");
  return n;
}

double primitivity_residual(const Form<double>& phi, const Frame& f) {
  return wedge(f.omega(), phi).max_abs();
}

double closedness_residual(const Form<double>& phi, const Frame& f) {
  return exterior_d(phi, f).max_abs();
}

MetricPair metric_from(const Form<double>& phi, const Frame& f, double tol) {
  Mat6 j_mat = almost_complex(phi, f);
  Mat6 g = f.omega_matrix() * j_mat;

  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  const double sym_resid = (g - g.transpose()).cwiseAbs().maxCoeff();
  const double prim_resid = primitivity_residual(phi, f);
  if (prim_resid > tol * std::max(1.0, phi.max_abs()) || sym_resid > tol * scale)
    throw NotPrimitiveError("metric_from: omega ^ phi residual " + std::to_string(prim_resid) +
                            ", metric asymmetry " + std::to_string(sym_resid));

  // independent route: g_tilde_ij = -phi_jkp phi_iab omega^{ka} omega^{pb}
  PhiComponents pc(phi);
  const Mat6& w = f.contraction_matrix();
  Mat6 g_tilde;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      double s = 0.0;
      for (int k = 0; k < kDim; ++k)
        for (int p = 0; p < kDim; ++p) {
          if (pc.c[j][k][p] == 0.0) continue;
          for (int a = 0; a < kDim; ++a) {
            if (w(k, a) == 0.0) continue;
            for (int b = 0; b < kDim; ++b) s += pc.c[j][k][p] * pc.c[i][a][b] * w(k, a) * w(p, b);
          }
        }
      g_tilde(i, j) = -s;
    }

  Form<double> top = wedge(phi, endo_pullback(j_mat, phi));
  const double n = top.coeff(kFullMask) / f.vol_coeff();
  const double route_resid = (g_tilde - n * g).cwiseAbs().maxCoeff();
  if (route_resid > tol * std::max(1.0, g_tilde.cwiseAbs().maxCoeff()))
    throw Error("metric_from: the two metric formulas disagree, residual " + std::to_string(route_resid));

  Eigen::SelfAdjointEigenSolver<Mat6> es(0.5 * (g + g.transpose()));
  if (es.eigenvalues().minCoeff() <= 0.0)
    throw NotPositiveError("metric_from: candidate metric is not positive definite");

  return {g, g_tilde};
}

TypeIIAStructure make_structure(const Frame& f, const Form<double>& phi, bool check_closed, double tol) {
  if (check_closed) {
    double d_resid = closedness_residual(phi, f);
    if (d_resid > tol * std::max(1.0, phi.max_abs()))
      throw Error("make_structure: phi is not closed, residual " + std::to_string(d_resid));
  }
  Mat6 k_mat = k_endomorphism(phi, f);
  double lambda = (k_mat * k_mat).trace() / 6.0;
  if (!(lambda < 0.0))
    throw NotPositiveError("make_structure: lambda(phi) = " + std::to_string(lambda) + " >= 0");
  MetricPair metrics = metric_from(phi, f, tol);
  Mat6 j_mat = k_mat / std::sqrt(-lambda);
  if ((j_mat * j_mat + Mat6::Identity()).cwiseAbs().maxCoeff() > tol)
    throw Error("make_structure: J^2 != -Id beyond tolerance");
  Form<double> phi_hat = endo_pullback(j_mat, phi);
  double n = wedge(phi, phi_hat).coeff(kFullMask) / f.vol_coeff();
  if (!(n > 0.0)) throw NotPositiveError("make_structure: |phi|^2 <= 0");
  return {&f, phi, std::move(phi_hat), k_mat, j_mat, metrics.g, metrics.g_tilde, lambda, n};
}

}  // namespace symflow
