#include "symflow/symbol.hpp"

#include <cmath>

#include <nlohmann/json.hpp>

namespace symflow {

using F = Form<double>;

F adapted_model_phi() {
  return 0.5 * (F::term(1, {1, 3, 5}) + F::term(-1, {1, 4, 6}) + F::term(-1, {2, 4, 5}) + F::term(-1, {2, 3, 6}));
}

F adapted_model_phi_hat() {
  return 0.5 * (F::term(1, {1, 3, 6}) + F::term(1, {1, 4, 5}) + F::term(1, {2, 3, 5}) + F::term(-1, {2, 4, 6}));
}

Form<double> linearized_dual(const TypeIIAStructure& st, const Form<double>& dphi) {
  const Mat6 gram = st.g.inverse();
  const double ip_phi = inner_product(dphi, st.phi, gram);
  const double ip_hat = inner_product(dphi, st.phi_hat, gram);
  return -endo_pullback(st.J, dphi) - st.phi * (2.0 * ip_hat / st.norm_sq) +
         st.phi_hat * (2.0 * ip_phi / st.norm_sq);
}

Form<double> linearized_dual(const Form<double>& phi, const Form<double>& dphi, const Frame& f) {
  TypeIIAStructure st = make_structure(f, phi, /*check_closed=*/false);
  return linearized_dual(st, dphi);
}

SymbolProblem SymbolProblem::canonical(Weight w, double epsilon) {
  FlowSpec spec;
  spec.weight = w;
  spec.epsilon = epsilon;
  return {&preset_frame(Preset::Torus), adapted_model_phi(), F::basis(index_bit(1)), spec};
}

namespace {

bool is_canonical(const SymbolProblem& p) {
  return max_abs_diff(p.phi, adapted_model_phi()) < 1e-12 &&
         max_abs_diff(p.xi, F::basis(index_bit(1))) < 1e-12 &&
         (p.frame->omega_matrix() - preset_frame(Preset::Torus).omega_matrix()).cwiseAbs().maxCoeff() < 1e-12;
}

std::vector<F> paper_basis() {
  const F e1 = F::basis(index_bit(1));
  const F kappa = F::term(1, {3, 4}) + F::term(-1, {5, 6});
  const F mu1p = F::term(1, {4, 5}) + F::term(1, {3, 6});
  const F mu2p = F::term(1, {3, 5}) + F::term(1, {4, 6});
  const F mu1m = F::term(1, {4, 5}) + F::term(-1, {3, 6});
  const F mu2m = F::term(1, {3, 5}) + F::term(-1, {4, 6});
  return {wedge(e1, kappa), wedge(e1, mu1p), wedge(e1, mu2p), wedge(e1, mu1m), wedge(e1, mu2m)};
}

/// Orthonormal nullspace basis of the constraints xi ^ dphi = 0, Lambda dphi = 0.
std::vector<F> numeric_constraint_basis(const SymbolProblem& p) {
  const auto& three = masks_of_degree(3);
  const int n3 = static_cast<int>(three.size());
  const int n4 = static_cast<int>(masks_of_degree(4).size());
  Eigen::MatrixXd constraints(n4 + kDim, n3);
  for (int j = 0; j < n3; ++j) {
    F basis_j = F::basis(three[static_cast<std::size_t>(j)]);
    Eigen::VectorXd wcol = [&] {
      F w4 = wedge(p.xi, basis_j);
      const auto& four = masks_of_degree(4);
      Eigen::VectorXd v(n4);
      for (int r = 0; r < n4; ++r) v[r] = w4.coeff(four[static_cast<std::size_t>(r)]);
      return v;
    }();
    F l1 = lambda_contract(basis_j, *p.frame);
    Eigen::VectorXd lcol(kDim);
    for (int r = 1; r <= kDim; ++r) lcol[r - 1] = l1.coeff(index_bit(r));
    constraints.col(j) << wcol, lcol;
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(constraints, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  double tol = 1e-10 * std::max(1.0, sv.size() > 0 ? sv[0] : 0.0);
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > tol) ++rank;
  std::vector<F> out;
  for (int j = rank; j < n3; ++j) out.push_back(from_coefficients(3, svd.matrixV().col(j)));
  return out;
}

}  // namespace

std::vector<Form<double>> constraint_space(const SymbolProblem& p) {
  if (p.xi.degree() != 1 || p.xi.max_abs() == 0.0) throw ConfigError("constraint_space: xi must be a nonzero 1-form");
  if (is_canonical(p)) return paper_basis();
  return numeric_constraint_basis(p);
}

SymbolReport symbol_spectrum(const SymbolProblem& p) {
  if (p.xi.degree() != 1 || p.xi.max_abs() == 0.0) throw ConfigError("symbol_spectrum: xi must be a nonzero 1-form");
  const Frame& f = *p.frame;
  TypeIIAStructure st = make_structure(f, p.phi, /*check_closed=*/false);
  const Mat6 gram = st.g.inverse();
  const double w = weight_value(p.spec, st.norm_sq);
  const double wp = weight_derivative(p.spec, st.norm_sq);

  auto image = [&](const F& dphi) -> F {
    // delta(w(|phi|^2) phi_hat) = w'(s) * 2<dphi,phi> phi_hat + w(s) dphi_hat
    const double dnorm = 2.0 * inner_product(dphi, st.phi, gram);
    F delta_w_hat = st.phi_hat * (wp * dnorm) + linearized_dual(st, dphi) * w;
    return wedge(p.xi, lambda_contract(wedge(p.xi, delta_w_hat), f));
  };

  SymbolReport rep;
  rep.canonical_basis = is_canonical(p);
  rep.basis = constraint_space(p);
  const int dim = static_cast<int>(rep.basis.size());

  Eigen::MatrixXd B(static_cast<int>(masks_of_degree(3).size()), dim);
  for (int j = 0; j < dim; ++j) B.col(j) = to_coefficients(rep.basis[static_cast<std::size_t>(j)]);

  rep.matrix.resize(dim, dim);
  rep.off_space_residual = 0.0;
  auto solver = B.colPivHouseholderQr();
  for (int j = 0; j < dim; ++j) {
    Eigen::VectorXd img = to_coefficients(image(rep.basis[static_cast<std::size_t>(j)]));
    Eigen::VectorXd coords = solver.solve(img);
    rep.matrix.col(j) = coords;
    rep.off_space_residual = std::max(rep.off_space_residual, (img - B * coords).cwiseAbs().maxCoeff());
  }

  Eigen::EigenSolver<Eigen::MatrixXd> es(rep.matrix);
  rep.max_imaginary = es.eigenvalues().imag().cwiseAbs().maxCoeff();
  rep.eigenvalues.resize(static_cast<std::size_t>(dim));
  for (int i = 0; i < dim; ++i) rep.eigenvalues[static_cast<std::size_t>(i)] = es.eigenvalues()[i].real();
  std::sort(rep.eigenvalues.begin(), rep.eigenvalues.end());

  double scale = 0.0;
  for (double ev : rep.eigenvalues) scale = std::max(scale, std::abs(ev));
  rep.kernel_tol = 1e-8 * std::max(1.0, scale);
  rep.kernel_dim = 0;
  for (double ev : rep.eigenvalues)
    if (std::abs(ev) < rep.kernel_tol) ++rep.kernel_dim;
  return rep;
}

nlohmann::json symbol_report_json(const SymbolProblem& p, const SymbolReport& rep) {
  nlohmann::json j;
  j["weight"] = to_string(p.spec.weight);
  if (p.spec.weight == Weight::EpsilonReg) j["epsilon"] = p.spec.epsilon;
  j["xi"] = to_string(p.xi);
  j["canonical_basis"] = rep.canonical_basis;
  j["basis"] = nlohmann::json::array();
  for (const auto& b : rep.basis) j["basis"].push_back(to_string(b));
  j["matrix"] = nlohmann::json::array();
  for (int r = 0; r < rep.matrix.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (int c = 0; c < rep.matrix.cols(); ++c) row.push_back(rep.matrix(r, c));
    j["matrix"].push_back(row);
  }
  j["eigenvalues"] = rep.eigenvalues;
  j["max_imaginary"] = rep.max_imaginary;
  j["kernel_dim"] = rep.kernel_dim;
  j["kernel_tol"] = rep.kernel_tol;
  j["off_space_residual"] = rep.off_space_residual;
  return j;
}

AdaptedTransform adapt_structure(const TypeIIAStructure& st) {
  const double norm = std::sqrt(st.norm_sq);
  const Mat6& g = st.g;
  const Mat6& J = st.J;

  auto g_ip = [&](const Vec6& x, const Vec6& y) { return double(x.transpose() * g * y); };

  // g-orthonormal basis (v1, Jv1, v3, Jv3, v5, Jv5); the g-orthogonal
  // complement of a J-invariant subspace is J-invariant.
  std::array<Vec6, kDim> v;
  int have = 0;
  for (int seed = 0; seed < kDim && have < kDim; ++seed) {
    Vec6 cand = Vec6::Unit(seed);
    for (int r = 0; r < have; ++r) cand -= g_ip(v[static_cast<std::size_t>(r)], cand) * v[static_cast<std::size_t>(r)];
    double len = std::sqrt(g_ip(cand, cand));
    if (len < 1e-8) continue;
    v[static_cast<std::size_t>(have)] = cand / len;
    v[static_cast<std::size_t>(have + 1)] = J * v[static_cast<std::size_t>(have)];
    have += 2;
  }
  if (have != kDim) throw Error("adapt_structure: failed to build an adapted basis");

  Mat6 T;
  for (int c = 0; c < kDim; ++c) T.col(c) = v[static_cast<std::size_t>(c)];

  const Frame& std_frame = preset_frame(Preset::Torus);
  F unit_phi = st.phi * (1.0 / norm);
  F pulled = endo_pullback(T, unit_phi);

  // kill the residual phase: z1 -> e^{i alpha} z1 rotates phi -> cos a phi - sin a phi_hat
  const F model = adapted_model_phi();
  const F model_hat = adapted_model_phi_hat();
  const double cos_t = inner_product(pulled, model, Mat6::Identity());
  const double sin_t = -inner_product(pulled, model_hat, Mat6::Identity());
  const double theta = std::atan2(sin_t, cos_t);
  F best = pulled;
  double best_resid = max_abs_diff(pulled, model);
  Mat6 bestT = T;
  for (double alpha : {theta, -theta}) {
    Mat6 rot = Mat6::Identity();
    rot(0, 0) = std::cos(alpha);
    rot(1, 1) = std::cos(alpha);
    rot(0, 1) = -std::sin(alpha);
    rot(1, 0) = std::sin(alpha);
    Mat6 Tr = T * rot;
    F cand = endo_pullback(Tr, unit_phi);
    double resid = max_abs_diff(cand, model);
    if (resid < best_resid) {
      best_resid = resid;
      best = cand;
      bestT = Tr;
    }
  }

  if (max_abs_diff(endo_pullback(bestT, st.frame->omega()), std_frame.omega()) > 1e-8)
    throw Error("adapt_structure: transform does not carry omega to the standard form");

  return {bestT, best, best_resid};
}

}  // namespace symflow
