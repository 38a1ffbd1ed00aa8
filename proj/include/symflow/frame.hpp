#pragma once

// A 6-element coframe with a constant-coefficient differential table (the
// structure constants of an invariant frame, or all zero for coordinate
// frames), a symplectic form, and the operators built from them: the Leibniz
// extension of d, the Lefschetz contraction Lambda, and the Hodge star of a
// frame metric.

#include <array>
#include <string>

#include "symflow/forms.hpp"

namespace symflow {

class Frame {
 public:
  /// differential[i] = d(e^{i+1}) as a constant 2-form.  deriv_axis maps a
  /// coframe slot to the spatial axis (0..2) whose partial derivatives its
  /// coefficients carry, or -1 for purely algebraic slots.
  Frame(std::string name, std::array<Form<double>, kDim> differential, Form<double> omega,
        std::array<int, kDim> deriv_axis = {-1, -1, -1, -1, -1, -1});

  const std::string& name() const { return name_; }
  const Form<double>& d_of_coframe(int index_1based) const { return differential_[index_1based - 1]; }
  const Form<double>& omega() const { return omega_; }
  const std::array<int, kDim>& deriv_axis() const { return deriv_axis_; }

  /// omega(e_i, e_j).
  const Mat6& omega_matrix() const { return omega_matrix_; }

  /// Pairing matrix of the Lefschetz contraction, fixed so that
  /// Lambda(omega) = +3 (inverse transpose of the omega matrix).
  const Mat6& contraction_matrix() const { return contraction_; }

  /// omega^3/3! = vol_coeff * e^{123456}.
  double vol_coeff() const { return vol_coeff_; }
  Form<double> volume() const { return Form<double>::basis(kFullMask) * vol_coeff_; }

  /// Leibniz expansion of d on a basis monomial e^I (degree <= 5).
  const Form<double>& d_of_basis(IndexMask mask) const { return d_basis_[mask]; }

  /// Checks d(d e^i) = 0 (Jacobi) and d(omega) = 0; throws on violation.
  void validate(double tol = 1e-12) const;

 private:
  std::string name_;
  std::array<Form<double>, kDim> differential_;
  Form<double> omega_;
  std::array<int, kDim> deriv_axis_;
  Mat6 omega_matrix_;
  Mat6 contraction_;
  double vol_coeff_;
  std::vector<Form<double>> d_basis_;
};

/// d(c e^I) = sum_axis (d_axis c) e^axis ^ e^I + c d(e^I).  The structure part
/// d(e^I) comes from the frame table by Leibniz; d o d = 0 to ring tolerance.
template <CoefficientRing R>
Form<R> exterior_d(const Form<R>& a, const Frame& f) {
  if (a.degree() >= kDim) throw DegreeError("exterior_d: degree must be <= 5");
  Form<R> out(a.degree() + 1);
  for (const auto& [mask, c] : a.terms()) {
    for (int slot = 0; slot < kDim; ++slot) {
      const int axis = f.deriv_axis()[slot];
      if (axis < 0) continue;
      const IndexMask bit = index_bit(slot + 1);
      const int sign = wedge_sign(bit, mask);
      if (sign == 0) continue;
      R dc = ring_partial(c, axis);
      if (ring_is_zero(dc, 0.0)) continue;
      out.add_term(static_cast<IndexMask>(bit | mask), sign < 0 ? -dc : dc);
    }
    for (const auto& [m2, c2] : f.d_of_basis(mask).terms()) out.add_term(m2, c * c2);
  }
  out.prune();
  return out;
}

/// Lefschetz contraction Lambda_omega = 1/2 sum pi^{pq} iota_q iota_p with the
/// frame's pairing matrix; on the standard frame this is
/// sum_k iota_{e_{2k}} iota_{e_{2k-1}}.
template <CoefficientRing R>
Form<R> lambda_contract(const Form<R>& a, const Frame& f) {
  if (a.degree() < 2) throw DegreeError("lambda_contract: degree must be >= 2");
  Form<R> out(a.degree() - 2);
  const Mat6& pi = f.contraction_matrix();
  for (const auto& [mask, c] : a.terms()) {
    for (int p = 0; p < kDim; ++p) {
      if (!(mask & (1u << p))) continue;
      const IndexMask m1 = static_cast<IndexMask>(mask & ~(1u << p));
      const int s1 = interior_sign(p, mask);
      for (int q = 0; q < kDim; ++q) {
        if (pi(p, q) == 0.0 || !(m1 & (1u << q))) continue;
        const int s2 = interior_sign(q, m1);
        const double factor = 0.5 * pi(p, q) * s1 * s2;
        out.add_term(static_cast<IndexMask>(m1 & ~(1u << q)), c * factor);
      }
    }
  }
  out.prune();
  return out;
}

/// Hodge star of the frame metric g (orientation from the frame volume):
/// alpha ^ *beta = <alpha, beta>_g vol_g.
template <CoefficientRing R>
Form<R> hodge_star(const Form<R>& a, const Mat6& g, const Frame& f) {
  const int k = a.degree();
  const Mat6 gram = g.inverse();
  const double det = g.determinant();
  if (!(det > 0.0)) throw DegenerateFrameError("hodge_star: metric is not positive definite");
  const double vol = (f.vol_coeff() < 0 ? -1.0 : 1.0) * std::sqrt(det);
  Form<R> out(kDim - k);
  for (IndexMask kmask : masks_of_degree(k)) {
    const Form<double> ek = Form<double>::basis(kmask);
    // <e^K, a>_g, ring-valued
    R inner{};
    bool any = false;
    const auto ik = mask_indices(kmask);
    for (const auto& [ma, ca] : a.terms()) {
      const auto ia = mask_indices(ma);
      double sub_det = 1.0;
      if (k > 0) {
        Eigen::MatrixXd sub(k, k);
        for (int r = 0; r < k; ++r)
          for (int s = 0; s < k; ++s) sub(r, s) = gram(ik[r] - 1, ia[s] - 1);
        sub_det = sub.determinant();
      }
      if (sub_det == 0.0) continue;
      inner = inner + ca * sub_det;
      any = true;
    }
    if (!any) continue;
    const IndexMask comp = static_cast<IndexMask>(kFullMask & ~kmask);
    const int sign = wedge_sign(kmask, comp);
    out.add_term(comp, inner * (vol * sign));
  }
  out.prune();
  return out;
}

/// Codifferential of the frame metric g: d^dagger = -*d* in six dimensions.
template <CoefficientRing R>
Form<R> codifferential(const Form<R>& a, const Mat6& g, const Frame& f) {
  return -hodge_star(exterior_d(hodge_star(a, g, f), f), g, f);
}

}  // namespace symflow
