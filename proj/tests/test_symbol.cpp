#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "symflow/symbol.hpp"

using namespace symflow;
using F = Form<double>;

namespace {

F e1_wedge(const F& gamma) { return wedge(F::basis(index_bit(1)), gamma); }

F kappa() { return F::term(1, {3, 4}) + F::term(-1, {5, 6}); }
F mu1p() { return F::term(1, {4, 5}) + F::term(1, {3, 6}); }
F mu2p() { return F::term(1, {3, 5}) + F::term(1, {4, 6}); }
F mu1m() { return F::term(1, {4, 5}) + F::term(-1, {3, 6}); }
F mu2m() { return F::term(1, {3, 5}) + F::term(-1, {4, 6}); }

/// Independent route to the symbol image: finite differences of the full
/// nonlinear map phi -> w(|phi|^2) phi_hat, then xi ^ Lambda[xi ^ .].
F symbol_image_fd(const SymbolProblem& p, const F& dphi, double h) {
  auto weighted = [&](const F& phi) {
    const Frame& f = *p.frame;
    F hat = dual_three_form(phi, f);
    double n2 = wedge(phi, hat).coeff(kFullMask) / f.vol_coeff();
    return hat * weight_value(p.spec, n2);
  };
  F delta = (weighted(p.phi + dphi * h) - weighted(p.phi - dphi * h)) * (1.0 / (2.0 * h));
  return wedge(p.xi, lambda_contract(wedge(p.xi, delta), *p.frame));
}

/// Symplectic generators: rotation inside the pair plane (a,a+1) and the
/// unitary mixing of two pair planes.
Mat6 pair_rotation(int pair, double theta) {
  Mat6 m = Mat6::Identity();
  int a = 2 * pair;
  m(a, a) = std::cos(theta);
  m(a + 1, a + 1) = std::cos(theta);
  m(a, a + 1) = -std::sin(theta);
  m(a + 1, a) = std::sin(theta);
  return m;
}

Mat6 pair_mixing(int pa, int pb, double theta) {
  Mat6 m = Mat6::Identity();
  int a = 2 * pa, b = 2 * pb;
  for (int off = 0; off < 2; ++off) {
    m(a + off, a + off) = std::cos(theta);
    m(b + off, b + off) = std::cos(theta);
    m(a + off, b + off) = -std::sin(theta);
    m(b + off, a + off) = std::sin(theta);
  }
  return m;
}

Mat6 pair_squeeze(int pair, double s) {
  Mat6 m = Mat6::Identity();
  m(2 * pair, 2 * pair) = s;
  m(2 * pair + 1, 2 * pair + 1) = 1.0 / s;
  return m;
}

}  // namespace

TEST_CASE("constraint space: dimension, constraints, paper basis") {
  SymbolProblem p = SymbolProblem::canonical();
  auto basis = constraint_space(p);
  REQUIRE(basis.size() == 5);
  const Frame& f = *p.frame;
  for (const auto& b : basis) {
    CHECK(wedge(p.xi, b).max_abs() < 1e-14);
    CHECK(lambda_contract(b, f).max_abs() < 1e-14);
  }
  CHECK(max_abs_diff(basis[0], e1_wedge(kappa())) == 0.0);
  CHECK(lambda_contract(e1_wedge(kappa()), f).max_abs() == 0.0);

  // generic covector: numerical nullspace, still 5-dimensional
  SymbolProblem q = SymbolProblem::canonical();
  q.xi = F::term(0.8, {1}) + F::term(-0.6, {4});
  auto nbasis = constraint_space(q);
  CHECK(nbasis.size() == 5);
  for (const auto& b : nbasis) {
    CHECK(wedge(q.xi, b).max_abs() < 1e-10);
    CHECK(lambda_contract(b, f).max_abs() < 1e-10);
  }

  SymbolProblem bad = SymbolProblem::canonical();
  bad.xi = F(1);
  CHECK_THROWS_AS((void)constraint_space(bad), ConfigError);
}

TEST_CASE("Hitchin gradient symbol: the displayed eigenvector images") {
  SymbolProblem p = SymbolProblem::canonical();
  SymbolReport rep = symbol_spectrum(p);
  REQUIRE(rep.canonical_basis);

  Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(5, 5);
  expected(0, 0) = 1.0;  // kappa -> kappa
  expected(2, 2) = 1.0;  // mu2+ -> mu2+
  expected(3, 3) = 1.0;  // mu1- -> mu1-
  CHECK((rep.matrix - expected).cwiseAbs().maxCoeff() < 1e-12);

  std::vector<double> want = {0, 0, 1, 1, 1};
  for (int i = 0; i < 5; ++i) CHECK(rep.eigenvalues[i] == doctest::Approx(want[i]).epsilon(1e-12));
  CHECK(rep.kernel_dim == 2);
  CHECK(rep.off_space_residual < 1e-12);
  CHECK(rep.max_imaginary < 1e-12);

  // the kernel is exactly span{mu1+, mu2-}: columns 1 and 4 of the matrix
  Eigen::VectorXd e_mu1p = Eigen::VectorXd::Unit(5, 1), e_mu2m = Eigen::VectorXd::Unit(5, 4);
  CHECK((rep.matrix * e_mu1p).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((rep.matrix * e_mu2m).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(max_abs_diff(rep.basis[1], e1_wedge(mu1p())) == 0.0);
  CHECK(max_abs_diff(rep.basis[4], e1_wedge(mu2m())) == 0.0);
}

TEST_CASE("Type IIA weight: exactly one zero eigenvalue") {
  SymbolReport rep = symbol_spectrum(SymbolProblem::canonical(Weight::TypeIIA));
  CHECK(rep.kernel_dim == 1);
  // regression values confirmed against the finite-difference route below
  CHECK(rep.eigenvalues[0] == doctest::Approx(0.0).epsilon(1e-12));
  for (int i = 1; i < 5; ++i) CHECK(rep.eigenvalues[i] == doctest::Approx(1.0 / 16.0).epsilon(1e-10));
}

TEST_CASE("symbol map agrees with the finite-difference route") {
  std::mt19937 rng(83);
  for (Weight w : {Weight::HitchinGradient, Weight::TypeIIA, Weight::EpsilonReg}) {
    SymbolProblem p = SymbolProblem::canonical(w, 0.5);
    auto basis = constraint_space(p);
    SymbolReport rep = symbol_spectrum(p);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      F fd = symbol_image_fd(p, basis[j], 1e-6);
      F analytic(3);
      for (std::size_t i = 0; i < basis.size(); ++i)
        analytic = analytic + basis[i] * rep.matrix(static_cast<int>(i), static_cast<int>(j));
      CHECK(max_abs_diff(fd, analytic) < 1e-8);
    }
  }
}

TEST_CASE("linearized dual: image rules at the adapted point") {
  const Frame& f = preset_frame(Preset::Torus);
  F phi = test::model_phi();

  // delta phi orthogonal to phi and phi_hat: delta phi_hat = -J delta phi
  F dphi = e1_wedge(mu2p());
  TypeIIAStructure st = make_structure(f, phi, false);
  CHECK(std::abs(inner_product(dphi, st.phi)) < 1e-14);
  CHECK(std::abs(inner_product(dphi, st.phi_hat)) < 1e-14);
  CHECK(max_abs_diff(linearized_dual(phi, dphi, f), -endo_pullback(st.J, dphi)) < 1e-13);

  // kappa direction is a fixed vector of the full symbol map
  SymbolProblem p = SymbolProblem::canonical();
  SymbolReport rep = symbol_spectrum(p);
  Eigen::VectorXd e_kappa = Eigen::VectorXd::Zero(5);
  e_kappa[0] = 1.0;
  CHECK(((rep.matrix * e_kappa) - e_kappa).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("linearized dual vs central differences: second-order agreement") {
  const Frame& f = preset_frame(Preset::Torus);
  std::mt19937 rng(89);
  std::uniform_real_distribution<double> d(-1.0, 1.0);

  F phi = test::model_phi();
  // also a perturbed primitive positive base point
  F phi2 = test::model_phi() + 0.12 * e1_wedge(mu1m()) + 0.08 * wedge(F::basis(index_bit(2)), mu2p());
  REQUIRE(lambda_invariant(phi2, f) < 0.0);
  REQUIRE(primitivity_residual(phi2, f) < 1e-13);

  for (const F& base : {phi, phi2}) {
    for (int trial = 0; trial < 10; ++trial) {
      Eigen::VectorXd rv(20);
      for (int i = 0; i < 20; ++i) rv[i] = d(rng);
      F dphi = from_coefficients(3, rv);
      F analytic = linearized_dual(base, dphi, f);
      auto fd_err = [&](double h) {
        F fd = (dual_three_form(base + dphi * h, f) - dual_three_form(base - dphi * h, f)) * (1.0 / (2 * h));
        return max_abs_diff(analytic, fd);
      };
      double e4 = fd_err(1e-4), e5 = fd_err(1e-5);
      CHECK(e5 < 1e-6 * std::max(1.0, analytic.max_abs()));
      if (e5 > 1e-12) CHECK(e4 / e5 > 30.0);  // ~h^2 scaling unless at roundoff
    }
  }
}

TEST_CASE("spectrum: xi choices and homogeneity") {
  SymbolProblem p3 = SymbolProblem::canonical();
  p3.xi = F::basis(index_bit(3));
  SymbolReport rep3 = symbol_spectrum(p3);
  std::vector<double> want = {0, 0, 1, 1, 1};
  for (int i = 0; i < 5; ++i) CHECK(rep3.eigenvalues[i] == doctest::Approx(want[i]).epsilon(1e-10));
  CHECK(rep3.kernel_dim == 2);

  SymbolProblem pc = SymbolProblem::canonical();
  pc.xi = F::term(2.0, {1});
  SymbolReport repc = symbol_spectrum(pc);
  for (int i = 0; i < 5; ++i) CHECK(repc.eigenvalues[i] == doctest::Approx(4.0 * want[i]).epsilon(1e-10));

  SymbolProblem zero = SymbolProblem::canonical();
  zero.xi = F(1);
  CHECK_THROWS_AS((void)symbol_spectrum(zero), ConfigError);
}

TEST_CASE("spectrum is invariant under symplectic changes of frame") {
  std::mt19937 rng(97);
  std::uniform_real_distribution<double> ang(-1.2, 1.2), sq(0.75, 1.3);
  SymbolProblem base = SymbolProblem::canonical();
  SymbolReport ref = symbol_spectrum(base);

  for (int trial = 0; trial < 6; ++trial) {
    Mat6 T = pair_rotation(trial % 3, ang(rng)) * pair_mixing(0, (trial % 2) + 1, ang(rng)) *
             pair_squeeze((trial + 1) % 3, sq(rng));
    const Mat6& omega = base.frame->omega_matrix();
    REQUIRE((T.transpose() * omega * T - omega).cwiseAbs().maxCoeff() < 1e-12);

    SymbolProblem moved = base;
    moved.phi = endo_pullback(T, base.phi);
    moved.xi = endo_pullback(T, base.xi);
    SymbolReport rep = symbol_spectrum(moved);
    REQUIRE_FALSE(rep.canonical_basis);
    for (int i = 0; i < 5; ++i) CHECK(rep.eigenvalues[i] == doctest::Approx(ref.eigenvalues[i]).epsilon(1e-8));
    CHECK(rep.kernel_dim == ref.kernel_dim);
  }
}

TEST_CASE("adapt_structure recovers the model from a transformed structure") {
  std::mt19937 rng(101);
  std::uniform_real_distribution<double> ang(-1.0, 1.0), sq(0.8, 1.25), scale(0.6, 1.8);
  const Frame& f = preset_frame(Preset::Torus);
  for (int trial = 0; trial < 5; ++trial) {
    Mat6 T = pair_mixing(0, 1, ang(rng)) * pair_rotation(1, ang(rng)) * pair_squeeze(2, sq(rng)) *
             pair_mixing(1, 2, ang(rng));
    F phi = endo_pullback(T, test::model_phi()) * scale(rng);
    TypeIIAStructure st = make_structure(f, phi, false);
    AdaptedTransform at = adapt_structure(st);
    CHECK(at.model_residual < 1e-10);
    CHECK(max_abs_diff(endo_pullback(at.T, f.omega()), f.omega()) < 1e-10);
  }
}
