#include "symflow/homogeneous.hpp"

#include <cmath>
#include <random>

namespace symflow {

namespace {

using F = Form<double>;

std::array<F, kDim> zero_table() {
  return {F(2), F(2), F(2), F(2), F(2), F(2)};
}

F standard_omega() {
  return F::term(1, {1, 2}) + F::term(1, {3, 4}) + F::term(1, {5, 6});
}

Frame make_torus() {
  return Frame("torus", zero_table(), standard_omega());
}

Frame make_nilmanifold() {
  auto d = zero_table();
  d[3] = F::term(1, {1, 5});  // d e^4 = e^15
  d[5] = F::term(1, {1, 3});  // d e^6 = e^13
  return Frame("nilmanifold_dbt", d, standard_omega());
}

Frame make_solvmanifold() {
  const double lam = solvmanifold_lambda();
  auto d = zero_table();
  d[0] = F::term(-lam, {1, 5});
  d[1] = F::term(lam, {2, 5});
  d[2] = F::term(-lam, {3, 6});
  d[3] = F::term(lam, {4, 6});
  return Frame("solvmanifold_tv", d, standard_omega());
}

// phi_{a,b} = (1+a) e^135 - e^146 - e^245 - e^236 + b (e^134 - e^156)
F nil_offset() {
  return F::term(1, {1, 3, 5}) + F::term(-1, {1, 4, 6}) + F::term(-1, {2, 4, 5}) + F::term(-1, {2, 3, 6});
}

std::vector<F> nil_basis() {
  return {F::term(1, {1, 3, 5}), F::term(1, {1, 3, 4}) + F::term(-1, {1, 5, 6})};
}

// alpha (e^135+e^136) + beta (e^145-e^146) + gamma (e^235-e^236) - delta (e^245+e^246)
std::vector<F> solv_basis() {
  return {F::term(1, {1, 3, 5}) + F::term(1, {1, 3, 6}), F::term(1, {1, 4, 5}) + F::term(-1, {1, 4, 6}),
          F::term(1, {2, 3, 5}) + F::term(-1, {2, 3, 6}), F::term(-1, {2, 4, 5}) + F::term(-1, {2, 4, 6})};
}

void check_family_closed_primitive(const AnsatzFamily& fam, unsigned seed) {
  std::mt19937 rng(seed);
  std::uniform_real_distribution<double> dist(-2.0, 2.0);
  for (int trial = 0; trial < 8; ++trial) {
    Eigen::VectorXd p(fam.dimension());
    for (int i = 0; i < p.size(); ++i) p[i] = dist(rng);
    F phi = fam.member(p);
    if (exterior_d(phi, fam.frame()).max_abs() > 1e-12)
      throw DegenerateFrameError("ansatz '" + fam.name() + "' is not closed");
    if (wedge(fam.frame().omega(), phi).max_abs() > 1e-12)
      throw NotPrimitiveError("ansatz '" + fam.name() + "' is not primitive");
  }
}

}  // namespace

Preset preset_from_string(const std::string& name) {
  if (name == "torus") return Preset::Torus;
  if (name == "nilmanifold" || name == "nilmanifold_dbt") return Preset::NilmanifoldDbt;
  if (name == "solvmanifold" || name == "solvmanifold_tv") return Preset::SolvmanifoldTv;
  throw ConfigError("unknown preset '" + name + "' (expected torus, nilmanifold, solvmanifold)");
}

std::string to_string(Preset p) {
  switch (p) {
    case Preset::Torus: return "torus";
    case Preset::NilmanifoldDbt: return "nilmanifold_dbt";
    case Preset::SolvmanifoldTv: return "solvmanifold_tv";
  }
  return "?";
}

double solvmanifold_lambda() {
  static const double lam = std::log((3.0 + std::sqrt(5.0)) / 2.0);
  return lam;
}

const Frame& preset_frame(Preset p) {
  static const Frame torus = [] {
    Frame f = make_torus();
    f.validate();
    return f;
  }();
  static const Frame nil = [] {
    Frame f = make_nilmanifold();
    f.validate();
    return f;
  }();
  static const Frame solv = [] {
    Frame f = make_solvmanifold();
    f.validate();
    return f;
  }();
  switch (p) {
    case Preset::Torus: return torus;
    case Preset::NilmanifoldDbt: return nil;
    case Preset::SolvmanifoldTv: return solv;
  }
  throw ConfigError("invalid preset enum");
}

AnsatzFamily::AnsatzFamily(const Frame* frame, std::string name, std::vector<std::string> param_names,
                           Form<double> offset, std::vector<Form<double>> basis)
    : frame_(frame),
      name_(std::move(name)),
      param_names_(std::move(param_names)),
      offset_(std::move(offset)),
      basis_(std::move(basis)) {
  const int rows = static_cast<int>(masks_of_degree(3).size());
  basis_matrix_.resize(rows, static_cast<int>(basis_.size()));
  for (std::size_t j = 0; j < basis_.size(); ++j) basis_matrix_.col(static_cast<int>(j)) = to_coefficients(basis_[j]);
}

Form<double> AnsatzFamily::member(const Eigen::VectorXd& params) const {
  if (params.size() != dimension()) throw ConfigError("ansatz '" + name_ + "' expects " +
                                                      std::to_string(dimension()) + " parameters");
  Form<double> phi = offset_;
  for (int j = 0; j < dimension(); ++j) phi = phi + basis_[static_cast<std::size_t>(j)] * params[j];
  return phi;
}

AnsatzFamily::Projection AnsatzFamily::project_tangent(const Form<double>& v) const {
  Eigen::VectorXd rhs = to_coefficients(v);
  Eigen::VectorXd coords = basis_matrix_.colPivHouseholderQr().solve(rhs);
  Eigen::VectorXd remainder = rhs - basis_matrix_ * coords;
  return {coords, remainder.cwiseAbs().maxCoeff()};
}

bool AnsatzFamily::in_tangent_span(const Form<double>& v, double tol) const {
  return project_tangent(v).residual <= tol;
}

const AnsatzFamily& preset_ansatz(Preset p) {
  static const AnsatzFamily torus_family = [] {
    AnsatzFamily fam(&preset_frame(Preset::Torus), "torus", {"a", "b"}, nil_offset(), nil_basis());
    check_family_closed_primitive(fam, 101);
    return fam;
  }();
  static const AnsatzFamily nil_family = [] {
    AnsatzFamily fam(&preset_frame(Preset::NilmanifoldDbt), "nilmanifold", {"a", "b"}, nil_offset(), nil_basis());
    check_family_closed_primitive(fam, 102);
    return fam;
  }();
  static const AnsatzFamily solv_family = [] {
    AnsatzFamily fam(&preset_frame(Preset::SolvmanifoldTv), "solvmanifold", {"alpha", "beta", "gamma", "delta"},
                     Form<double>(3), solv_basis());
    check_family_closed_primitive(fam, 103);
    return fam;
  }();
  switch (p) {
    case Preset::Torus: return torus_family;
    case Preset::NilmanifoldDbt: return nil_family;
    case Preset::SolvmanifoldTv: return solv_family;
  }
  throw ConfigError("invalid preset enum");
}

}  // namespace symflow
