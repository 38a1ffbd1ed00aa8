#pragma once

// Invariant coframes of the example geometries: the 6-torus control, the
// de Bartolomeis-Tomassini nilmanifold, and the Tomassini-Vezzoni
// solvmanifold, together with their flow-invariant families of closed
// primitive 3-forms.

#include <string>
#include <vector>

#include "symflow/frame.hpp"

namespace symflow {

enum class Preset { Torus, NilmanifoldDbt, SolvmanifoldTv };

Preset preset_from_string(const std::string& name);
std::string to_string(Preset p);

/// Structure constant of the solvable preset: log((3 + sqrt(5))/2).
double solvmanifold_lambda();

/// The preset frame, with omega = e^12 + e^34 + e^56.  Frames are immutable
/// and shared; validate() has already passed on them.
const Frame& preset_frame(Preset p);

/// A (possibly affine) family p -> offset + sum_m p_m basis_m of closed
/// primitive 3-forms on a preset frame.
class AnsatzFamily {
 public:
  AnsatzFamily(const Frame* frame, std::string name, std::vector<std::string> param_names,
               Form<double> offset, std::vector<Form<double>> basis);

  const Frame& frame() const { return *frame_; }
  const std::string& name() const { return name_; }
  const std::vector<std::string>& param_names() const { return param_names_; }
  int dimension() const { return static_cast<int>(basis_.size()); }
  const std::vector<Form<double>>& basis() const { return basis_; }

  Form<double> member(const Eigen::VectorXd& params) const;

  struct Projection {
    Eigen::VectorXd coords;  // least-squares coordinates in the basis
    double residual;         // max-abs of the out-of-span remainder
  };

  /// Least-squares projection of a 3-form onto the tangent span of the family
  /// (the linear span of the basis; the affine offset plays no role).
  Projection project_tangent(const Form<double>& v) const;

  bool in_tangent_span(const Form<double>& v, double tol) const;

 private:
  const Frame* frame_;
  std::string name_;
  std::vector<std::string> param_names_;
  Form<double> offset_;
  std::vector<Form<double>> basis_;
  Eigen::MatrixXd basis_matrix_;  // 20 x dim over the 3-form enumeration
};

/// The invariant ansatz of a preset; members are closed and primitive for all
/// parameter values (verified at construction).
const AnsatzFamily& preset_ansatz(Preset p);

}  // namespace symflow
