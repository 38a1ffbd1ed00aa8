#pragma once

// Uniform periodic grid over T^3 and scalar fields on it, used as the
// coefficient ring of the semi-flat forms.  Fields are either full N^3 data
// or a spatially uniform value; uniform fields make the ring's zero and one
// context-free and keep constant arithmetic exact.

#include <functional>
#include <memory>
#include <vector>

#include "symflow/forms.hpp"

namespace symflow {

class Grid {
 public:
  explicit Grid(int n);

  int n() const { return n_; }
  double h() const { return h_; }
  std::size_t size() const { return static_cast<std::size_t>(n_) * n_ * n_; }

  /// Row-major with axis order x1 x2 x3; indices taken mod N.
  std::size_t index(int i, int j, int k) const {
    auto w = [this](int v) { return ((v % n_) + n_) % n_; };
    return (static_cast<std::size_t>(w(i)) * n_ + w(j)) * n_ + w(k);
  }

  double coordinate(int i) const { return h_ * (((i % n_) + n_) % n_); }

 private:
  int n_;
  double h_;
};

class GridField {
 public:
  GridField() = default;  // uniform zero

  static GridField uniform(double value) {
    GridField f;
    f.uniform_ = value;
    return f;
  }

  static GridField sampled(std::shared_ptr<const Grid> grid,
                           const std::function<double(double, double, double)>& fn);

  static GridField from_data(std::shared_ptr<const Grid> grid, std::vector<double> data);

  bool is_uniform() const { return grid_ == nullptr; }
  const std::shared_ptr<const Grid>& grid() const { return grid_; }

  double value(int i, int j, int k) const { return grid_ ? data_[grid_->index(i, j, k)] : uniform_; }
  double uniform_value() const { return uniform_; }
  const std::vector<double>& data() const { return data_; }

  GridField operator+(const GridField& o) const;
  GridField operator-(const GridField& o) const;
  GridField operator*(const GridField& o) const;
  GridField operator-() const;
  GridField operator*(double s) const;
  GridField operator+(double s) const;

  /// 2nd-order central first derivative along axis (0..2); exact zero for
  /// uniform fields.
  GridField partial(int axis) const;

  /// 2nd-order second derivative: compact 3-point stencil on the diagonal,
  /// central-of-central for mixed axes.
  GridField partial2(int axis_a, int axis_b) const;

  GridField pointwise(const std::function<double(double)>& fn) const;

  double max_abs() const;
  double min_value() const;
  double mean() const;

 private:
  static GridField binary(const GridField& a, const GridField& b, double (*op)(double, double));

  std::shared_ptr<const Grid> grid_;  // null => uniform
  double uniform_ = 0.0;
  std::vector<double> data_;
};

inline GridField ring_partial(const GridField& f, int axis) { return f.partial(axis); }
inline double ring_max_abs(const GridField& f) { return f.max_abs(); }
inline bool ring_is_zero(const GridField& f, double tol) {
  return f.is_uniform() ? std::abs(f.uniform_value()) <= tol : f.max_abs() <= tol;
}

static_assert(CoefficientRing<GridField>);
static_assert(CoefficientRing<double>);

/// Freeze the coefficients of a grid-valued form at one grid point.
Form<double> form_at_point(const Form<GridField>& f, int i, int j, int k);

}  // namespace symflow
