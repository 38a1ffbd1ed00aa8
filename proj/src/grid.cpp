#include "symflow/grid.hpp"

#include <cmath>
#include <limits>

namespace symflow {

Grid::Grid(int n) : n_(n), h_(1.0 / n) {
  if (n < 8) throw ConfigError("grid: N must be >= 8");
}

GridField GridField::sampled(std::shared_ptr<const Grid> grid,
                             const std::function<double(double, double, double)>& fn) {
  GridField f;
  f.grid_ = std::move(grid);
  const int n = f.grid_->n();
  f.data_.resize(f.grid_->size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k)
        f.data_[f.grid_->index(i, j, k)] = fn(f.grid_->coordinate(i), f.grid_->coordinate(j), f.grid_->coordinate(k));
  return f;
}

GridField GridField::from_data(std::shared_ptr<const Grid> grid, std::vector<double> data) {
  if (data.size() != grid->size()) throw ConfigError("grid field: data size does not match grid");
  GridField f;
  f.grid_ = std::move(grid);
  f.data_ = std::move(data);
  return f;
}

GridField GridField::binary(const GridField& a, const GridField& b, double (*op)(double, double)) {
  if (a.is_uniform() && b.is_uniform()) return uniform(op(a.uniform_, b.uniform_));
  const GridField& shaped = a.is_uniform() ? b : a;
  if (!a.is_uniform() && !b.is_uniform() && a.grid_->n() != b.grid_->n())
    throw ConfigError("grid field arithmetic: incompatible grids");
  GridField out;
  out.grid_ = shaped.grid_;
  out.data_.resize(shaped.data_.size());
  const std::size_t sz = out.data_.size();
  if (a.is_uniform()) {
    for (std::size_t s = 0; s < sz; ++s) out.data_[s] = op(a.uniform_, b.data_[s]);
  } else if (b.is_uniform()) {
    for (std::size_t s = 0; s < sz; ++s) out.data_[s] = op(a.data_[s], b.uniform_);
  } else {
    for (std::size_t s = 0; s < sz; ++s) out.data_[s] = op(a.data_[s], b.data_[s]);
  }
  return out;
}

GridField GridField::operator+(const GridField& o) const {
  return binary(*this, o, [](double x, double y) { return x + y; });
}
GridField GridField::operator-(const GridField& o) const {
  return binary(*this, o, [](double x, double y) { return x - y; });
}
GridField GridField::operator*(const GridField& o) const {
  if (is_uniform() && uniform_ == 0.0) return GridField{};
  if (o.is_uniform() && o.uniform_ == 0.0) return GridField{};
  return binary(*this, o, [](double x, double y) { return x * y; });
}
GridField GridField::operator-() const {
  GridField out = *this;
  out.uniform_ = -out.uniform_;
  for (double& v : out.data_) v = -v;
  return out;
}
GridField GridField::operator*(double s) const {
  GridField out = *this;
  out.uniform_ *= s;
  for (double& v : out.data_) v *= s;
  return out;
}
GridField GridField::operator+(double s) const {
  GridField out = *this;
  out.uniform_ += s;
  for (double& v : out.data_) v += s;
  return out;
}

GridField GridField::partial(int axis) const {
  if (axis < 0 || axis > 2) throw ConfigError("grid field: axis must be 0..2");
  if (is_uniform()) return GridField{};
  GridField out;
  out.grid_ = grid_;
  out.data_.resize(data_.size());
  const int n = grid_->n();
  const double inv2h = 1.0 / (2.0 * grid_->h());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        int ip = i, jp = j, kp = k, im = i, jm = j, km = k;
        (axis == 0 ? ip : axis == 1 ? jp : kp) += 1;
        (axis == 0 ? im : axis == 1 ? jm : km) -= 1;
        out.data_[grid_->index(i, j, k)] =
            (data_[grid_->index(ip, jp, kp)] - data_[grid_->index(im, jm, km)]) * inv2h;
      }
  return out;
}

GridField GridField::partial2(int axis_a, int axis_b) const {
  if (is_uniform()) return GridField{};
  if (axis_a != axis_b) return partial(axis_a).partial(axis_b);
  GridField out;
  out.grid_ = grid_;
  out.data_.resize(data_.size());
  const int n = grid_->n();
  const double invh2 = 1.0 / (grid_->h() * grid_->h());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        int ip = i, jp = j, kp = k, im = i, jm = j, km = k;
        (axis_a == 0 ? ip : axis_a == 1 ? jp : kp) += 1;
        (axis_a == 0 ? im : axis_a == 1 ? jm : km) -= 1;
        out.data_[grid_->index(i, j, k)] =
            (data_[grid_->index(ip, jp, kp)] - 2.0 * data_[grid_->index(i, j, k)] +
             data_[grid_->index(im, jm, km)]) *
            invh2;
      }
  return out;
}

GridField GridField::pointwise(const std::function<double(double)>& fn) const {
  GridField out = *this;
  out.uniform_ = fn(out.uniform_);
  for (double& v : out.data_) v = fn(v);
  return out;
}

double GridField::max_abs() const {
  if (is_uniform()) return std::abs(uniform_);
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

double GridField::min_value() const {
  if (is_uniform()) return uniform_;
  double m = std::numeric_limits<double>::infinity();
  for (double v : data_) m = std::min(m, v);
  return m;
}

double GridField::mean() const {
  if (is_uniform()) return uniform_;
  double s = 0.0;
  for (double v : data_) s += v;
  return s / static_cast<double>(data_.size());
}

Form<double> form_at_point(const Form<GridField>& f, int i, int j, int k) {
  Form<double> out(f.degree());
  for (const auto& [mask, c] : f.terms()) out.set(mask, c.value(i, j, k));
  out.prune();
  return out;
}

}  // namespace symflow
