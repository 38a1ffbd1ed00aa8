#include "symflow/frame.hpp"

namespace symflow {

namespace {

Form<double> leibniz_d(const std::array<Form<double>, kDim>& table, IndexMask mask) {
  const int k = mask_degree(mask);
  Form<double> out(k + 1);
  const auto indices = mask_indices(mask);
  for (std::size_t m = 0; m < indices.size(); ++m) {
    IndexMask prefix = 0, suffix = 0;
    for (std::size_t r = 0; r < m; ++r) prefix |= index_bit(indices[r]);
    for (std::size_t r = m + 1; r < indices.size(); ++r) suffix |= index_bit(indices[r]);
    const Form<double>& di = table[indices[m] - 1];
    if (di.empty()) continue;
    Form<double> term = wedge(wedge(Form<double>::basis(prefix), di), Form<double>::basis(suffix));
    out = out + ((m % 2 == 0) ? term : -term);
  }
  return out;
}

}  // namespace

Frame::Frame(std::string name, std::array<Form<double>, kDim> differential, Form<double> omega,
             std::array<int, kDim> deriv_axis)
    : name_(std::move(name)),
      differential_(std::move(differential)),
      omega_(std::move(omega)),
      deriv_axis_(deriv_axis) {
  if (omega_.degree() != 2) throw DegreeError("frame: omega must be a 2-form");
  for (int i = 0; i < kDim; ++i)
    if (differential_[i].degree() != 2) throw DegreeError("frame: differential table entries must be 2-forms");

  omega_matrix_.setZero();
  for (int i = 1; i <= kDim; ++i)
    for (int j = i + 1; j <= kDim; ++j) {
      double c = omega_.coeff(static_cast<IndexMask>(index_bit(i) | index_bit(j)));
      omega_matrix_(i - 1, j - 1) = c;
      omega_matrix_(j - 1, i - 1) = -c;
    }

  Eigen::FullPivLU<Mat6> lu(omega_matrix_);
  if (!lu.isInvertible())
    throw DegenerateFrameError("frame '" + name_ + "': omega coefficient matrix is singular");
  contraction_ = lu.inverse().transpose();

  Form<double> w3 = wedge(wedge(omega_, omega_), omega_);
  vol_coeff_ = w3.coeff(kFullMask) / 6.0;

  d_basis_.reserve(kFullMask + 1);
  for (unsigned m = 0; m <= kFullMask; ++m) {
    if (mask_degree(static_cast<IndexMask>(m)) >= kDim) {
      d_basis_.emplace_back(0);  // unused; exterior_d rejects degree-6 inputs
      continue;
    }
    d_basis_.push_back(leibniz_d(differential_, static_cast<IndexMask>(m)));
  }
}

void Frame::validate(double tol) const {
  for (int i = 1; i <= kDim; ++i) {
    double jacobi = exterior_d(d_of_coframe(i), *this).max_abs();
    if (jacobi > tol)
      throw DegenerateFrameError("frame '" + name_ + "': d(d e^" + std::to_string(i) +
                                 ") != 0, Jacobi residual " + std::to_string(jacobi));
  }
  double dw = exterior_d(omega_, *this).max_abs();
  if (dw > tol)
    throw DegenerateFrameError("frame '" + name_ + "': omega is not closed, residual " + std::to_string(dw));
}

}  // namespace symflow
