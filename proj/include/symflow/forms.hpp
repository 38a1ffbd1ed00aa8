#pragma once

// Exterior algebra on a fixed 6-dimensional coframe e^1..e^6.  A k-form is a
// sparse map from strictly increasing index tuples (stored as 6-bit masks) to
// coefficients in a pluggable ring: plain doubles for invariant frames, or
// periodic grid fields for the semi-flat reduction.  All signs come from
// explicit permutation parity on the canonical increasing representation.

#include <bit>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "symflow/errors.hpp"

namespace symflow {

using Mat6 = Eigen::Matrix<double, 6, 6>;
using Vec6 = Eigen::Matrix<double, 6, 1>;

inline constexpr int kDim = 6;

/// Bit i (0-based) set <=> coframe index i+1 occurs in the tuple.
using IndexMask = std::uint8_t;
inline constexpr IndexMask kFullMask = 0x3F;

inline int mask_degree(IndexMask m) { return std::popcount(static_cast<unsigned>(m)); }

inline IndexMask index_bit(int index_1based) { return static_cast<IndexMask>(1u << (index_1based - 1)); }

/// Ascending 1-based indices of a mask.
inline std::vector<int> mask_indices(IndexMask m) {
  std::vector<int> out;
  for (int i = 1; i <= kDim; ++i)
    if (m & index_bit(i)) out.push_back(i);
  return out;
}

inline IndexMask mask_from_indices(std::initializer_list<int> indices) {
  IndexMask m = 0;
  for (int i : indices) {
    if (i < 1 || i > kDim) throw DegreeError("coframe index out of range 1..6");
    IndexMask b = index_bit(i);
    if (m & b) throw DegreeError("repeated coframe index in tuple");
    m |= b;
  }
  return m;
}

/// All masks of a given degree, in increasing mask order (a fixed basis
/// enumeration used for matrix assembly).
inline const std::vector<IndexMask>& masks_of_degree(int k) {
  static const auto tables = [] {
    std::array<std::vector<IndexMask>, kDim + 1> t;
    for (unsigned m = 0; m <= kFullMask; ++m) t[std::popcount(m)].push_back(static_cast<IndexMask>(m));
    return t;
  }();
  if (k < 0 || k > kDim) throw DegreeError("form degree out of range 0..6");
  return tables[k];
}

/// Sign of merging two disjoint increasing tuples a, b into increasing order
/// (0 when they overlap).
inline int wedge_sign(IndexMask a, IndexMask b) {
  if (a & b) return 0;
  int inversions = 0;
  for (int j = 0; j < kDim; ++j)
    if (b & (1u << j)) inversions += std::popcount(static_cast<unsigned>(a) >> (j + 1));
  return (inversions & 1) ? -1 : 1;
}

/// Sign of contracting slot (0-based) out of mask m: (-1)^(#indices below).
inline int interior_sign(int slot, IndexMask m) {
  return (std::popcount(static_cast<unsigned>(m) & ((1u << slot) - 1u)) & 1) ? -1 : 1;
}

// --- coefficient rings ------------------------------------------------------
//
// A ring must supply +, -, unary -, ring product, scaling by double, spatial
// partial derivatives (zero for constants) and a max-abs magnitude.  The
// customization points below are found by unqualified lookup from inside the
// library namespace.

inline double ring_partial(double, int) { return 0.0; }
inline double ring_max_abs(double c) { return std::abs(c); }
inline bool ring_is_zero(double c, double tol) { return std::abs(c) <= tol; }

template <class R>
concept CoefficientRing =
    std::default_initializable<R> && std::copy_constructible<R> &&
    requires(const R a, const R b, double s, int axis, double tol) {
      { a + b } -> std::convertible_to<R>;
      { a - b } -> std::convertible_to<R>;
      { a * b } -> std::convertible_to<R>;
      { -a } -> std::convertible_to<R>;
      { a * s } -> std::convertible_to<R>;
      { a + s } -> std::convertible_to<R>;
      { ring_partial(a, axis) } -> std::convertible_to<R>;
      { ring_max_abs(a) } -> std::convertible_to<double>;
      { ring_is_zero(a, tol) } -> std::convertible_to<bool>;
    };

// --- forms -------------------------------------------------------------------

template <CoefficientRing R>
class Form {
 public:
  explicit Form(int degree) : degree_(degree) {
    if (degree < 0 || degree > kDim) throw DegreeError("form degree out of range 0..6");
  }

  /// Unit basis form e^I for the given mask.
  static Form basis(IndexMask mask) {
    Form f(mask_degree(mask));
    f.set(mask, unit_coefficient());
    return f;
  }

  /// Single-term form c * e^{i1...ik}.
  static Form term(double c, std::initializer_list<int> indices) {
    IndexMask m = mask_from_indices(indices);
    Form f(mask_degree(m));
    f.set(m, unit_coefficient() * c);
    return f;
  }

  int degree() const { return degree_; }
  const std::map<IndexMask, R>& terms() const { return terms_; }
  bool empty() const { return terms_.empty(); }

  /// Coefficient of e^I (zero element when absent).
  R coeff(IndexMask mask) const {
    auto it = terms_.find(mask);
    return it == terms_.end() ? R{} : it->second;
  }

  void set(IndexMask mask, R value) {
    if (mask_degree(mask) != degree_) throw DegreeError("term mask does not match form degree");
    terms_[mask] = std::move(value);
  }

  void add_term(IndexMask mask, const R& value) {
    if (mask_degree(mask) != degree_) throw DegreeError("term mask does not match form degree");
    auto it = terms_.find(mask);
    if (it == terms_.end())
      terms_.emplace(mask, value);
    else
      it->second = it->second + value;
  }

  /// Drop coefficients that are exactly zero (tolerance 0 by default; zero
  /// pruning never changes equality semantics).
  Form& prune(double tol = 0.0) {
    for (auto it = terms_.begin(); it != terms_.end();)
      it = ring_is_zero(it->second, tol) ? terms_.erase(it) : std::next(it);
    return *this;
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& [mask, c] : terms_) m = std::max(m, ring_max_abs(c));
    return m;
  }

  Form operator+(const Form& o) const {
    require_same_degree(o, "+");
    Form out = *this;
    for (const auto& [mask, c] : o.terms_) out.add_term(mask, c);
    out.prune();
    return out;
  }

  Form operator-(const Form& o) const {
    require_same_degree(o, "-");
    Form out = *this;
    for (const auto& [mask, c] : o.terms_) out.add_term(mask, -c);
    out.prune();
    return out;
  }

  Form operator-() const {
    Form out(degree_);
    for (const auto& [mask, c] : terms_) out.terms_.emplace(mask, -c);
    return out;
  }

  Form operator*(double s) const {
    Form out(degree_);
    for (const auto& [mask, c] : terms_) out.terms_.emplace(mask, c * s);
    out.prune();
    return out;
  }

  /// Coefficient-wise ring product (e.g. multiply a form by a scalar field).
  Form times(const R& s) const {
    Form out(degree_);
    for (const auto& [mask, c] : terms_) out.terms_.emplace(mask, c * s);
    out.prune();
    return out;
  }

 private:
  static R unit_coefficient() { return R{} + 1.0; }

  void require_same_degree(const Form& o, const char* op) const {
    if (degree_ != o.degree_) throw DegreeError(std::string("degree mismatch in form ") + op);
  }

  int degree_;
  std::map<IndexMask, R> terms_;
};

template <CoefficientRing R>
Form<R> operator*(double s, const Form<R>& f) {
  return f * s;
}

/// Graded-anticommutative product.  Throws DegreeError past the top degree.
template <CoefficientRing R>
Form<R> wedge(const Form<R>& a, const Form<R>& b) {
  if (a.degree() + b.degree() > kDim)
    throw DegreeError("wedge degree overflow: " + std::to_string(a.degree()) + " + " + std::to_string(b.degree()));
  Form<R> out(a.degree() + b.degree());
  for (const auto& [ma, ca] : a.terms())
    for (const auto& [mb, cb] : b.terms()) {
      int sign = wedge_sign(ma, mb);
      if (sign == 0) continue;
      R prod = ca * cb;
      out.add_term(static_cast<IndexMask>(ma | mb), sign < 0 ? -prod : prod);
    }
  out.prune();
  return out;
}

/// Contraction with the frame vector e_index (1-based).  Antiderivation of
/// degree -1; contracting a 0-form yields the zero 0-form.
template <CoefficientRing R>
Form<R> interior(int index_1based, const Form<R>& a) {
  if (a.degree() == 0) return Form<R>(0);
  if (index_1based < 1 || index_1based > kDim) throw DegreeError("interior: index out of range");
  const int slot = index_1based - 1;
  const IndexMask bit = index_bit(index_1based);
  Form<R> out(a.degree() - 1);
  for (const auto& [mask, c] : a.terms()) {
    if (!(mask & bit)) continue;
    int sign = interior_sign(slot, mask);
    out.add_term(static_cast<IndexMask>(mask & ~bit), sign < 0 ? -c : c);
  }
  out.prune();
  return out;
}

/// Contraction with a constant vector v = sum v^a e_a.
template <CoefficientRing R>
Form<R> interior(const Vec6& v, const Form<R>& a) {
  if (a.degree() == 0) return Form<R>(0);
  Form<R> out(a.degree() - 1);
  for (int i = 1; i <= kDim; ++i) {
    if (v[i - 1] == 0.0) continue;
    out = out + interior(i, a) * v[i - 1];
  }
  return out;
}

/// Pullback through the endomorphism A (A e_j = sum_i A(i,j) e_i):
/// (A*a)(X1,...,Xk) = a(A X1,...,A Xk).
template <CoefficientRing R>
Form<R> endo_pullback(const Mat6& a_mat, const Form<R>& a) {
  const int k = a.degree();
  if (k == 0) return a;
  Form<R> out(k);
  const auto& targets = masks_of_degree(k);
  for (const auto& [mask, c] : a.terms()) {
    const auto rows = mask_indices(mask);
    for (IndexMask target : targets) {
      const auto cols = mask_indices(target);
      Eigen::MatrixXd sub(k, k);
      for (int r = 0; r < k; ++r)
        for (int s = 0; s < k; ++s) sub(r, s) = a_mat(rows[r] - 1, cols[s] - 1);
      double det = sub.determinant();
      if (det == 0.0) continue;
      out.add_term(target, c * det);
    }
  }
  out.prune();
  return out;
}

/// Gram inner product on k-forms induced by the coframe Gram matrix
/// gram(i,j) = <e^i, e^j>.  An orthonormal coframe gives <e^I, e^J> = delta.
template <CoefficientRing R>
R inner_product(const Form<R>& a, const Form<R>& b, const Mat6& gram = Mat6::Identity()) {
  if (a.degree() != b.degree()) throw DegreeError("inner_product: degree mismatch");
  if ((gram - gram.transpose()).cwiseAbs().maxCoeff() > 1e-12)
    throw DegreeError("inner_product: Gram matrix is not symmetric");
  Eigen::FullPivLU<Mat6> lu(gram);
  if (!lu.isInvertible()) throw DegenerateFrameError("inner_product: singular Gram matrix");
  const int k = a.degree();
  R acc{};
  for (const auto& [ma, ca] : a.terms()) {
    const auto ia = mask_indices(ma);
    for (const auto& [mb, cb] : b.terms()) {
      const auto ib = mask_indices(mb);
      double det;
      if (k == 0) {
        det = 1.0;
      } else {
        Eigen::MatrixXd sub(k, k);
        for (int r = 0; r < k; ++r)
          for (int s = 0; s < k; ++s) sub(r, s) = gram(ia[r] - 1, ib[s] - 1);
        det = sub.determinant();
      }
      if (det == 0.0) continue;
      acc = acc + (ca * cb) * det;
    }
  }
  return acc;
}

/// Coefficients of a real-valued form over the fixed degree-k mask
/// enumeration; inverse of from_coefficients.
inline Eigen::VectorXd to_coefficients(const Form<double>& f) {
  const auto& basis = masks_of_degree(f.degree());
  Eigen::VectorXd v(static_cast<int>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i) v[static_cast<int>(i)] = f.coeff(basis[i]);
  return v;
}

inline Form<double> from_coefficients(int degree, const Eigen::VectorXd& v) {
  const auto& basis = masks_of_degree(degree);
  if (v.size() != static_cast<int>(basis.size())) throw DegreeError("from_coefficients: size mismatch");
  Form<double> f(degree);
  for (std::size_t i = 0; i < basis.size(); ++i)
    if (v[static_cast<int>(i)] != 0.0) f.set(basis[i], v[static_cast<int>(i)]);
  return f;
}

inline double max_abs_diff(const Form<double>& a, const Form<double>& b) {
  return (a - b).max_abs();
}

/// Textual serialization "c e^{i1...ik} +- ..." used by logs and golden tests.
inline std::string to_string(const Form<double>& f) {
  if (f.terms().empty()) return "0";
  std::ostringstream os;
  os.precision(17);
  bool first = true;
  for (const auto& [mask, c] : f.terms()) {
    double v = c;
    if (first) {
      if (v < 0) {
        os << "-";
        v = -v;
      }
    } else {
      os << (v < 0 ? " - " : " + ");
      v = std::abs(v);
    }
    first = false;
    os << v;
    if (mask != 0) {
      os << " e^{";
      for (int i : mask_indices(mask)) os << i;
      os << "}";
    }
  }
  return os.str();
}

}  // namespace symflow
