#include "symflow/curvature.hpp"

#include <cmath>

namespace symflow {

StructureConstants structure_constants(const Frame& f) {
  StructureConstants c{};
  for (int k = 1; k <= kDim; ++k) {
    const Form<double>& dk = f.d_of_coframe(k);
    for (const auto& [mask, v] : dk.terms()) {
      const auto idx = mask_indices(mask);
      const int i = idx[0] - 1, j = idx[1] - 1;
      c[i][j][k - 1] = -v;
      c[j][i][k - 1] = v;
    }
  }
  return c;
}

Connection levi_civita(const MetricLieFrame& m) {
  Eigen::FullPivLU<Mat6> lu(m.g);
  if (!lu.isInvertible()) throw DegenerateFrameError("levi_civita: singular metric");
  const Mat6 ginv = lu.inverse();
  const StructureConstants c = structure_constants(*m.frame);

  // B[i][j][k] = g([e_i, e_j], e_k)
  double B[kDim][kDim][kDim];
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k) {
        double s = 0.0;
        for (int p = 0; p < kDim; ++p) s += c[i][j][p] * m.g(p, k);
        B[i][j][k] = s;
      }

  Connection conn{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k) {
        // 2 g(nabla_i e_j, e_k) = B_ijk - B_jki + B_kij
        double two_low = B[i][j][k] - B[j][k][i] + B[k][i][j];
        for (int l = 0; l < kDim; ++l) conn.gamma[i][j][l] += 0.5 * ginv(k, l) * two_low;
      }

  conn.torsion_residual = 0.0;
  conn.metric_compat_residual = 0.0;
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k) {
        conn.torsion_residual =
            std::max(conn.torsion_residual, std::abs(conn.gamma[i][j][k] - conn.gamma[j][i][k] - c[i][j][k]));
        double compat = 0.0;
        for (int p = 0; p < kDim; ++p)
          compat += conn.gamma[i][j][p] * m.g(p, k) + conn.gamma[i][k][p] * m.g(j, p);
        conn.metric_compat_residual = std::max(conn.metric_compat_residual, std::abs(compat));
      }
  return conn;
}

CurvatureTensors curvature_tensors(const MetricLieFrame& m) {
  const Connection conn = levi_civita(m);
  const StructureConstants c = structure_constants(*m.frame);
  CurvatureTensors out{};

  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k)
        for (int l = 0; l < kDim; ++l) {
          double s = 0.0;
          for (int p = 0; p < kDim; ++p) {
            s += conn.gamma[j][k][p] * conn.gamma[i][p][l];
            s -= conn.gamma[i][k][p] * conn.gamma[j][p][l];
            s -= c[i][j][p] * conn.gamma[p][k][l];
          }
          out.riem[i][j][k][l] = s;
        }

  out.ricci.setZero();
  for (int j = 0; j < kDim; ++j)
    for (int k = 0; k < kDim; ++k) {
      double s = 0.0;
      for (int i = 0; i < kDim; ++i) s += out.riem[i][j][k][i];
      out.ricci(j, k) = s;
    }

  out.scalar = (m.g.inverse() * out.ricci).trace();
  return out;
}

Mat6 ricci_j_invariant_part(const CurvatureTensors& c, const Mat6& J) {
  return J.transpose() * c.ricci * J;
}

NijenhuisTensors nijenhuis(const MetricLieFrame& m) {
  if (!m.J) throw Error("nijenhuis: frame carries no almost complex structure");
  const Mat6& J = *m.J;
  if ((J * J + Mat6::Identity()).cwiseAbs().maxCoeff() > 1e-8)
    throw Error("nijenhuis: J^2 != -Id");
  const double g_scale = std::max(1.0, m.g.cwiseAbs().maxCoeff());
  if ((J.transpose() * m.g * J - m.g).cwiseAbs().maxCoeff() > 1e-8 * g_scale)
    throw Error("nijenhuis: g is not J-invariant");
  const StructureConstants c = structure_constants(*m.frame);

  NijenhuisTensors out{};
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j)
      for (int k = 0; k < kDim; ++k) {
        double s = 0.0;
        for (int p = 0; p < kDim; ++p)
          for (int q = 0; q < kDim; ++q) {
            s += J(p, i) * J(q, j) * c[p][q][k];     // [JX, JY]
            s -= J(p, i) * c[p][j][q] * J(k, q);     // J[JX, Y]
            s -= J(q, j) * c[i][q][p] * J(k, p);     // J[X, JY]
          }
        s -= c[i][j][k];                             // [X, Y]
        out.n[i][j][k] = kNijenhuisNormalization * s;
      }

  const Mat6 ginv = m.g.inverse();

  // Lowered components N_{abc} with the vector output in the middle slot:
  // N_{abc} = g(N(e_a, e_c), e_b).  This is the layout under which the
  // quadratic identity (N-^2) = 2(N+^2) - 1/4 |N|^2 g holds.
  double low[kDim][kDim][kDim];
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int cc = 0; cc < kDim; ++cc) {
        double s = 0.0;
        for (int p = 0; p < kDim; ++p) s += out.n[a][cc][p] * m.g(p, b);
        low[a][b][cc] = s;
      }

  out.norm_sq = 0.0;
  for (int a = 0; a < kDim; ++a)
    for (int b = 0; b < kDim; ++b)
      for (int cc = 0; cc < kDim; ++cc)
        for (int p = 0; p < kDim; ++p)
          for (int q = 0; q < kDim; ++q)
            for (int r = 0; r < kDim; ++r)
              out.norm_sq += low[a][b][cc] * low[p][q][r] * ginv(a, p) * ginv(b, q) * ginv(cc, r);

  out.n_plus_sq.setZero();
  out.n_minus_sq.setZero();
  for (int i = 0; i < kDim; ++i)
    for (int j = 0; j < kDim; ++j) {
      double plus = 0.0, minus = 0.0;
      for (int a = 0; a < kDim; ++a)
        for (int b = 0; b < kDim; ++b)
          for (int p = 0; p < kDim; ++p)
            for (int k = 0; k < kDim; ++k) {
              // (N+^2)_ij = N^{pk}_i N_{pkj},  (N-^2)_ij = N^{kp}_i N_{pkj}
              plus += ginv(p, a) * ginv(k, b) * low[a][b][i] * low[p][k][j];
              minus += ginv(k, a) * ginv(p, b) * low[a][b][i] * low[p][k][j];
            }
      out.n_plus_sq(i, j) = plus;
      out.n_minus_sq(i, j) = minus;
    }
  return out;
}

}  // namespace symflow
