#include "symflow/semiflat.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include <nlohmann/json.hpp>

#include "symflow/ode.hpp"

namespace symflow {

int SymmetricMetricField::slot(int i, int j) {
  if (i > j) std::swap(i, j);
  static constexpr int table[3][3] = {{0, 1, 2}, {-1, 3, 4}, {-1, -1, 5}};
  return table[i][j];
}

GridField SymmetricMetricField::determinant() const {
  const GridField &a = entry(0, 0), &b = entry(0, 1), &c = entry(0, 2);
  const GridField &d = entry(1, 1), &e = entry(1, 2), &f = entry(2, 2);
  return a * (d * f - e * e) - b * (b * f - e * c) + c * (b * e - d * c);
}

Eigen::Matrix3d SymmetricMetricField::at_point(int i, int j, int k) const {
  Eigen::Matrix3d m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = entry(r, c).value(i, j, k);
  return m;
}

double SymmetricMetricField::min_eigenvalue() const {
  const int n = grid->n();
  double m = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(at_point(i, j, k));
        m = std::min(m, es.eigenvalues().minCoeff());
      }
  return m;
}

std::optional<std::array<int, 3>> SymmetricMetricField::positivity_violation() const {
  const int n = grid->n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        Eigen::Matrix3d m = at_point(i, j, k);
        const double m1 = m(0, 0);
        const double m2 = m(0, 0) * m(1, 1) - m(0, 1) * m(0, 1);
        const double m3 = m.determinant();
        if (!(m1 > 0.0 && m2 > 0.0 && m3 > 0.0)) return std::array<int, 3>{i, j, k};
      }
  return std::nullopt;
}

SymmetricMetricField SymmetricMetricField::operator+(const SymmetricMetricField& o) const {
  SymmetricMetricField out{grid, {}};
  for (std::size_t s = 0; s < comp.size(); ++s) out.comp[s] = comp[s] + o.comp[s];
  return out;
}

SymmetricMetricField SymmetricMetricField::operator*(double s) const {
  SymmetricMetricField out{grid, {}};
  for (std::size_t c = 0; c < comp.size(); ++c) out.comp[c] = comp[c] * s;
  return out;
}

SymmetricMetricField hessian_metric(std::shared_ptr<const Grid> grid, const Eigen::Matrix3d& A,
                                    const std::vector<PerturbationMode>& modes) {
  if ((A - A.transpose()).cwiseAbs().maxCoeff() > 1e-14)
    throw ConfigError("hessian_metric: A must be symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(A);
  const double lam_min = es.eigenvalues().minCoeff();
  if (!(lam_min > 0.0)) throw ConfigError("hessian_metric: A must be positive definite");
  double budget = 0.0;
  for (const auto& m : modes) {
    const double k2 = m.k[0] * m.k[0] + m.k[1] * m.k[1] + m.k[2] * m.k[2];
    budget += std::abs(m.amplitude) * 4.0 * M_PI * M_PI * k2;
  }
  if (!(budget < 0.5 * lam_min))
    throw ConfigError("hessian_metric: perturbation budget " + std::to_string(budget) +
                      " violates the SPD margin lambda_min(A)/2 = " + std::to_string(0.5 * lam_min));

  SymmetricMetricField out{grid, {}};
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      out.comp[static_cast<std::size_t>(SymmetricMetricField::slot(i, j))] =
          GridField::sampled(grid, [&, i, j](double x, double y, double z) {
            double v = A(i, j);
            for (const auto& m : modes) {
              const double arg = 2.0 * M_PI * (m.k[0] * x + m.k[1] * y + m.k[2] * z) + m.phase;
              v -= m.amplitude * 4.0 * M_PI * M_PI * m.k[i] * m.k[j] * std::cos(arg);
            }
            return v;
          });
    }
  return out;
}

namespace {

void require_spd(const SymmetricMetricField& g, const char* who) {
  if (auto bad = g.positivity_violation())
    throw GeometricError(std::string(who) + ": positivity lost at cell (" + std::to_string((*bad)[0]) + "," +
                         std::to_string((*bad)[1]) + "," + std::to_string((*bad)[2]) + ")");
}

SymmetricMetricField hessian_of(const GridField& scalar, const std::shared_ptr<const Grid>& grid, double factor) {
  SymmetricMetricField out{grid, {}};
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j)
      out.comp[static_cast<std::size_t>(SymmetricMetricField::slot(i, j))] = scalar.partial2(i, j) * factor;
  return out;
}

}  // namespace

SymmetricMetricField iib_rhs(const SymmetricMetricField& g) {
  require_spd(g, "iib_rhs");
  return hessian_of(g.determinant(), g.grid, 0.25);
}

SymmetricMetricField kr_rhs(const SymmetricMetricField& g) {
  require_spd(g, "kr_rhs");
  GridField logdet = g.determinant().pointwise([](double v) { return std::log(v); });
  return hessian_of(logdet, g.grid, 0.5);
}

SemiflatFlow semiflat_flow_from_string(const std::string& name) {
  if (name == "iib") return SemiflatFlow::IIB;
  if (name == "kr") return SemiflatFlow::KR;
  throw ConfigError("unknown semiflat flow '" + name + "' (expected iib, kr)");
}

const Frame& semiflat_frame() {
  static const Frame f = [] {
    using FD = Form<double>;
    std::array<FD, kDim> table{FD(2), FD(2), FD(2), FD(2), FD(2), FD(2)};
    FD omega = FD::term(1, {1, 4}) + FD::term(1, {2, 5}) + FD::term(1, {3, 6});
    Frame fr("semiflat", std::move(table), std::move(omega), {0, 1, 2, -1, -1, -1});
    fr.validate();
    return fr;
  }();
  return f;
}

SemiflatForms reconstruct_forms(const SymmetricMetricField& g) {
  using FG = Form<GridField>;
  const Frame& fr = semiflat_frame();

  std::array<FG, 3> dxl = {FG(1), FG(1), FG(1)};  // dx_j = g_jk dx^k
  std::array<FG, 3> dy = {FG(1), FG(1), FG(1)};
  for (int j = 0; j < 3; ++j) {
    for (int k = 0; k < 3; ++k) dxl[static_cast<std::size_t>(j)].add_term(index_bit(k + 1), g.entry(j, k));
    dy[static_cast<std::size_t>(j)].set(index_bit(j + 4), GridField::uniform(1.0));
  }

  FG phi = wedge(wedge(dxl[0], dxl[1]), dxl[2]) - wedge(wedge(dxl[0], dy[1]), dy[2]) -
           wedge(wedge(dy[0], dxl[1]), dy[2]) - wedge(wedge(dy[0], dy[1]), dxl[2]);
  FG phi_hat = wedge(wedge(dxl[0], dxl[1]), dy[2]) + wedge(wedge(dxl[0], dy[1]), dxl[2]) +
               wedge(wedge(dy[0], dxl[1]), dxl[2]) - wedge(wedge(dy[0], dy[1]), dy[2]);

  GridField norm_sq = wedge(phi, phi_hat).coeff(kFullMask) * (1.0 / fr.vol_coeff());
  return {std::move(phi), std::move(phi_hat), std::move(norm_sq)};
}

SymmetricMetricField semiflat_step(const SymmetricMetricField& g, double dt, SemiflatFlow flow) {
  auto rhs = [flow](double, const SymmetricMetricField& s) {
    return flow == SemiflatFlow::IIB ? iib_rhs(s) : kr_rhs(s);
  };
  return rk4_step(g, 0.0, dt, rhs);
}

double cfl_limit(const SymmetricMetricField& g) {
  const double h = g.grid->h();
  const double max_det = g.determinant().pointwise([](double v) { return std::abs(v); }).max_abs();
  return 0.1 * h * h / std::max(max_det, 1e-12);
}

namespace {

Form<GridField> theorem_rhs(const SemiflatForms& forms, SemiflatFlow flow, bool phase_rotated) {
  const Frame& fr = semiflat_frame();
  Form<GridField> base = phase_rotated ? -forms.phi : forms.phi_hat;
  GridField w;
  double factor;
  if (flow == SemiflatFlow::IIB) {
    w = forms.norm_sq;
    factor = 1.0 / 16.0;
  } else {
    if (forms.norm_sq.min_value() <= 0.0) throw GeometricError("theorem_rhs: |phi|^2 <= 0 on the grid");
    w = forms.norm_sq.pointwise([](double v) { return std::log(v); });
    factor = 0.5;
  }
  Form<GridField> weighted = base.times(w);
  return exterior_d(lambda_contract(exterior_d(weighted, fr), fr), fr) * factor;
}

struct FormResidualNorms {
  double max_abs;
  double l2;
};

FormResidualNorms residual_norms(const Form<GridField>& r) {
  double mx = 0.0, sumsq = 0.0;
  for (const auto& [mask, c] : r.terms()) {
    mx = std::max(mx, c.max_abs());
    GridField sq = c * c;
    sumsq += sq.mean();
  }
  return {mx, std::sqrt(sumsq)};
}

}  // namespace

DualityReport duality_residual(const SymmetricMetricField& prev, const SymmetricMetricField& mid,
                               const SymmetricMetricField& next, double dt, SemiflatFlow flow,
                               bool phase_rotated) {
  SemiflatForms fp = reconstruct_forms(prev);
  SemiflatForms fm = reconstruct_forms(mid);
  SemiflatForms fn = reconstruct_forms(next);

  Form<GridField> lhs = phase_rotated ? (fn.phi_hat - fp.phi_hat) * (1.0 / (2.0 * dt))
                                      : (fn.phi - fp.phi) * (1.0 / (2.0 * dt));
  Form<GridField> rhs = theorem_rhs(fm, flow, phase_rotated);
  auto norms = residual_norms(lhs - rhs);

  GridField det = mid.determinant();
  return {norms.max_abs, norms.l2, det.min_value()};
}

ComponentIdentityReport component_identity_check(const SymmetricMetricField& prev,
                                                 const SymmetricMetricField& mid,
                                                 const SymmetricMetricField& next, double dt) {
  const auto grid = mid.grid;
  const int n = grid->n();
  SemiflatForms fm = reconstruct_forms(mid);
  const GridField& norm_sq = fm.norm_sq;

  ComponentIdentityReport rep{0.0, 0.0, 0.0};

  // d/dt g_jk vs (1/16) d_j d_k |phi|^2
  for (int i = 0; i < 3; ++i)
    for (int j = i; j < 3; ++j) {
      GridField dg = (next.entry(i, j) - prev.entry(i, j)) * (1.0 / (2.0 * dt));
      GridField expect = norm_sq.partial2(i, j) * (1.0 / 16.0);
      rep.metric_identity_resid = std::max(rep.metric_identity_resid, (dg - expect).max_abs());
    }

  // d/dt det g vs (det g / 16) sum_j d^2 |phi|^2 / dx_j dx^j with d/dx_j = g^{jk} d_k
  GridField det_prev = prev.determinant(), det_mid = mid.determinant(), det_next = next.determinant();
  GridField ddet = (det_next - det_prev) * (1.0 / (2.0 * dt));
  std::array<GridField, 3> dn = {norm_sq.partial(0), norm_sq.partial(1), norm_sq.partial(2)};
  std::array<std::array<GridField, 3>, 3> ddn;
  for (int j = 0; j < 3; ++j)
    for (int k = 0; k < 3; ++k) ddn[static_cast<std::size_t>(j)][static_cast<std::size_t>(k)] = dn[static_cast<std::size_t>(j)].partial(k);

  GridField dual_laplacian;  // sum_{j,k} g^{jk} d_k d_j |phi|^2
  {
    std::vector<double> data(grid->size());
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Eigen::Matrix3d ginv = mid.at_point(i, j, k).inverse();
          double s = 0.0;
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              s += ginv(a, b) * ddn[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].value(i, j, k);
          data[grid->index(i, j, k)] = s;
        }
    dual_laplacian = GridField::from_data(grid, std::move(data));
  }
  GridField expect_top = det_mid * dual_laplacian * (1.0 / 16.0);
  rep.top_form_resid = (ddet - expect_top).max_abs();

  // trace identity: sum g^{jk} d/dt g_jk = (d/dt det g)/det g
  {
    std::array<std::array<GridField, 3>, 3> dg;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        dg[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] =
            (next.entry(a, b) - prev.entry(a, b)) * (1.0 / (2.0 * dt));
    double mx = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
          Eigen::Matrix3d ginv = mid.at_point(i, j, k).inverse();
          double s = 0.0;
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              s += ginv(a, b) * dg[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].value(i, j, k);
          mx = std::max(mx, std::abs(s - ddet.value(i, j, k) / det_mid.value(i, j, k)));
        }
    rep.trace_identity_resid = mx;
  }
  return rep;
}

void SemiflatConfig::validate() const {
  if (n < 8) throw ConfigError("semiflat: N must be >= 8");
  if (!(dt > 0.0)) throw ConfigError("semiflat: dt must be positive");
  if (steps < 3) throw ConfigError("semiflat: need at least 3 steps");
  if (stride < 1) throw ConfigError("semiflat: stride must be >= 1");
}

SemiflatRunResult run_semiflat(const SemiflatConfig& config) {
  config.validate();
  auto grid = std::make_shared<const Grid>(config.n);
  SymmetricMetricField g = hessian_metric(grid, config.A, config.modes);

  const double cfl = cfl_limit(g);
  if (config.dt > cfl)
    throw ConfigError("semiflat: dt = " + std::to_string(config.dt) + " exceeds the parabolic bound " +
                      std::to_string(cfl));

  SemiflatRunResult result{{}, g, 0.0};
  SymmetricMetricField prev = g;
  SymmetricMetricField cur = semiflat_step(g, config.dt, config.flow);

  auto check_norm_identity = [&](const SymmetricMetricField& state) {
    SemiflatForms f = reconstruct_forms(state);
    GridField diff = f.norm_sq - state.determinant() * 4.0;
    result.max_norm_identity_resid = std::max(result.max_norm_identity_resid, diff.max_abs());
  };
  check_norm_identity(g);

  for (int step = 1; step < config.steps; ++step) {
    SymmetricMetricField next = semiflat_step(cur, config.dt, config.flow);
    if (step % config.stride == 0) {
      DualityReport rep = duality_residual(prev, cur, next, config.dt, config.flow);
      result.rows.push_back({step, rep.max_resid, rep.l2_resid, rep.min_det});
      check_norm_identity(cur);
    }
    prev = std::move(cur);
    cur = std::move(next);
  }
  result.final_state = cur;
  return result;
}

std::pair<std::string, std::string> dump_field(const GridField& f, const std::string& dir,
                                               const std::string& name) {
  static_assert(std::endian::native == std::endian::little, "field dumps are little-endian");
  if (f.is_uniform()) throw ConfigError("dump_field: field has no grid");
  const int n = f.grid()->n();
  const std::string bin_path = dir + "/" + name + ".bin";
  const std::string json_path = dir + "/" + name + ".json";
  std::ofstream bin(bin_path, std::ios::binary);
  if (!bin) throw ConfigError("dump_field: cannot open " + bin_path);
  bin.write(reinterpret_cast<const char*>(f.data().data()),
            static_cast<std::streamsize>(f.data().size() * sizeof(double)));
  nlohmann::json side;
  side["field"] = name;
  side["shape"] = {n, n, n};
  side["axis_order"] = "x1x2x3";
  side["dtype"] = "float64";
  side["endianness"] = "little";
  side["layout"] = "row-major";
  std::ofstream js(json_path);
  js << side.dump(2) << "\n";
  return {bin_path, json_path};
}

}  // namespace symflow
