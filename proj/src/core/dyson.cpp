#include "dyson.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "quadrature.hpp"

namespace pointdyn {

cplx convention_phase(SignConvention c) {
  return c == SignConvention::minus_i ? cplx(0.0, -1.0) : cplx(0.0, 1.0);
}

const char* to_string(SignConvention c) {
  return c == SignConvention::minus_i ? "minus_i" : "plus_i";
}

TimeQuadrature make_time_quadrature(double t, int n, TimeScheme scheme) {
  if (!std::isfinite(t)) fail(ErrorCode::invalid_argument, "time quadrature: t");
  TimeQuadrature tq;
  tq.t = t;
  tq.scheme = scheme;
  if (scheme == TimeScheme::gauss_legendre) {
    require(n >= 1, "time quadrature: need at least one node");
    QuadratureRule r = gauss_legendre(n, 0.0, t);
    tq.nodes = std::move(r.nodes);
    tq.weights = std::move(r.weights);
    tq.cumulative = cumulative_integration_matrix(tq.nodes, 0.0);
  } else {
    require(n >= 3 && n % 2 == 1, "Simpson rule needs an odd node count >= 3");
    const double h = t / (n - 1);
    tq.nodes.resize(n);
    tq.weights.resize(n);
    for (int k = 0; k < n; ++k) {
      tq.nodes[k] = h * k;
      tq.weights[k] = h / 3.0 * (k == 0 || k == n - 1 ? 1.0 : (k % 2 ? 4.0 : 2.0));
    }
  }
  return tq;
}

cplx phase_integral(double t, double theta) {
  const double x = t * theta;
  if (std::abs(x) < 1e-6) return t * cplx(1.0 - x * x / 6.0, 0.5 * x);
  // t e^{ix/2} sin(x/2) / (x/2): no cancellation for small x
  return (t * std::sin(0.5 * x) / (0.5 * x)) * cplx(std::cos(0.5 * x), std::sin(0.5 * x));
}

namespace {

// Weighted potential and kinetic diagonal of one (V, grid) pair.
struct Frame {
  RealVector d;  // p_j^2
  Matrix vw;     // w V~(p_j - p_k) / sqrt(2 pi)
  Eigen::Index n = 0;
};

Frame make_frame(const PotentialTransform& v, const MomentumGrid& grid) {
  Frame f;
  f.n = static_cast<Eigen::Index>(grid.size());
  f.d = grid.nodes().array().square();
  const Vector table = potential_on_differences(v, grid);
  const double w = grid.spacing();
  f.vw.resize(f.n, f.n);
  for (Eigen::Index k = 0; k < f.n; ++k)
    for (Eigen::Index j = 0; j < f.n; ++j)
      f.vw(j, k) = w * table(j - k + f.n - 1);
  return f;
}

Vector phases(const RealVector& d, double s) {
  Vector e(d.size());
  for (Eigen::Index j = 0; j < d.size(); ++j) e(j) = std::polar(1.0, s * d(j));
  return e;
}

// e^{i tau D} X e^{-i tau D}
Matrix rotate(const Frame& f, double tau, const Matrix& x) {
  const Vector e = phases(f.d, tau);
  Matrix out(f.n, f.n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < f.n; ++k)
    for (Eigen::Index j = 0; j < f.n; ++j)
      out(j, k) = e(j) * x(j, k) * std::conj(e(k));
  return out;
}

Matrix first_order(const Frame& f, double t) {
  Matrix out(f.n, f.n);
#pragma omp parallel for schedule(static)
  for (Eigen::Index k = 0; k < f.n; ++k)
    for (Eigen::Index j = 0; j < f.n; ++j)
      out(j, k) = phase_integral(t, f.d(j) - f.d(k)) * f.vw(j, k);
  return out;
}

// Orders on one Gauss-Legendre panel [0, h]. Each column of `nodes_` is the
// current order at one node, stored flat.
class PanelRecursion {
 public:
  PanelRecursion(const Frame& f, double h, int m)
      : f_(f), rule_(make_time_quadrature(h, m)) {
    interaction_.reserve(m);
    for (int k = 0; k < m; ++k)
      interaction_.push_back(rotate(f_, rule_.nodes[k], f_.vw));
  }

  const TimeQuadrature& rule() const { return rule_; }
  int order() const { return order_; }

  // Advances to the next order; returns it at the panel end.
  Matrix advance() {
    const int m = static_cast<int>(rule_.nodes.size());
    const Eigen::Index n = f_.n;
    ++order_;
    if (order_ == 1) {
      nodes_.resize(n * n, m);
      for (int k = 0; k < m; ++k) {
        const Matrix a = first_order(f_, rule_.nodes[k]);
        nodes_.col(k) = Eigen::Map<const Vector>(a.data(), n * n);
      }
      return first_order(f_, rule_.t);
    }
    Matrix products(n * n, m);
    for (int k = 0; k < m; ++k) {
      Eigen::Map<const Matrix> prev(nodes_.col(k).data(), n, n);
      Eigen::Map<Matrix>(products.col(k).data(), n, n).noalias() =
          prev * interaction_[k];
    }
    nodes_.noalias() = products * rule_.cumulative.transpose().cast<cplx>();
    const Eigen::Map<const Eigen::VectorXd> w(rule_.weights.data(), m);
    const Vector end = products * w.cast<cplx>();
    return Eigen::Map<const Matrix>(end.data(), n, n);
  }

  Eigen::Map<const Matrix> at_node(int k) const {
    return Eigen::Map<const Matrix>(nodes_.col(k).data(), f_.n, f_.n);
  }

 private:
  const Frame& f_;
  TimeQuadrature rule_;
  std::vector<Matrix> interaction_;
  Matrix nodes_;
  int order_ = 0;
};

double weighted_schur(const Matrix& a) {
  const RealMatrix abs = a.cwiseAbs();
  return std::sqrt(abs.rowwise().sum().maxCoeff() *
                   abs.colwise().sum().maxCoeff());
}

int panel_levels(const MomentumGrid& grid, double t) {
  const double hmax = max_panel_length(grid);
  int levels = 0;
  while (std::abs(t) / std::ldexp(1.0, levels) > hmax) ++levels;
  return levels;
}

bool tail_certified(const std::vector<double>& bounds, double tol,
                    double& tail) {
  const std::size_t n = bounds.size();
  if (bounds.back() == 0.0) {
    tail = 0.0;
    return true;
  }
  if (n < 2 || bounds.back() > tol) return false;
  const double r = bounds[n - 1] / bounds[n - 2];
  if (!(r <= 0.75)) return false;
  tail = bounds.back() * r / (1.0 - r);
  return true;
}

std::string not_certified_message(double t, int n_max, double last) {
  std::ostringstream os;
  os << "Dyson tail not certified at t = " << t << " after " << n_max
     << " orders (last Schur bound " << last << ")";
  return os.str();
}

}  // namespace

double max_panel_length(const MomentumGrid& grid) {
  return 2.0 / grid.max_frequency();
}

KernelMatrix kernel_first(double t, const PotentialTransform& v,
                          const MomentumGrid& grid) {
  if (!std::isfinite(t)) fail(ErrorCode::invalid_argument, "kernel_first: t");
  const auto n = static_cast<Eigen::Index>(grid.size());
  const RealVector& p = grid.nodes();
  const Vector table = potential_on_differences(v, grid);
  KernelMatrix k{grid, Matrix(n, n)};
#pragma omp parallel for schedule(static)
  for (Eigen::Index c = 0; c < n; ++c)
    for (Eigen::Index r = 0; r < n; ++r)
      k.entries(r, c) =
          phase_integral(t, p(r) * p(r) - p(c) * p(c)) * table(r - c + n - 1);
  return k;
}

KernelMatrix kernel_next(std::span<const KernelMatrix> prev_at_nodes,
                         const TimeQuadrature& tq, const PotentialTransform& v,
                         const MomentumGrid& grid) {
  if (prev_at_nodes.size() != tq.nodes.size())
    fail(ErrorCode::invalid_argument,
         "kernel_next: " + std::to_string(prev_at_nodes.size()) +
             " kernels for " + std::to_string(tq.nodes.size()) + " time nodes");
  for (const auto& k : prev_at_nodes)
    require_same_grid(k.grid, grid, "kernel_next");
  const Frame f = make_frame(v, grid);
  Matrix acc = Matrix::Zero(f.n, f.n);
  if (v.is_zero()) return KernelMatrix{grid, acc};
  for (std::size_t k = 0; k < tq.nodes.size(); ++k)
    acc.noalias() += tq.weights[k] * (prev_at_nodes[k].weighted() *
                                      rotate(f, tq.nodes[k], f.vw));
  return KernelMatrix::from_weighted(grid, acc);
}

DysonSeries dyson_sum(double t, const PotentialTransform& v,
                      const MomentumGrid& grid, double tol, int n_max,
                      int time_nodes) {
  if (!(tol > 0.0)) fail(ErrorCode::invalid_argument, "dyson_sum: tol <= 0");
  if (n_max < 1) fail(ErrorCode::invalid_argument, "dyson_sum: n_max < 1");
  if (time_nodes < 2)
    fail(ErrorCode::invalid_argument, "dyson_sum: time_nodes < 2");
  if (!std::isfinite(t)) fail(ErrorCode::invalid_argument, "dyson_sum: t");

  DysonSeries s;
  s.grid = grid;
  s.t = t;
  s.time_nodes = time_nodes;
  if (v.is_zero() || t == 0.0) {
    s.orders.push_back(KernelMatrix::zero(grid));
    s.schur_bounds.push_back(0.0);
    s.certified = true;
    return s;
  }

  const Frame f = make_frame(v, grid);
  const int levels = panel_levels(grid, t);
  const double h = std::ldexp(t, -levels);
  s.doubling_levels = levels;
  PanelRecursion panel(f, h, time_nodes);

  // by_level[l][n-1]: order n at time h 2^l
  std::vector<std::vector<Matrix>> by_level(levels + 1);
  for (int n = 1; n <= n_max; ++n) {
    by_level[0].push_back(panel.advance());
    for (int l = 0; l < levels; ++l) {
      const double tau = std::ldexp(h, l);
      const auto& lower = by_level[l];
      if (n == 1) {
        by_level[l + 1].push_back(first_order(f, 2.0 * tau));
        continue;
      }
      Matrix next = lower[n - 1] + rotate(f, tau, lower[n - 1]);
      for (int j = 1; j < n; ++j)
        next.noalias() += lower[j - 1] * rotate(f, tau, lower[n - j - 1]);
      by_level[l + 1].push_back(std::move(next));
    }
    const Matrix& a = by_level[levels][n - 1];
    require_finite(a, "dyson_sum");
    s.orders.push_back(KernelMatrix::from_weighted(grid, a));
    s.schur_bounds.push_back(weighted_schur(a));
    if (tail_certified(s.schur_bounds, tol, s.tail_estimate)) {
      s.certified = true;
      return s;
    }
  }
  s.tail_estimate = std::numeric_limits<double>::infinity();
  // message first: the by-value argument may be moved into before it is built
  std::string msg = not_certified_message(t, n_max, s.schur_bounds.back());
  throw TailNotCertified(msg, std::move(s));
}

Matrix assemble_weighted(const DysonSeries& s, SignConvention c) {
  const auto n = static_cast<Eigen::Index>(s.grid.size());
  Matrix g = Matrix::Identity(n, n);
  const cplx phase = convention_phase(c);
  cplx ph = 1.0;
  for (const auto& k : s.orders) {
    ph *= phase;
    g.noalias() += ph * k.weighted().adjoint();
  }
  return g;
}

KernelMatrix assemble_interaction_operator(const DysonSeries& s) {
  if (!s.certified)
    fail(ErrorCode::tail_not_certified,
         "assemble_interaction_operator: series is not certified");
  return KernelMatrix::from_weighted(s.grid,
                                     assemble_weighted(s, s.sign_convention));
}

PanelSamples dyson_panel(double h, const PotentialTransform& v,
                         const MomentumGrid& grid, double tol, int n_max,
                         int time_nodes) {
  if (std::abs(h) > max_panel_length(grid) * (1.0 + 1e-12))
    fail(ErrorCode::invalid_argument, "dyson_panel: panel too long for grid");
  const Frame f = make_frame(v, grid);
  PanelRecursion panel(f, h, time_nodes);
  PanelSamples out;
  out.rule = panel.rule();
  const Matrix id = Matrix::Identity(f.n, f.n);
  out.gamma.assign(time_nodes, id);
  out.gamma_end = id;
  if (v.is_zero() || h == 0.0) return out;

  const cplx phase = convention_phase(kResolvedConvention);
  cplx ph = 1.0;
  std::vector<double> bounds;
  for (int n = 1; n <= n_max; ++n) {
    const Matrix end = panel.advance();
    ph *= phase;
    out.gamma_end.noalias() += ph * end.adjoint();
    for (int k = 0; k < time_nodes; ++k)
      out.gamma[k].noalias() += ph * panel.at_node(k).adjoint();
    out.orders_used = n;
    bounds.push_back(weighted_schur(end));
    if (tail_certified(bounds, tol, out.tail_estimate)) return out;
  }
  DysonSeries partial;
  partial.grid = grid;
  partial.t = h;
  partial.schur_bounds = bounds;
  partial.tail_estimate = std::numeric_limits<double>::infinity();
  throw TailNotCertified(not_certified_message(h, n_max, bounds.back()),
                         std::move(partial));
}

}  // namespace pointdyn
