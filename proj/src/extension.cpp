#include "fraclab/extension.hpp"

#include <Eigen/Sparse>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstring>
#include <limits>

#include "fraclab/quadrature.hpp"
#include "sphere_mean.hpp"

namespace fraclab {

HalfStripGrid::HalfStripGrid(GridPtr radial, std::vector<double> t_nodes)
    : radial_(std::move(radial)), t_(std::move(t_nodes)) {
  if (!radial_) throw DomainError("HalfStripGrid: null radial grid");
  if (radial_->size() < 4) throw DomainError("HalfStripGrid: need at least 4 radial nodes");
  if (t_.empty() || !(t_.front() > 0.0)) throw DomainError("HalfStripGrid: need t_1 > 0");
  for (std::size_t j = 1; j < t_.size(); ++j)
    if (!(t_[j] > t_[j - 1])) throw DomainError("HalfStripGrid: t nodes must increase");
  if (near_count() < 8)
    throw DomainError("HalfStripGrid: need at least 8 nodes below 0.01 t_max");
  sigma_.push_back(0.0);
  for (double t : t_) sigma_.push_back(std::pow(t, 2.0 * order()));
}

std::shared_ptr<const HalfStripGrid> HalfStripGrid::graded(GridPtr radial, double t_min,
                                                           double t_max, std::size_t count) {
  if (!(t_min > 0.0 && t_max > t_min) || count < 2)
    throw DomainError("HalfStripGrid::graded: need 0 < t_min < t_max and count >= 2");
  const double N = static_cast<double>(count);
  const double gam = std::log(t_min / t_max) / std::log(1.0 / N);
  std::vector<double> t(count);
  for (std::size_t j = 1; j <= count; ++j) t[j - 1] = t_max * std::pow(j / N, gam);
  t.front() = t_min;
  t.back() = t_max;
  return std::make_shared<const HalfStripGrid>(std::move(radial), std::move(t));
}

std::shared_ptr<const HalfStripGrid> HalfStripGrid::geometric(GridPtr radial, double t_min,
                                                              double t_max, double nodes_per_octave) {
  if (!(t_min > 0.0 && t_max > t_min && nodes_per_octave > 0.0))
    throw DomainError("HalfStripGrid::geometric: need 0 < t_min < t_max and npo > 0");
  const double q = std::exp2(1.0 / nodes_per_octave);
  std::vector<double> t{t_min};
  while (t.back() < t_max * (1.0 - 1e-12)) t.push_back(std::min(t.back() * q, t_max));
  if (t.size() > 1 && t.back() / t[t.size() - 2] < std::sqrt(q)) {
    t.pop_back();
    t.back() = t_max;
  }
  return std::make_shared<const HalfStripGrid>(std::move(radial), std::move(t));
}

std::size_t HalfStripGrid::near_count() const {
  const double lim = 0.01 * t_max();
  return static_cast<std::size_t>(std::count_if(t_.begin(), t_.end(), [&](double t) { return t < lim; }));
}

std::uint64_t HalfStripGrid::hash() const {
  std::uint64_t h = radial_->hash();
  for (double t : t_) {
    std::uint64_t bits;
    std::memcpy(&bits, &t, sizeof bits);
    for (int b = 0; b < 8; ++b) {
      h ^= (bits >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  }
  return h;
}

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::convolved: return "convolved";
    case Provenance::solved: return "solved";
    case Provenance::sampled: return "sampled";
  }
  return "?";
}

namespace {

// Four-point Lagrange stencil around x in the increasing array xs.
struct Stencil4 {
  std::size_t start = 0;
  std::array<double, 4> w{}, dw{};
};

Stencil4 lagrange4(std::span<const double> xs, double x) {
  Stencil4 st;
  const std::size_t N = xs.size();
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  const std::size_t idx = it == xs.begin() ? 0 : static_cast<std::size_t>(it - xs.begin()) - 1;
  st.start = std::min(idx > 0 ? idx - 1 : 0, N - 4);
  const double* p = xs.data() + st.start;
  for (int a = 0; a < 4; ++a) {
    double num = 1.0, den = 1.0, dsum = 0.0;
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      den *= p[a] - p[b];
      num *= x - p[b];
    }
    for (int b = 0; b < 4; ++b) {
      if (b == a) continue;
      double prod = 1.0;
      for (int c = 0; c < 4; ++c)
        if (c != a && c != b) prod *= x - p[c];
      dsum += prod;
    }
    st.w[a] = num / den;
    st.dw[a] = dsum / den;
  }
  return st;
}

// Cell measures and transmissibilities of the finite-volume scheme. Row
// j = 0 is t = 0.
struct StripStencil {
  int n;
  double s;
  std::size_t M, T1;      // radial nodes, rows including t = 0
  std::vector<double> r, t;
  std::vector<double> A;  // ∫ ρ^{n-1} over radial cells
  std::vector<double> B;  // ∫ t^{1-2s} over vertical cells
  std::vector<double> R;  // ∫_{r_i}^{r_{i+1}} ρ^{1-n}
  std::vector<double> S;  // ∫_{t_j}^{t_{j+1}} t^{2s-1}

  explicit StripStencil(const HalfStripGrid& g) : n(g.dim()), s(g.order()) {
    M = g.cols();
    T1 = g.rows() + 1;
    r.assign(g.radial().nodes().begin(), g.radial().nodes().end());
    t.push_back(0.0);
    t.insert(t.end(), g.t_nodes().begin(), g.t_nodes().end());
    auto rpow = [&](double a, double b) { return (std::pow(b, n) - std::pow(a, n)) / n; };
    A.resize(M);
    for (std::size_t i = 0; i < M; ++i) {
      const double lo = i == 0 ? 0.0 : 0.5 * (r[i - 1] + r[i]);
      const double hi = i + 1 == M ? r[i] : 0.5 * (r[i] + r[i + 1]);
      A[i] = rpow(lo, hi);
    }
    const double e = 2.0 - 2.0 * s;
    B.resize(T1);
    for (std::size_t j = 0; j < T1; ++j) {
      const double lo = j == 0 ? 0.0 : 0.5 * (t[j - 1] + t[j]);
      const double hi = j + 1 == T1 ? t[j] : 0.5 * (t[j] + t[j + 1]);
      B[j] = (std::pow(hi, e) - std::pow(lo, e)) / e;
    }
    R.resize(M - 1);
    for (std::size_t i = 0; i + 1 < M; ++i) {
      const double a = r[i], b = r[i + 1];
      if (n == 1) R[i] = b - a;
      else if (n == 2) R[i] = std::log(b / a);
      else R[i] = (std::pow(b, 2.0 - n) - std::pow(a, 2.0 - n)) / (2.0 - n);
    }
    S.resize(T1 - 1);
    for (std::size_t j = 0; j + 1 < T1; ++j)
      S[j] = (std::pow(t[j + 1], 2.0 * s) - std::pow(t[j], 2.0 * s)) / (2.0 * s);
  }

  double kr(std::size_t i, std::size_t j) const { return B[j] / R[i]; }  // (i,j)-(i+1,j)
  double kt(std::size_t i, std::size_t j) const { return A[i] / S[j]; }  // (i,j)-(i,j+1)
  std::size_t id(std::size_t i, std::size_t j) const { return i * T1 + j; }
};

// ∫_0^H d^e (d²+t²)^{-q} dd, panels graded toward the scale t.
double kernel_moment(double e, double q, double H, double t) {
  auto f = [&](double d) { return std::pow(d, e) * std::pow(d * d + t * t, -q); };
  if (t >= H) return quad::integrate_gl(f, 0.0, H, 16);
  double acc = 0.0, a = 0.125 * t;
  acc += quad::integrate_gl(f, 0.0, a, 16);
  while (a < H) {
    const double b = std::min(2.0 * a, H);
    acc += quad::integrate_gl(f, a, b, 8);
    a = b;
  }
  return acc;
}

struct Node {
  double d, w, m, inside;  // radius, weight, body + tail, inside measure
};

}  // namespace

FieldSample ExtensionField::sample(double r, double t) const {
  const auto& g = *grid;
  const double s = g.order();
  if (r < 0.0 || t < 0.0) throw DomainError("ExtensionField: negative coordinate");
  if (r > g.radial().r_max() * (1.0 + 1e-12) || t > g.t_max() * (1.0 + 1e-12))
    throw DomainError("ExtensionField: point outside the grid");
  const auto sr = lagrange4(g.radial().nodes(), r);
  const auto st = lagrange4(g.sigma(), std::pow(t, 2.0 * s));
  FieldSample out;
  double du_dsig = 0.0;
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b) {
      const double v = at(sr.start + a, st.start + b);
      out.value += sr.w[a] * st.w[b] * v;
      out.d_r += sr.dw[a] * st.w[b] * v;
      du_dsig += sr.w[a] * st.dw[b] * v;
    }
  out.flux_t = 2.0 * s * du_dsig;
  return out;
}

RadialFunction ExtensionField::trace_function() const {
  return RadialFunction(grid->radial_ptr(), trace);
}

ExtensionField sample_field(const StripPtr& grid, const std::function<double(double, double)>& f) {
  ExtensionField U;
  U.grid = grid;
  const auto& g = *grid;
  U.values.resize(static_cast<Eigen::Index>(g.cols()), static_cast<Eigen::Index>(g.rows()));
  for (std::size_t i = 0; i < g.cols(); ++i) {
    const double r = g.radial()[i];
    U.trace.push_back(f(r, 0.0));
    for (std::size_t j = 0; j < g.rows(); ++j)
      U.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = f(r, g.t_nodes()[j]);
  }
  return U;
}

ExtensionField poisson_extend(const RadialFunction& u, const StripPtr& grid) {
  const auto& g = *grid;
  const int n = g.dim();
  const double s = g.order();
  if (u.grid().dim() != n || u.grid().order() != s)
    throw DomainError("poisson_extend: profile and grid disagree on (n, s)");
  const auto m = detail::model_of(u);
  const double iota = poisson_normalizer(n, s);
  const double area = sphere_area(n);
  const double q = 0.5 * n + s;
  const double far = m.cut + g.radial().r_max();

  // Far field d = far / v on [0, 1]: weight v^{2s-1} for the body, v^{2s-1-e}
  // for a tail c r^e.
  const double e = m.tail.exponent;
  const bool has_tail = m.tail.coef != 0.0;
  if (has_tail && 2.0 * s - 1.0 - e <= -1.0)
    throw DomainError("poisson_extend: tail decays too slowly for the Poisson kernel");
  const int nf = 24;
  const auto& gj_body = quad::gauss_jacobi(nf, 0.0, 2.0 * s - 1.0);
  const auto& gj_tail = quad::gauss_jacobi(nf, 0.0, has_tail ? 2.0 * s - 1.0 - e : 0.0);
  const double sb = std::pow(0.5, 2.0 * s), st = std::pow(0.5, has_tail ? 2.0 * s - e : 1.0);

  ExtensionField U;
  U.grid = grid;
  U.provenance = Provenance::convolved;
  U.values.resize(static_cast<Eigen::Index>(g.cols()), static_cast<Eigen::Index>(g.rows()));
  double min_mass = 1.0;

  for (std::size_t i = 0; i < g.cols(); ++i) {
    const double r = g.radial()[i];
    const double u0 = u.value(i);
    U.trace.push_back(u0);

    const double res = m.resolution(r);
    double delta = std::min(0.5 * res, 0.25 * r);
    if (m.cut - r > 1e-9 * r) delta = std::min(delta, 0.5 * (m.cut - r));
    if (r - m.head_edge > 1e-9 * r) delta = std::min(delta, 0.5 * (r - m.head_edge));
    const double H = 0.5 * delta;

    // Zone [0, H]: M(d)/d² as a quadratic in d², as for the operator itself.
    auto M_at = [&](double d) {
      const auto sm = detail::sphere_mean(m, n, r, d, u0);
      return sm.body + sm.tail;
    };
    double c[3];
    {
      const double h[3] = {H, 0.5 * H, 0.25 * H};
      double x[3], y[3];
      for (int k = 0; k < 3; ++k) {
        x[k] = h[k] * h[k];
        y[k] = M_at(h[k]) / x[k];
      }
      const double d01 = (y[1] - y[0]) / (x[1] - x[0]), d12 = (y[2] - y[1]) / (x[2] - x[1]);
      c[2] = (d12 - d01) / (x[2] - x[0]);
      c[1] = d01 - c[2] * (x[0] + x[1]);
      c[0] = y[0] - c[1] * x[0] - c[2] * x[0] * x[0];
    }

    std::vector<Node> nodes;
    auto add_panel = [&](double a, double b, int order) {
      const auto& gl = quad::gauss_legendre(order);
      const double hh = 0.5 * (b - a), mid = 0.5 * (a + b);
      for (std::size_t k = 0; k < gl.size(); ++k) {
        const double d = mid + hh * gl.nodes[k];
        const auto sm = detail::sphere_mean(m, n, r, d, u0);
        nodes.push_back({d, hh * gl.weights[k], sm.body + sm.tail, sm.inside});
      }
    };
    add_panel(H, delta, 16);
    const auto br = detail::d_breaks(m, r, delta, far);
    for (std::size_t k = 0; k + 1 < br.size(); ++k) add_panel(br[k], br[k + 1], 8);

    std::vector<double> vb(nf), vt(nf), tail_vals(nf, 0.0);
    for (int k = 0; k < nf; ++k) {
      vb[k] = 0.5 * (1.0 + gj_body.nodes[k]);
      vt[k] = 0.5 * (1.0 + gj_tail.nodes[k]);
      if (has_tail)
        tail_vals[k] =
            std::pow(vt[k], e) * detail::sphere_mean(m, n, r, far / vt[k], u0).tail;
    }

    for (std::size_t j = 0; j < g.rows(); ++j) {
      const double t = g.t_nodes()[j];
      double I = 0.0;
      for (int k = 0; k < 3; ++k) I += c[k] * kernel_moment(n + 1.0 + 2.0 * k, q, H, t);
      double mass = area * kernel_moment(n - 1.0, q, H, t);
      for (const auto& nd : nodes) {
        const double K = std::pow(nd.d, n - 1.0) * std::pow(nd.d * nd.d + t * t, -q);
        I += nd.w * K * nd.m;
        mass += nd.w * K * nd.inside;
      }
      const double fp = std::pow(far, -2.0 * s);
      double fb = 0.0, ft = 0.0;
      for (int k = 0; k < nf; ++k) {
        const double xb = t * vb[k] / far, xt = t * vt[k] / far;
        fb += gj_body.weights[k] * std::pow(1.0 + xb * xb, -q);
        if (has_tail) ft += gj_tail.weights[k] * tail_vals[k] * std::pow(1.0 + xt * xt, -q);
      }
      I += fp * (-u0 * area * sb * fb + st * ft);
      const double pre = iota * std::pow(t, 2.0 * s);
      U.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = u0 + pre * I;
      min_mass = std::min(min_mass, pre * mass);
    }
  }
  U.min_kernel_mass = min_mass;
  U.truncation_flag = !has_tail && min_mass < 0.999 && !u.decays(1e-6);
  return U;
}

FluxResult weighted_flux(const ExtensionField& U, std::size_t fit_nodes) {
  const auto& g = *U.grid;
  const double s = g.order();
  if (g.near_count() < 3) throw DomainError("weighted_flux: need 3 nodes below 0.01 t_max");
  const std::size_t k = std::min(fit_nodes, g.rows());
  if (k < 2) throw DomainError("weighted_flux: need at least 2 fit nodes");
  const std::size_t nb = std::min<std::size_t>(3, k - 1);
  const double tk = g.t_nodes()[k - 1];
  const double ex[3] = {2.0 * s, 2.0, 2.0 + 2.0 * s};

  Eigen::MatrixXd Phi(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(nb));
  for (std::size_t j = 0; j < k; ++j)
    for (std::size_t b = 0; b < nb; ++b)
      Phi(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(b)) =
          std::pow(g.t_nodes()[j] / tk, ex[b]);
  const auto qr = Phi.colPivHouseholderQr();

  std::vector<double> flux(g.cols());
  FluxResult out{RadialFunction(g.radial_ptr(), std::vector<double>(g.cols(), 0.0)), {}, {}};
  for (std::size_t i = 0; i < g.cols(); ++i) {
    Eigen::VectorXd y(static_cast<Eigen::Index>(k));
    for (std::size_t j = 0; j < k; ++j)
      y[static_cast<Eigen::Index>(j)] = U.values(static_cast<Eigen::Index>(i),
                                                 static_cast<Eigen::Index>(j)) - U.trace[i];
    const Eigen::VectorXd coef = qr.solve(y);
    const Eigen::VectorXd lead = Phi.col(0) * coef[0];
    const double misfit = (Phi * coef - y).norm();
    const double scale = lead.norm();
    double rel = scale > 0.0 ? misfit / scale : (misfit > 0.0 ? 1.0 : 0.0);
    if (y.cwiseAbs().maxCoeff() <= 1e-14 * std::max(1.0, std::fabs(U.trace[i]))) rel = 0.0;
    out.residual.push_back(rel);
    out.unreliable.push_back(rel > 0.1 ? 1 : 0);
    flux[i] = -2.0 * s * coef[0] * std::pow(tk, -2.0 * s);
  }
  out.flux = RadialFunction(g.radial_ptr(), std::move(flux));
  return out;
}

DegenerateResult solve_degenerate(const BoundaryFlux& law,
                                  const std::function<double(double, double)>& outer,
                                  const StripPtr& grid, const DegenerateOptions& opts) {
  const auto& g = *grid;
  const StripStencil st(g);
  const std::size_t M = st.M, T1 = st.T1;
  const double kap = kappa_s(st.s);
  if (!law.source.empty() && law.source.size() != M)
    throw DomainError("solve_degenerate: source must have one value per radial node");
  if (law.mu != 0.0 && !(law.p >= 1.0)) throw DomainError("solve_degenerate: need p >= 1");
  if (!(opts.relaxation > 0.0 && opts.relaxation <= 1.0))
    throw DomainError("solve_degenerate: relaxation must lie in (0, 1]");

  // Unknowns: every node off r = r_M and t = t_max.
  auto is_dir = [&](std::size_t i, std::size_t j) { return i + 1 == M || j + 1 == T1; };
  std::vector<long> map(M * T1, -1);
  long N = 0;
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < T1; ++j)
      if (!is_dir(i, j)) map[st.id(i, j)] = N++;

  std::vector<double> full(M * T1, 0.0);
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < T1; ++j)
      if (is_dir(i, j)) full[st.id(i, j)] = outer(st.r[i], st.t[j]);

  std::vector<Eigen::Triplet<double>> trip;
  Eigen::VectorXd rhs0 = Eigen::VectorXd::Zero(N);
  DegenerateResult res;
  auto link = [&](std::size_t a, std::size_t b, double K) {
    const long ia = map[a], ib = map[b];
    if (ia >= 0) trip.emplace_back(ia, ia, K);
    if (ib >= 0) trip.emplace_back(ib, ib, K);
    if (ia >= 0 && ib >= 0) {
      trip.emplace_back(ia, ib, -K);
      trip.emplace_back(ib, ia, -K);
    }
    if (ia >= 0 && ib < 0) rhs0[ia] += K * full[b];
    if (ib >= 0 && ia < 0) rhs0[ib] += K * full[a];
  };
  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < T1; ++j) {
      if (i + 1 < M) link(st.id(i, j), st.id(i + 1, j), st.kr(i, j));
      if (j + 1 < T1) link(st.id(i, j), st.id(i, j + 1), st.kt(i, j));
    }
  Eigen::SparseMatrix<double> L(N, N);
  L.setFromTriplets(trip.begin(), trip.end());

  // Boundary rows: area-weighted coefficients of the flux law.
  std::vector<long> bidx;
  std::vector<double> bA, bpot, bsrc;
  for (std::size_t i = 0; i + 1 < M; ++i) {
    bidx.push_back(map[st.id(i, 0)]);
    bA.push_back(st.A[i]);
    bpot.push_back(law.lambda == 0.0 ? 0.0 : kap * law.lambda * std::pow(st.r[i], -law.alpha));
    bsrc.push_back(law.source.empty() ? 0.0 : law.source[i]);
  }
  Eigen::VectorXd rhs = rhs0;
  for (std::size_t b = 0; b < bidx.size(); ++b) rhs[bidx[b]] += bA[b] * bsrc[b];

  // M-matrix check on the linear part (potential included).
  {
    Eigen::VectorXd diag = L.diagonal(), off = Eigen::VectorXd::Zero(N);
    for (int k = 0; k < L.outerSize(); ++k)
      for (Eigen::SparseMatrix<double>::InnerIterator it(L, k); it; ++it)
        if (it.row() != it.col()) {
          if (it.value() > 0.0) res.m_matrix = false;
          off[it.row()] += std::fabs(it.value());
        }
    for (std::size_t b = 0; b < bidx.size(); ++b) diag[bidx[b]] -= bA[b] * bpot[b];
    for (long k = 0; k < N; ++k)
      if (diag[k] < off[k] * (1.0 - 1e-12)) res.m_matrix = false;
  }

  Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt;
  ldlt.analyzePattern(L);
  auto solve_with = [&](const Eigen::VectorXd& shift, const Eigen::VectorXd& b) {
    Eigen::SparseMatrix<double> Aop = L;
    for (std::size_t k = 0; k < bidx.size(); ++k) Aop.coeffRef(bidx[k], bidx[k]) -= shift[static_cast<Eigen::Index>(k)];
    ldlt.factorize(Aop);
    if (ldlt.info() != Eigen::Success) throw ConvergenceError("solve_degenerate: factorisation failed");
    if (ldlt.vectorD().minCoeff() < 0.0) res.indefinite = true;
    return Eigen::VectorXd(ldlt.solve(b));
  };

  const auto nb = static_cast<Eigen::Index>(bidx.size());
  Eigen::VectorXd V(N);
  if (opts.initial) {
    for (std::size_t i = 0; i < M; ++i)
      for (std::size_t j = 0; j < T1; ++j)
        if (map[st.id(i, j)] >= 0) V[map[st.id(i, j)]] = opts.initial->at(i, j);
  } else {
    Eigen::VectorXd lin(nb);
    for (Eigen::Index k = 0; k < nb; ++k) lin[k] = bA[static_cast<std::size_t>(k)] * bpot[static_cast<std::size_t>(k)];
    V = solve_with(lin, rhs);
  }

  const bool nonlinear = law.mu != 0.0;
  for (int it = 0; it < opts.max_iter; ++it) {
    Eigen::VectorXd shift(nb);
    Eigen::VectorXd next;
    if (opts.method == DegenerateOptions::Method::newton) {
      // F(V) = L V - rhs - A κ μ |V|^{p-1} V - A pot V on boundary rows.
      Eigen::VectorXd F = L * V - rhs;
      for (Eigen::Index k = 0; k < nb; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double v = V[bidx[kk]], av = std::fabs(v);
        const double nl = nonlinear ? kap * law.mu * std::pow(av, law.p - 1.0) : 0.0;
        F[bidx[kk]] -= bA[kk] * (bpot[kk] + nl) * v;
        shift[k] = bA[kk] * (bpot[kk] + law.p * nl);
      }
      next = V - solve_with(shift, F);
    } else {
      for (Eigen::Index k = 0; k < nb; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        const double nl = nonlinear ? kap * law.mu * std::pow(std::fabs(V[bidx[kk]]), law.p - 1.0) : 0.0;
        shift[k] = bA[kk] * (bpot[kk] + nl);
      }
      const Eigen::VectorXd sol = solve_with(shift, rhs);
      next = (1.0 - opts.relaxation) * V + opts.relaxation * sol;
    }
    const double scale = next.cwiseAbs().maxCoeff();
    const double change = scale > 0.0 ? (next - V).cwiseAbs().maxCoeff() / scale : 0.0;
    V = next;
    res.history.push_back(change);
    res.iterations = it + 1;
    if (!std::isfinite(change)) break;
    if (change <= opts.tol || (!nonlinear && opts.method == DegenerateOptions::Method::newton)) break;
  }
  const bool direct = !nonlinear && opts.method == DegenerateOptions::Method::newton;
  if (!direct && (res.history.empty() || !(res.history.back() <= opts.tol)))
    throw DivergenceError("solve_degenerate: no convergence within max_iter", res.history);

  for (std::size_t i = 0; i < M; ++i)
    for (std::size_t j = 0; j < T1; ++j)
      if (map[st.id(i, j)] >= 0) full[st.id(i, j)] = V[map[st.id(i, j)]];

  ExtensionField& U = res.field;
  U.grid = grid;
  U.provenance = Provenance::solved;
  U.values.resize(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(T1 - 1));
  for (std::size_t i = 0; i < M; ++i) {
    U.trace.push_back(full[st.id(i, 0)]);
    for (std::size_t j = 1; j < T1; ++j)
      U.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j - 1)) = full[st.id(i, j)];
  }
  return res;
}

double extension_energy(const ExtensionField& U) {
  const StripStencil st(*U.grid);
  double acc = 0.0;
  for (std::size_t i = 0; i < st.M; ++i)
    for (std::size_t j = 0; j < st.T1; ++j) {
      const double v = U.at(i, j);
      if (i + 1 < st.M) {
        const double d = U.at(i + 1, j) - v;
        acc += st.kr(i, j) * d * d;
      }
      if (j + 1 < st.T1) {
        const double d = U.at(i, j + 1) - v;
        acc += st.kt(i, j) * d * d;
      }
    }
  return sphere_area(st.n) * acc;
}

double stencil_residual(const ExtensionField& U, std::size_t skip) {
  const StripStencil st(*U.grid);
  double worst = 0.0;
  for (std::size_t i = skip; i + 1 < st.M; ++i)
    for (std::size_t j = 1; j + 1 < st.T1; ++j) {
      const double v = U.at(i, j);
      double res = 0.0, mag = 0.0;
      auto term = [&](double K, double w) {
        res += K * (v - w);
        mag += K * std::fabs(v - w);
      };
      term(st.kr(i, j), U.at(i + 1, j));
      if (i > 0) term(st.kr(i - 1, j), U.at(i - 1, j));
      term(st.kt(i, j), U.at(i, j + 1));
      term(st.kt(i, j - 1), U.at(i, j - 1));
      if (mag > 0.0) worst = std::max(worst, std::fabs(res) / mag);
    }
  return worst;
}

}  // namespace fraclab
