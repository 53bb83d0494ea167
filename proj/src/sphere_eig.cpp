#include "fraclab/sphere_eig.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "fraclab/constants.hpp"
#include "fraclab/forms.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

namespace {

constexpr double half_pi = std::numbers::pi / 2.0;

}  // namespace

AngularMesh::AngularMesh(std::vector<double> y) : y_(std::move(y)) {
  if (y_.size() < 3) throw DomainError("AngularMesh: need at least 2 elements");
  if (y_.front() != half_pi || y_.back() != 0.0)
    throw DomainError("AngularMesh: nodes must run from the pole (y = π/2) to the equator (y = 0)");
  for (std::size_t j = 1; j < y_.size(); ++j)
    if (!(y_[j] < y_[j - 1])) throw DomainError("AngularMesh: colatitude must increase");
  if (boundary_count() < 8) throw DomainError("AngularMesh: need at least 8 nodes in the last 1% of arc");
}

std::shared_ptr<const AngularMesh> AngularMesh::graded(std::size_t K, double s) {
  if (K < 16) throw DomainError("AngularMesh::graded: need K >= 16");
  const double y_min = std::min(1e-8, std::pow(10.0, -5.0 / s));
  const double y_mid = 0.05;
  const std::size_t n_geo = K / 2;
  const std::size_t n_uni = K - n_geo - 1;
  std::vector<double> y;
  y.reserve(K + 1);
  for (std::size_t k = 0; k < n_uni; ++k)
    y.push_back(half_pi - (half_pi - y_mid) * static_cast<double>(k) / static_cast<double>(n_uni));
  const double q = std::log(y_min / y_mid) / static_cast<double>(n_geo);
  for (std::size_t k = 0; k <= n_geo; ++k) y.push_back(y_mid * std::exp(q * static_cast<double>(k)));
  y.back() = y_min;
  y.push_back(0.0);
  return std::make_shared<const AngularMesh>(std::move(y));
}

double AngularMesh::phi(std::size_t j) const { return half_pi - y_[j]; }

std::shared_ptr<const AngularMesh> AngularMesh::coarsened() const {
  if (elements() % 2 != 0) throw DomainError("AngularMesh::coarsened: odd element count");
  std::vector<double> y;
  for (std::size_t j = 0; j < y_.size(); j += 2) y.push_back(y_[j]);
  return std::make_shared<const AngularMesh>(std::move(y));
}

std::size_t AngularMesh::boundary_count() const {
  const double lim = 0.01 * half_pi;
  return static_cast<std::size_t>(std::count_if(y_.begin(), y_.end(), [&](double y) { return y < lim; }));
}

double AngularForms::bulk(std::span<const double> psi) const {
  const double a2 = 0.25 * (n - 2.0 * s) * (n - 2.0 * s);
  const double l2 = ell * (ell + n - 2.0);
  double acc = 0.0;
  for (std::size_t e = 0; e < cells.size(); ++e) {
    const Cell& c = cells[e];
    const double u = psi[e], v = psi[e + 1], d = u - v;
    acc += c.k * d * d;
    acc += (a2 * c.m_hi + l2 * c.g_hi) * u * u + 2.0 * (a2 * c.m_mid + l2 * c.g_mid) * u * v +
           (a2 * c.m_lo + l2 * c.g_lo) * v * v;
  }
  return acc;
}

AngularForms assemble_angular(int n, double s, const MeshPtr& mesh, int ell) {
  check_order(n, s);
  if (!mesh) throw DomainError("assemble_angular: null mesh");
  if (ell < 0 || (ell > 0 && n < 2)) throw DomainError("assemble_angular: ell > 0 needs n >= 2");
  AngularForms F;
  F.n = n;
  F.s = s;
  F.ell = ell;
  F.mesh = mesh;
  const std::size_t N = mesh->size();
  for (auto* v : {&F.stiff_d, &F.mass_d, &F.ang_d}) v->assign(N, 0.0);
  for (auto* v : {&F.stiff_o, &F.mass_o, &F.ang_o}) v->assign(N - 1, 0.0);
  F.cells.resize(N - 1);

  const double beta = 1.0 - 2.0 * s;
  // In y = π/2 - φ the weight is cos^{n-1}y sin^{1-2s}y. The cell touching
  // y = 0 carries y^{1-2s} in the Jacobi rule; the remaining factor is smooth.
  auto smooth_part = [&](double y) {
    const double sy = y > 0.0 ? std::sin(y) / y : 1.0;
    return std::pow(std::cos(y), n - 1) * std::pow(sy, beta);
  };
  auto weight = [&](double y) { return std::pow(std::cos(y), n - 1) * std::pow(std::sin(y), beta); };

  for (std::size_t e = 0; e + 1 < N; ++e) {
    const double y0 = mesh->codist(e + 1), y1 = mesh->codist(e);  // y0 < y1
    const double h = y1 - y0;
    // N_lo is the hat of node e+1 (at y0), N_hi the hat of node e (at y1).
    auto cell = [&](auto&& g) {
      if (y0 == 0.0)
        return quad::integrate_jacobi([&](double y) { return smooth_part(y) * g(y); }, 0.0, y1, beta, 0.0, 8);
      return quad::integrate_gl([&](double y) { return weight(y) * g(y); }, y0, y1, 8);
    };
    const double m0 = cell([](double) { return 1.0; });
    if (!std::isfinite(m0) || !(m0 > 0.0)) throw AssemblyError("assemble_angular: weight quadrature failed", m0);
    auto lo = [&](double y) { return (y1 - y) / h; };
    auto hi = [&](double y) { return (y - y0) / h; };
    const double m_ll = cell([&](double y) { return lo(y) * lo(y); });
    const double m_hh = cell([&](double y) { return hi(y) * hi(y); });
    const double m_lh = cell([&](double y) { return lo(y) * hi(y); });
    const double k = m0 / (h * h);
    AngularForms::Cell& c = F.cells[e];
    c.k = k;
    c.m_hi = m_hh;
    c.m_mid = m_lh;
    c.m_lo = m_ll;
    F.stiff_d[e] += k;
    F.stiff_d[e + 1] += k;
    F.stiff_o[e] -= k;
    F.mass_d[e] += m_hh;
    F.mass_d[e + 1] += m_ll;
    F.mass_o[e] += m_lh;
    if (ell > 0) {
      // 1/sin²φ = 1/cos²y; the pole row is dropped, so only its neighbour's
      // hat meets the singular end and the product stays integrable.
      auto ic = [](double y) { const double c = std::cos(y); return 1.0 / (c * c); };
      const bool pole = e == 0;
      c.g_lo = cell([&](double y) { return ic(y) * lo(y) * lo(y); });
      F.ang_d[e + 1] += c.g_lo;
      if (!pole) {
        c.g_hi = cell([&](double y) { return ic(y) * hi(y) * hi(y); });
        c.g_mid = cell([&](double y) { return ic(y) * lo(y) * hi(y); });
        F.ang_d[e] += c.g_hi;
        F.ang_o[e] += c.g_mid;
      }
    }
  }
  return F;
}

double EigenResult::psi_at(double y) const {
  if (!mesh) throw DomainError("EigenResult::psi_at: no mesh");
  auto yy = mesh->codist();
  if (y >= yy.front()) return psi1.front();
  if (y <= 0.0) return psi1.back();
  // Cubic Lagrange in z = y^{2s}, which absorbs the leading y^{2s} term at
  // the equator; linear interpolation leaves kinks that the strip stencil sees.
  auto it = std::lower_bound(yy.begin(), yy.end(), y, std::greater<double>());
  const std::size_t e1 = static_cast<std::size_t>(it - yy.begin());
  const std::size_t last = yy.size() - 1;
  const std::size_t lo = std::min(e1 >= 2 ? e1 - 2 : 0, last - 3);
  const double two_s = 2.0 * s;
  const double z = std::pow(y, two_s);
  double zk[4];
  for (int k = 0; k < 4; ++k) zk[k] = std::pow(yy[lo + k], two_s);
  double acc = 0.0;
  for (int k = 0; k < 4; ++k) {
    double l = 1.0;
    for (int m = 0; m < 4; ++m)
      if (m != k) l *= (z - zk[m]) / (zk[k] - zk[m]);
    acc += l * psi1[lo + k];
  }
  return acc;
}

namespace {

struct Solved {
  double quotient = 0.0;  // bulk / (κ ψ(π/2)²)
  std::vector<double> psi;
};

// Minimises the bulk form over ψ with ψ_K = 1 (and ψ_0 = 0 when ell > 0).
// Nodes are condensed from the pole: q_j ψ_j² is the least energy of the
// cells above node j. Eliminating node j from cell j, written as
// [[k+A, B-k], [B-k, k+C]] plus q_j on its first entry, gives
//   q_{j+1} = q_j + A + 2B + C - (q_j+A+B)² / (k+q_j+A),
// which never subtracts two O(k) numbers.
Solved minimise(const AngularForms& F) {
  const std::size_t K = F.cells.size();
  const double a2 = 0.25 * (F.n - 2.0 * F.s) * (F.n - 2.0 * F.s);
  const double l2 = F.ell * (F.ell + F.n - 2.0);
  std::vector<double> q(K + 1, 0.0), ratio(K, 0.0);
  for (std::size_t e = 0; e < K; ++e) {
    const auto& c = F.cells[e];
    const double A = a2 * c.m_hi + l2 * c.g_hi, B = a2 * c.m_mid + l2 * c.g_mid, C = a2 * c.m_lo + l2 * c.g_lo;
    if (e == 0 && F.ell > 0) {
      q[1] = c.k + C;
      ratio[0] = 0.0;
      continue;
    }
    const double den = c.k + q[e] + A;
    if (!(den > 0.0)) throw ConvergenceError("solve_mu1: angular system lost positivity");
    const double g = q[e] + A + B;
    q[e + 1] = q[e] + A + 2.0 * B + C - g * g / den;
    ratio[e] = 1.0 - g / den;  // ψ_e / ψ_{e+1}
  }
  std::vector<double> x(K + 1);
  x[K] = 1.0;
  for (std::size_t e = K; e-- > 0;) x[e] = ratio[e] * x[e + 1];
  return {q[K] / kappa_s(F.s), std::move(x)};
}

}  // namespace

EigenResult solve_mu1(double lambda, const AngularForms& forms) {
  if (!forms.mesh) throw DomainError("solve_mu1: forms not assembled");
  Solved fine = minimise(forms);
  const std::size_t first = forms.ell > 0 ? 1 : 0;
  for (std::size_t j = first; j < fine.psi.size(); ++j)
    if (!(fine.psi[j] > 0.0)) throw ConvergenceError("solve_mu1: first eigenfunction not positive; refine the mesh");

  EigenResult res;
  res.n = forms.n;
  res.s = forms.s;
  res.lambda = lambda;
  res.mu1 = fine.quotient - lambda;
  res.psi1 = std::move(fine.psi);
  res.mesh = forms.mesh;
  if (forms.mesh->elements() % 2 == 0 && forms.mesh->elements() >= 32) {
    try {
      const AngularForms coarse = assemble_angular(forms.n, forms.s, forms.mesh->coarsened(), forms.ell);
      res.estimate = std::abs(fine.quotient - minimise(coarse).quotient) / 3.0;
    } catch (const DomainError&) {
      // Coarse mesh violates the boundary-node rule; leave the estimate at 0.
    }
  }
  return res;
}

ExtensionField build_W1(const EigenResult& res, const StripPtr& grid) {
  if (!grid) throw DomainError("build_W1: null grid");
  if (grid->dim() != res.n || grid->order() != res.s) throw DomainError("build_W1: grid (n, s) differs from the eigenpair");
  const double a = 0.5 * (2.0 * res.s - res.n);
  return sample_field(grid, [&](double r, double t) {
    return std::pow(std::hypot(r, t), a) * res.psi_at(std::atan2(t, r));
  });
}

double cutoff(double l) {
  if (l <= 0.5) return 0.0;
  if (l >= 1.0) return 1.0;
  const double x = 2.0 * l - 1.0;
  const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
  return a / (a + b);
}

double cutoff_eps(double l, double eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("cutoff_eps: need 0 < eps < 1");
  return l <= 1.0 ? cutoff(l / eps) : cutoff(1.0 / (eps * l));
}

namespace {

double cutoff_slope(double l) {
  if (l <= 0.5 || l >= 1.0) return 0.0;
  const double x = 2.0 * l - 1.0;
  const double a = std::exp(-1.0 / x), b = std::exp(-1.0 / (1.0 - x));
  const double da = a / (x * x), db = -b / ((1.0 - x) * (1.0 - x));
  return 2.0 * (da * b - a * db) / ((a + b) * (a + b));
}

}  // namespace

WEpsResult w_eps_family(const EigenResult& res, double eps, const StripPtr& grid) {
  if (!(eps > 0.0 && eps < 1.0)) throw DomainError("w_eps_family: need 0 < eps < 1");
  if (!grid) throw DomainError("w_eps_family: null grid");
  const RadialGrid& rg = grid->radial();
  if (rg.r_max() < 2.0 / eps || grid->t_max() < 2.0 / eps || rg.nodes().front() > 0.125 * eps)
    throw DomainError("w_eps_family: cutoff not resolved by the grid");
  const double a = 0.5 * (2.0 * res.s - res.n);
  const double kap = kappa_s(res.s);

  WEpsResult out;
  out.field = sample_field(grid, [&](double r, double t) {
    const double rho = std::hypot(r, t);
    const double eta = cutoff_eps(rho, eps);
    return eta == 0.0 ? 0.0 : std::pow(rho, a) * eta * res.psi_at(std::atan2(t, r));
  });
  out.energy = extension_energy(out.field);

  // In u = log ρ: ∫ η_ε² dρ/ρ and ∫ ρ η_ε'² dρ. The cutoff is supported on
  // [ε/2, 2/ε] and varies only on the two octaves at its ends.
  const double psi_b = res.psi1.back();
  auto panels = [&](auto&& f) {
    const double lo = std::log(0.5 * eps), hi = std::log(2.0 / eps);
    const double e1 = std::log(eps), e2 = -std::log(eps);
    double acc = 0.0;
    for (auto [u0, u1] : {std::pair{lo, e1}, std::pair{e1, e2}, std::pair{e2, hi}}) {
      const int P = 32;
      for (int k = 0; k < P; ++k)
        acc += quad::integrate_gl(f, u0 + (u1 - u0) * k / P, u0 + (u1 - u0) * (k + 1) / P, 16);
    }
    return acc;
  };
  const double L = panels([&](double u) { const double e = cutoff_eps(std::exp(u), eps); return e * e; });
  const double D = panels([&](double u) {
    const double rho = std::exp(u);
    // dη_ε/dρ times ρ, for both branches of the definition.
    const double g = rho <= 1.0 ? (rho / eps) * cutoff_slope(rho / eps)
                                : -(1.0 / (eps * rho)) * cutoff_slope(1.0 / (eps * rho));
    return g * g;
  });
  const double area = sphere_area(res.n);
  out.hardy = area * psi_b * psi_b * L;

  // Polar form: |∇W|² t^{1-2s} dX splits into (aη + ρη')² ρ^{-1} dρ against the
  // mass form plus η² ρ^{-1} dρ against the angular stiffness; the cross term
  // 2aηη' integrates to zero since η_ε vanishes at both ends.
  const AngularForms F = assemble_angular(res.n, res.s, res.mesh, 0);
  double M = 0.0, S = 0.0;
  for (std::size_t e = 0; e < F.cells.size(); ++e) {
    const auto& c = F.cells[e];
    const double u = res.psi1[e], v = res.psi1[e + 1];
    S += c.k * (u - v) * (u - v);
    M += c.m_hi * u * u + 2.0 * c.m_mid * u * v + c.m_lo * v * v;
  }
  const double a2 = a * a;
  out.energy_polar = area * ((a2 * L + D) * M + L * S);

  const double lk = res.lambda * kap;
  out.quotient = (out.energy - lk * out.hardy) / (kap * out.hardy);
  out.quotient_polar = (out.energy_polar - lk * out.hardy) / (kap * out.hardy);
  return out;
}

}  // namespace fraclab
