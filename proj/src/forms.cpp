#include "fraclab/forms.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <array>
#include <cmath>
#include <list>
#include <mutex>
#include <sstream>

#include "fraclab/kernel.hpp"
#include "fraclab/quadrature.hpp"

namespace fraclab {

namespace {

// Gauss-Legendre order for a pair of separated elements, by gap / size.
int far_order(double gap, double size) {
  const double ratio = gap / size;
  if (ratio < 1.5) return 10;
  if (ratio < 4.0) return 6;
  if (ratio < 12.0) return 4;
  return 3;
}

struct Assembler {
  const RadialKernel& K;
  std::vector<double> x;  // nodes plus the ghost radius
  std::size_t M;          // number of unknowns
  double s;
  Eigen::MatrixXd A;

  Assembler(const RadialKernel& k, std::span<const double> nodes)
      : K(k), x(nodes.begin(), nodes.end()), M(nodes.size()), s(k.order()) {
    x.push_back(x[M - 1] * x[M - 1] / x[M - 2]);
    A = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
  }

  double h(std::size_t e) const { return x[e + 1] - x[e]; }

  // Adds W v vᵀ restricted to real unknowns.
  template <std::size_t N>
  void add(const std::array<std::size_t, N>& dof, const std::array<double, N>& v, double W) {
    for (std::size_t a = 0; a < N; ++a) {
      if (dof[a] >= M) continue;
      const double wa = W * v[a];
      for (std::size_t b = 0; b < N; ++b)
        if (dof[b] < M) A(static_cast<Eigen::Index>(dof[a]), static_cast<Eigen::Index>(dof[b])) += wa * v[b];
    }
  }

  // ∬_{E_e × E_e}: (u(r)-u(ρ))² = slope² (r-ρ)².
  void same(std::size_t e) {
    const double he = h(e), a = x[e];
    const auto& gx = quad::gauss_legendre(8);
    const double I = quad::integrate_jacobi(
        [&](double d) {
          double inner = 0.0;
          for (std::size_t q = 0; q < gx.size(); ++q) {
            const double X = (1.0 - d) * 0.5 * (1.0 + gx.nodes[q]);
            inner += 0.5 * gx.weights[q] * K.G_reg(a + he * X, a + he * (X + d));
          }
          return inner;
        },
        0.0, 1.0, 1.0 - 2.0 * s, 1.0, 10);
    const double total = 2.0 * std::pow(he, 3.0 - 2.0 * s) * I;
    add<2>({e, e + 1}, {-1.0 / he, 1.0 / he}, total);
  }

  // E_e and E_{e+1} share x_{e+1}; Duffy split of the unit square at that corner.
  void adjacent(std::size_t e) {
    const double h1 = h(e), h2 = h(e + 1), c = x[e + 1];
    const std::array<std::size_t, 3> dof{e, e + 1, e + 2};
    const auto& gxi = quad::gauss_jacobi(10, 0.0, 2.0 - 2.0 * s);
    const auto& geta = quad::gauss_legendre(10);
    const double jac = std::pow(0.5, 3.0 - 2.0 * s) * 0.5;  // [-1,1]² → [0,1]², incl. ξ^{2-2s}
    for (std::size_t i = 0; i < gxi.size(); ++i) {
      const double xi = 0.5 * (1.0 + gxi.nodes[i]);
      for (std::size_t j = 0; j < geta.size(); ++j) {
        const double eta = 0.5 * (1.0 + geta.nodes[j]);
        const double w = 2.0 * h1 * h2 * jac * gxi.weights[i] * geta.weights[j];
        {  // Y <= X
          const double X = xi, Y = xi * eta, L = h1 + h2 * eta;
          const double W = w * K.G_reg(c - h1 * X, c + h2 * Y) * std::pow(L, -1.0 - 2.0 * s);
          add<3>(dof, {1.0, eta - 1.0, -eta}, W);
        }
        {  // X <= Y
          const double Y = xi, X = xi * eta, L = h1 * eta + h2;
          const double W = w * K.G_reg(c - h1 * X, c + h2 * Y) * std::pow(L, -1.0 - 2.0 * s);
          add<3>(dof, {eta, 1.0 - eta, -1.0}, W);
        }
      }
    }
  }

  void separated(std::size_t e, std::size_t f) {
    const double he = h(e), hf = h(f);
    const int q = far_order(x[f] - x[e + 1], std::max(he, hf));
    const auto& g = quad::gauss_legendre(q);
    for (std::size_t i = 0; i < g.size(); ++i) {
      const double pr = 0.5 * (1.0 + g.nodes[i]), r = x[e] + he * pr;
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double pq = 0.5 * (1.0 + g.nodes[j]), rho = x[f] + hf * pq;
        const double W = 2.0 * 0.25 * he * hf * g.weights[i] * g.weights[j] * K.G(r, rho);
        add<4>({e, e + 1, f, f + 1}, {1.0 - pr, pr, pq - 1.0, -pq}, W);
      }
    }
  }

  // [0, x_0] carries the constant u_0. Coupling to ρ in [x_0, x_G]:
  // 2 ∫ (u_0 - u(ρ))² ρ^{n-2s-1} P(log(ρ/x_0)) dρ.
  void inner_cell() {
    const int n = K.dim();
    const double x0 = x[0];
    auto weight = [&](double rho) {
      return std::pow(rho, n - 2.0 * s - 1.0) * K.inner_tail(std::log(rho / x0));
    };
    {  // first element: (u_0 - u(ρ))² = (u_0 - u_1)² Y²
      const double he = h(0);
      const double I = quad::integrate_jacobi(
          [&](double Y) {
            const double rho = x0 + he * Y, sigma = std::log1p(he * Y / x0);
            return std::pow(rho, n - 2.0 * s - 1.0) * K.inner_tail(sigma) *
                   std::pow(sigma, 2.0 * s) * std::pow(Y / sigma, 2.0 * s);
          },
          0.0, 1.0, 2.0 - 2.0 * s, 0.0, 12);
      add<2>({0, 1}, {1.0, -1.0}, 2.0 * he * I);
    }
    for (std::size_t e = 1; e < M; ++e) {
      const double he = h(e);
      const int q = e == 1 ? 12 : far_order(x[e] - x0, he);
      const auto& g = quad::gauss_legendre(q);
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double p = 0.5 * (1.0 + g.nodes[j]);
        const double W = 2.0 * 0.5 * he * g.weights[j] * weight(x[e] + he * p);
        add<3>({0, e, e + 1}, {1.0, p - 1.0, -p}, W);
      }
    }
  }

  // Everything beyond x_G is zero: 2 ∫_0^{x_G} u(r)² r^{n-2s-1} T(log(x_G/r)) dr.
  void exterior() {
    const int n = K.dim();
    const double xg = x[M], beta = n - 2.0 * s;
    auto weight = [&](double r) { return std::pow(r, beta - 1.0) * K.outer_tail(std::log(xg / r)); };
    {  // [0, x_0] with r = x_0 v^{1/β}
      const double L = std::log(xg / x[0]);
      const double I = quad::integrate_gl(
          [&](double v) { return K.outer_tail(L - std::log(v) / beta); }, 0.0, 1.0, 24);
      add<1>({0}, {1.0}, 2.0 * std::pow(x[0], beta) / beta * I);
    }
    for (std::size_t e = 0; e + 1 < M; ++e) {
      const double he = h(e);
      const int q = e + 2 == M ? 12 : far_order(xg - x[e + 1], he);
      const auto& g = quad::gauss_legendre(q);
      for (std::size_t j = 0; j < g.size(); ++j) {
        const double p = 0.5 * (1.0 + g.nodes[j]);
        const double W = 2.0 * 0.5 * he * g.weights[j] * weight(x[e] + he * p);
        add<2>({e, e + 1}, {1.0 - p, p}, W);
      }
    }
    {  // ramp cell: u = u_{M-1} Y with Y = (x_G - r)/h
      const double he = h(M - 1);
      const double I = quad::integrate_jacobi(
          [&](double Y) {
            const double r = xg - he * Y, sigma = -std::log1p(-he * Y / xg);
            return std::pow(r, beta - 1.0) * K.outer_tail(sigma) * std::pow(sigma, 2.0 * s) *
                   std::pow(Y / sigma, 2.0 * s);
          },
          0.0, 1.0, 2.0 - 2.0 * s, 0.0, 12);
      add<1>({M - 1}, {1.0}, 2.0 * he * I);
    }
  }

  void run() {
    const std::size_t E = M;  // elements [x_e, x_{e+1}], the last one is the ramp
    for (std::size_t e = 0; e < E; ++e) {
      same(e);
      if (e + 1 < E) adjacent(e);
      for (std::size_t f = e + 2; f < E; ++f) separated(e, f);
    }
    inner_cell();
    exterior();
  }
};

// ∫_{x_e}^{x_{e+1}} φ(r) r^p dr for both hats of the element.
std::pair<double, double> hat_moments(double a, double b, double p) {
  double left = 0.0, right = 0.0;
  const auto& g = quad::gauss_legendre(8);
  const double h = b - a;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = 0.5 * (1.0 + g.nodes[k]);
    const double w = 0.5 * h * g.weights[k] * std::pow(a + h * t, p);
    left += w * (1.0 - t);
    right += w * t;
  }
  return {left, right};
}

Eigen::VectorXd lumped(std::span<const double> nodes, double ghost, double p, double area) {
  const std::size_t M = nodes.size();
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(M));
  out[0] = std::pow(nodes[0], p + 1.0) / (p + 1.0);
  for (std::size_t e = 0; e < M; ++e) {
    const double b = e + 1 < M ? nodes[e + 1] : ghost;
    const auto [l, r] = hat_moments(nodes[e], b, p);
    out[static_cast<Eigen::Index>(e)] += l;
    if (e + 1 < M) out[static_cast<Eigen::Index>(e + 1)] += r;
  }
  return area * out;
}

Eigen::Map<const Eigen::VectorXd> as_vec(std::span<const double> u) {
  return {u.data(), static_cast<Eigen::Index>(u.size())};
}

FormsPtr build(const GridPtr& grid) {
  const int n = grid->dim();
  const double s = grid->order();
  const auto K = RadialKernel::get(n, s);
  Assembler as(*K, grid->nodes());
  as.run();

  auto out = std::make_shared<QuadraticFormAssembly>();
  out->grid = grid;
  out->ghost_radius = as.x.back();
  const double C = gagliardo_constant(n, s);
  out->gagliardo = C * as.A;
  // Symmetrise away rounding from the one-sided accumulation.
  out->gagliardo = 0.5 * (out->gagliardo + out->gagliardo.transpose()).eval();
  out->hardy = lumped(grid->nodes(), out->ghost_radius, n - 1.0 - 2.0 * s, sphere_area(n));
  out->mass = lumped(grid->nodes(), out->ghost_radius, n - 1.0, sphere_area(n));

  const Eigen::VectorXd dm = out->hardy.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd S = dm.asDiagonal() * out->gagliardo * dm.asDiagonal();
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S, Eigen::EigenvaluesOnly);
    const double lo = es.eigenvalues()[0], norm = es.eigenvalues().cwiseAbs().maxCoeff();
    if (lo < -out->assembly_tolerance * norm) {
      std::ostringstream os;
      os << "assemble_forms: eigenvalue " << lo << " below the PSD floor (norm " << norm << ")";
      throw AssemblyError(os.str(), lo);
    }
  }
  return out;
}

}  // namespace

double QuadraticFormAssembly::energy(std::span<const double> u) const {
  const auto v = as_vec(u);
  return v.dot(gagliardo * v);
}

double QuadraticFormAssembly::hardy_integral(std::span<const double> u) const {
  const auto v = as_vec(u);
  return (hardy.array() * v.array().square()).sum();
}

double QuadraticFormAssembly::lp_integral(std::span<const double> u, double q) const {
  const auto v = as_vec(u);
  return (mass.array() * v.array().abs().pow(q)).sum();
}

double QuadraticFormAssembly::form(std::span<const double> u, double lambda) const {
  return energy(u) - lambda * hardy_integral(u);
}

FormsPtr assemble_forms(const GridPtr& grid) {
  if (!grid) throw DomainError("assemble_forms: null grid");
  static std::mutex mu;
  static std::list<std::pair<std::uint64_t, FormsPtr>> cache;  // most recent first
  const auto key = grid->hash();
  {
    std::lock_guard<std::mutex> lock(mu);
    for (auto it = cache.begin(); it != cache.end(); ++it)
      if (it->first == key) {
        cache.splice(cache.begin(), cache, it);
        return it->second;
      }
  }
  auto forms = build(grid);
  std::lock_guard<std::mutex> lock(mu);
  cache.emplace_front(key, forms);
  if (cache.size() > 6) cache.pop_back();
  return forms;
}

FormsPtr assemble_forms(const GridPtr& grid, const FracParams& params) {
  if (params.n() != grid->dim() || params.s() != grid->order())
    throw DomainError("assemble_forms: params do not match the grid's (n, s)");
  return assemble_forms(grid);
}

double hardy_quotient(std::span<const double> u, const QuadraticFormAssembly& forms) {
  if (u.size() != forms.size()) throw DomainError("hardy_quotient: size mismatch");
  const double den = forms.hardy_integral(u);
  if (!(den > 0.0)) throw DomainError("hardy_quotient: u vanishes on the grid");
  return forms.energy(u) / den;
}

double hardy_quotient(const RadialFunction& u) {
  return hardy_quotient(u.values(), *assemble_forms(u.grid_ptr()));
}

HardyMinimum min_hardy_quotient(const QuadraticFormAssembly& forms) {
  const Eigen::VectorXd dm = forms.hardy.cwiseSqrt().cwiseInverse();
  const Eigen::MatrixXd S = dm.asDiagonal() * forms.gagliardo * dm.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(S);
  HardyMinimum out;
  out.value = es.eigenvalues()[0];
  out.vector = dm.asDiagonal() * es.eigenvectors().col(0);
  if (out.vector.sum() < 0.0) out.vector = -out.vector;
  out.vector /= out.vector.cwiseAbs().maxCoeff();
  return out;
}

}  // namespace fraclab
