#include "fraclab/groundstate.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <functional>
#include <sstream>

#include "fraclab/fraclap.hpp"
#include "fraclab/sphere_eig.hpp"

namespace fraclab {

namespace {

using Vec = Eigen::VectorXd;

Eigen::Map<const Vec> view(std::span<const double> u) {
  return {u.data(), static_cast<Eigen::Index>(u.size())};
}

double critical_q(int n, double s) { return 2.0 * n / (n - 2.0 * s); }

struct Quotient {
  const QuadraticFormAssembly& F;
  double lambda, q;

  double norm_q(const Vec& u) const { return std::pow((F.mass.array() * u.array().abs().pow(q)).sum(), 1.0 / q); }
  double form(const Vec& u) const {
    return u.dot(F.gagliardo * u) - lambda * (F.hardy.array() * u.array().square()).sum();
  }
  double operator()(const Vec& u) const {
    const double N = norm_q(u);
    return form(u) / (N * N);
  }
  // Gradient at a unit-norm u with quotient R.
  Vec gradient(const Vec& u, double R) const {
    return 2.0 * (F.gagliardo * u - lambda * F.hardy.cwiseProduct(u)) -
           2.0 * R * F.mass.cwiseProduct(u.array().abs().pow(q - 1.0).matrix());
  }
};

// Radius below which half the L^q mass lies, interpolated in log r.
double mass_median(const Vec& u, const QuadraticFormAssembly& F, double q, std::span<const double> r) {
  const Vec w = F.mass.cwiseProduct(u.array().abs().pow(q).matrix());
  const double half = 0.5 * w.sum();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (acc + w[i] >= half) {
      if (i == 0) return r[0];
      const double f = (half - acc) / w[i];
      return std::exp(std::log(r[i - 1]) + f * (std::log(r[i]) - std::log(r[i - 1])));
    }
    acc += w[i];
  }
  return r.back();
}

}  // namespace

double rayleigh(std::span<const double> u, double lambda, const QuadraticFormAssembly& forms) {
  if (u.size() != forms.size()) throw DomainError("rayleigh: size mismatch");
  const Vec v = view(u);
  if (v.cwiseAbs().maxCoeff() == 0.0) throw DomainError("rayleigh: u is zero");
  const auto& g = *forms.grid;
  return Quotient{forms, lambda, critical_q(g.dim(), g.order())}(v);
}

double rayleigh(const RadialFunction& u, double lambda, const QuadraticFormAssembly& forms) {
  if (u.grid().hash() != forms.grid->hash()) throw DomainError("rayleigh: profile and forms on different grids");
  return rayleigh(u.values(), lambda, forms);
}

RadialFunction rescale(const RadialFunction& u, double R) {
  if (!(R > 0.0)) throw DomainError("rescale: need R > 0");
  const auto& g = u.grid();
  const double a = std::pow(R, -0.5 * (g.dim() - 2.0 * g.order()));
  return RadialFunction::sample(u.grid_ptr(), [&](double r) { return a * u(r / R); });
}

RadialFunction rearrange(const RadialFunction& u) {
  std::vector<double> v(u.values().begin(), u.values().end());
  std::sort(v.begin(), v.end(), std::greater<>());
  return RadialFunction(u.grid_ptr(), std::move(v));
}

GroundStateResult minimize_groundstate(double lambda, const GridPtr& grid, const GroundStateOptions& opts) {
  if (!grid) throw DomainError("minimize_groundstate: null grid");
  const int n = grid->dim();
  const double s = grid->order();
  const double Lam = hardy_constant(n, s);
  if (!(lambda >= 0.0 && lambda < Lam)) throw DomainError("minimize_groundstate: need 0 <= lambda < Lambda");
  if (!(opts.step > 0.0) || !(opts.min_step > 0.0) || opts.max_iter < 1)
    throw DomainError("minimize_groundstate: bad options");

  const FormsPtr F = assemble_forms(grid);
  const double q = critical_q(n, s);
  const Quotient Q{*F, lambda, q};
  const auto r = grid->nodes();
  const double center = std::sqrt(r.front() * r.back());

  Eigen::LLT<Eigen::MatrixXd> pre(F->gagliardo);
  if (pre.info() != Eigen::Success) throw AssemblyError("minimize_groundstate: Gagliardo matrix not definite", 0.0);

  // Start away from the answer: an exponential centred on the grid.
  Vec u(static_cast<Eigen::Index>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) u[static_cast<Eigen::Index>(i)] = std::exp(-r[i] / center);
  u /= Q.norm_q(u);
  double R = Q(u);

  std::vector<double> history{R};
  std::vector<std::string> log;
  double tau = opts.step;
  int it = 0;
  bool converged = false;
  auto note = [&](const char* what, double before, double after) {
    std::ostringstream os;
    os.precision(17);
    os << "iteration " << it << ": " << what << " skipped, quotient " << before << " -> " << after;
    log.push_back(os.str());
  };

  while (it < opts.max_iter) {
    ++it;
    if (opts.rearrange_every > 0 && it % opts.rearrange_every == 0) {
      std::vector<double> v(u.data(), u.data() + u.size());
      std::sort(v.begin(), v.end(), std::greater<>());
      const Vec w = view(v);
      const double Rw = Q(w);
      if (Rw <= R) {
        u = w;
        R = Rw;
      } else {
        note("rearrangement", R, Rw);
      }
      if (opts.scale_fix) {
        const double Rs = center / mass_median(u, *F, q, r);
        if (std::fabs(std::log(Rs)) > 1e-3) {
          const RadialFunction cur(grid, std::vector<double>(u.data(), u.data() + u.size()));
          const RadialFunction moved = rescale(cur, Rs);
          Vec w2 = view(moved.values()).cwiseMax(0.0);
          w2 /= Q.norm_q(w2);
          const double R2 = Q(w2);
          if (R2 <= R) {
            u = w2;
            R = R2;
          } else {
            note("rescaling", R, R2);
          }
        }
      }
    }

    // Dilations leave the continuum quotient unchanged but the grid tilts it
    // slightly, so unprojected descent drifts toward r_1 without end. The
    // direction is taken A-orthogonal to the dilation generator
    // z = -((n-2s)/2) u - r u'.
    Vec d = pre.solve(Q.gradient(u, R)) * 0.5;
    {
      const RadialFunction cur(grid, std::vector<double>(u.data(), u.data() + u.size()));
      Vec z(u.size());
      for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double x = r[static_cast<std::size_t>(i)];
        z[i] = -0.5 * (n - 2.0 * s) * u[i] - x * cur.derivative(x);
      }
      const Vec Az = F->gagliardo * z;
      const double zz = z.dot(Az);
      if (zz > 0.0) d -= (d.dot(Az) / zz) * z;
    }
    bool accepted = false;
    while (tau >= opts.min_step) {
      Vec trial = (u - tau * d).cwiseMax(0.0);
      const double N = Q.norm_q(trial);
      if (N > 0.0) {
        trial /= N;
        const double Rt = Q(trial);
        if (Rt <= R) {
          const double change = (R - Rt) / R;
          u = trial;
          R = Rt;
          history.push_back(R);
          accepted = true;
          tau = std::min(2.0 * tau, opts.step);
          converged = change <= opts.tol;
          break;
        }
      }
      tau *= 0.5;
    }
    if (!accepted) throw StallError("minimize_groundstate: no descent step above min_step", history);
    if (converged) break;
  }

  const double p = q - 1.0;
  const double c = std::pow(R, 1.0 / (p - 1.0));
  std::vector<double> vals(u.data(), u.data() + u.size());
  for (double& v : vals) v *= c;
  GroundStateResult out{RadialFunction(grid, std::move(vals))};
  out.lambda = lambda;
  out.beta = R;
  out.lagrange_scale = c;
  out.iterations = it;
  out.converged = converged;
  out.history = std::move(history);
  out.log = std::move(log);
  out.el_residual = verify_solution(out.profile, FracParams::critical(n, s, lambda)).relative_l2;
  out.monotone = monotonicity_check(out.profile).monotone;
  return out;
}

SolutionResidual verify_solution(const RadialFunction& u, const FracParams& P, const VerifyOptions& opts) {
  const auto& g = u.grid();
  if (g.dim() != P.n() || g.order() != P.s()) throw DomainError("verify_solution: grid and parameters disagree");
  if (!(opts.margin >= 1.0) || opts.stride == 0) throw DomainError("verify_solution: bad options");
  const double lam = P.lambda(), al = P.alpha(), p = P.p();
  const double lo = g.r_min() * opts.margin, hi = g.r_max() / opts.margin;
  std::vector<double> radii;
  for (std::size_t i = 1; i + 1 < g.size(); i += opts.stride)
    if (g[i] >= lo && g[i] <= hi) radii.push_back(g[i]);
  if (radii.empty()) throw DomainError("verify_solution: no radii inside the margin");

  SolutionResidual out;
  if (u.max_abs() == 0.0) {
    out.count = radii.size();
    return out;
  }
  FraclapOptions fo;
  fo.allow_truncation = true;
  const auto L = fraclap_radial(u, radii, fo);
  double num = 0.0, den = 0.0;
  for (std::size_t k = 0; k < radii.size(); ++k) {
    const double x = radii[k], v = u(x);
    const double a = L[k].with_tail(), b = lam * std::pow(x, -al) * v, c = std::pow(std::fabs(v), p - 1.0) * v;
    const double res = a - b - c;
    const double mag = std::fabs(a) + std::fabs(b) + std::fabs(c);
    out.max = std::max(out.max, std::fabs(res));
    if (mag > 0.0) out.relative_max = std::max(out.relative_max, std::fabs(res) / mag);
    // L²(R^n) weights on a log grid: r^n d(log r), with the spacing folded in
    const double w = std::pow(x, g.dim()) * u.spacing(x) / x;
    num += w * res * res;
    den += w * mag * mag;
  }
  out.relative_l2 = den > 0.0 ? std::sqrt(num / den) : 0.0;
  out.count = radii.size();
  return out;
}

MonotonicityReport monotonicity_check(const RadialFunction& u) {
  MonotonicityReport out;
  const auto v = u.values();
  const double slack = 1e-12 * u.max_abs();
  for (std::size_t i = 0; i + 1 < v.size(); ++i) {
    const bool bad = v[i] > slack ? v[i + 1] >= v[i] : v[i + 1] >= v[i] + slack;
    if (bad) {
      out.monotone = false;
      out.first_violation = i + 1;
      break;
    }
  }
  return out;
}

IndefinitenessProbe indefiniteness_probe(double lambda, const GridPtr& grid) {
  if (!grid) throw DomainError("indefiniteness_probe: null grid");
  const int n = grid->dim();
  const double s = grid->order();
  const FormsPtr F = assemble_forms(grid);
  const auto r = grid->nodes();
  const double a = -0.5 * (n - 2.0 * s);

  IndefinitenessProbe out;
  bool any = false;
  for (double eps = 0.5; eps / 2.0 >= r.front() && 2.0 / eps <= r.back(); eps *= 0.5) {
    std::vector<double> u(r.size());
    for (std::size_t i = 0; i < r.size(); ++i) u[i] = std::pow(r[i], a) * cutoff_eps(r[i], eps);
    const double H = F->hardy_integral(u);
    if (H == 0.0) continue;
    const double form = F->form(u, lambda);
    out.scan.emplace_back(eps, form / H + lambda);
    if (!any || form < out.min_form) {
      out.min_form = form;
      out.min_epsilon = eps;
      any = true;
    }
    if (form < 0.0) {
      out.found = true;
      out.epsilon = eps;
      out.form = form;
      out.witness = std::move(u);
      return out;
    }
  }
  if (!any) throw DomainError("indefiniteness_probe: grid too narrow for the cutoff family");
  out.epsilon = out.min_epsilon;
  out.form = out.min_form;
  return out;
}

}  // namespace fraclab
