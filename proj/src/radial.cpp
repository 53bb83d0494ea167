#include "fraclab/radial.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <sstream>

#include "fraclab/constants.hpp"

namespace fraclab {

RadialGrid::RadialGrid(int n, double s, std::vector<double> nodes)
    : n_(n), s_(s), nodes_(std::move(nodes)) {
  check_order(n, s);
  if (nodes_.size() < 4) throw DomainError("RadialGrid needs at least 4 nodes");
  if (!(nodes_.front() > 0.0)) throw DomainError("RadialGrid: r_1 must be positive");
  const double max_gap = std::pow(2.0, 1.0 / 3.0) * (1.0 + 1e-12);
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    if (!(nodes_[i] > nodes_[i - 1]) || !std::isfinite(nodes_[i]))
      throw DomainError("RadialGrid: nodes must be finite and strictly increasing");
    if (nodes_[i] > max_gap * nodes_[i - 1]) {
      std::ostringstream os;
      os << "RadialGrid: gap [" << nodes_[i - 1] << ", " << nodes_[i]
         << "] is coarser than 3 nodes per octave";
      throw DomainError(os.str());
    }
  }
}

GridPtr RadialGrid::geometric(int n, double s, double r_min, double r_max,
                              double nodes_per_octave) {
  if (!(r_min > 0.0 && r_max > r_min)) throw DomainError("geometric grid needs 0 < r_min < r_max");
  if (!(nodes_per_octave >= 3.0)) throw DomainError("geometric grid needs >= 3 nodes per octave");
  const double q = std::pow(2.0, 1.0 / nodes_per_octave);
  const auto count =
      static_cast<std::size_t>(std::ceil(std::log(r_max / r_min) / std::log(q) - 1e-9)) + 1;
  std::vector<double> nodes(count);
  for (std::size_t i = 0; i < count; ++i) nodes[i] = r_min * std::pow(q, static_cast<double>(i));
  return std::make_shared<const RadialGrid>(n, s, std::move(nodes));
}

double RadialGrid::nodes_per_octave() const {
  double worst = 0.0;
  for (std::size_t i = 1; i < nodes_.size(); ++i)
    worst = std::max(worst, std::log2(nodes_[i] / nodes_[i - 1]));
  return 1.0 / worst;
}

bool RadialGrid::is_geometric() const {
  const double q = nodes_[1] / nodes_[0];
  for (std::size_t i = 2; i < nodes_.size(); ++i)
    if (std::fabs(nodes_[i] / nodes_[i - 1] - q) > 1e-12 * q) return false;
  return true;
}

std::size_t RadialGrid::locate(double r) const {
  auto it = std::upper_bound(nodes_.begin(), nodes_.end(), r);
  std::size_t i = (it == nodes_.begin()) ? 0 : static_cast<std::size_t>(it - nodes_.begin()) - 1;
  return std::min(i, nodes_.size() - 2);
}

std::uint64_t RadialGrid::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&](const void* p, std::size_t len) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < len; ++i) {
      h ^= b[i];
      h *= 1099511628211ull;
    }
  };
  mix(&n_, sizeof n_);
  mix(&s_, sizeof s_);
  mix(nodes_.data(), nodes_.size() * sizeof(double));
  return h;
}

RadialFunction::RadialFunction(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw DomainError("RadialFunction: null grid");
  if (values_.size() != grid_->size())
    throw DomainError("RadialFunction: value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw DomainError("RadialFunction: non-finite value");
  build();
}

RadialFunction RadialFunction::sample(GridPtr grid, const std::function<double(double)>& f) {
  std::vector<double> v(grid->size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f((*grid)[i]);
  return RadialFunction(std::move(grid), std::move(v));
}

void RadialFunction::build() {
  const auto& r = grid_->nodes();
  const std::size_t m = r.size();
  tau_.resize(m);
  for (std::size_t i = 0; i < m; ++i) tau_[i] = std::log(r[i]);

  const double u0 = values_[0], u1 = values_[1];
  if (u0 != 0.0 && u1 != 0.0 && (u0 > 0) == (u1 > 0)) {
    const double e = std::log(u1 / u0) / (tau_[1] - tau_[0]);
    head_ = {u0 / std::pow(r[0], e), e};
  } else {
    head_ = {u0, 0.0};
  }

  tail_ = {};
  const double um = values_[m - 1];
  if (um != 0.0) {
    const double lo = r[m - 1] / 10.0;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int cnt = 0;
    bool ok = true;
    for (std::size_t i = m; i-- > 0;) {
      if (r[i] < lo && cnt >= 2) break;
      const double v = values_[i];
      if (v == 0.0 || (v > 0) != (um > 0)) {
        ok = false;
        break;
      }
      const double x = tau_[i], y = std::log(std::fabs(v));
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++cnt;
    }
    if (ok && cnt >= 2) {
      const double e = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
      // Exponents this steep mean faster-than-algebraic decay; a power law
      // there only overflows downstream quadrature weights.
      if (std::isfinite(e) && e > -40.0) tail_ = {um / std::pow(r[m - 1], e), e};
    }
  }

  // Spline in tau, clamped to the head/tail slopes where those exist.
  std::vector<double> h(m - 1);
  for (std::size_t i = 0; i + 1 < m; ++i) h[i] = tau_[i + 1] - tau_[i];
  std::vector<double> a(m, 0.0), b(m, 0.0), c(m, 0.0), d(m, 0.0);
  const double left_slope = head_.exponent * values_[0];
  b[0] = 2.0 * h[0];
  c[0] = h[0];
  d[0] = 6.0 * ((values_[1] - values_[0]) / h[0] - left_slope);
  for (std::size_t i = 1; i + 1 < m; ++i) {
    a[i] = h[i - 1];
    b[i] = 2.0 * (h[i - 1] + h[i]);
    c[i] = h[i];
    d[i] = 6.0 * ((values_[i + 1] - values_[i]) / h[i] - (values_[i] - values_[i - 1]) / h[i - 1]);
  }
  if (tail_.coef != 0.0) {
    const double right_slope = tail_.exponent * um;
    a[m - 1] = h[m - 2];
    b[m - 1] = 2.0 * h[m - 2];
    d[m - 1] = 6.0 * (right_slope - (values_[m - 1] - values_[m - 2]) / h[m - 2]);
  } else {
    b[m - 1] = 1.0;
  }
  for (std::size_t i = 1; i < m; ++i) {
    const double w = a[i] / b[i - 1];
    b[i] -= w * c[i - 1];
    d[i] -= w * d[i - 1];
  }
  second_.assign(m, 0.0);
  second_[m - 1] = d[m - 1] / b[m - 1];
  for (std::size_t i = m - 1; i-- > 0;) second_[i] = (d[i] - c[i] * second_[i + 1]) / b[i];
}

double RadialFunction::spline(double r, double* deriv) const {
  const std::size_t i = grid_->locate(r);
  const double t = std::log(r);
  const double h = tau_[i + 1] - tau_[i];
  const double A = (tau_[i + 1] - t) / h, B = 1.0 - A;
  const double y0 = values_[i], y1 = values_[i + 1];
  const double m0 = second_[i], m1 = second_[i + 1];
  if (deriv) {
    const double dy = (y1 - y0) / h - (3.0 * A * A - 1.0) / 6.0 * h * m0 +
                      (3.0 * B * B - 1.0) / 6.0 * h * m1;
    *deriv = dy / r;
  }
  return A * y0 + B * y1 + ((A * A * A - A) * m0 + (B * B * B - B) * m1) * h * h / 6.0;
}

double RadialFunction::operator()(double r) const {
  if (r < grid_->r_min()) return head_(r);
  if (r > grid_->r_max()) return tail_(r);
  return spline(r, nullptr);
}

double RadialFunction::body(double r) const {
  if (r < grid_->r_min()) return head_(r);
  if (r > grid_->r_max()) return 0.0;
  return spline(r, nullptr);
}

double RadialFunction::derivative(double r) const {
  if (r < grid_->r_min()) return head_.exponent * head_(r) / r;
  if (r > grid_->r_max()) return tail_.exponent * tail_(r) / r;
  double d = 0.0;
  spline(r, &d);
  return d;
}

RadialFunction RadialFunction::with_tail(PowerLaw tail) const {
  RadialFunction out = *this;
  out.tail_ = tail;
  return out;
}

double RadialFunction::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::fabs(v));
  return m;
}

bool RadialFunction::decays(double rel) const {
  return std::fabs(values_.back()) <= rel * max_abs();
}

double RadialFunction::spacing(double r) const {
  const std::size_t i = grid_->locate(std::clamp(r, grid_->r_min(), grid_->r_max()));
  return (*grid_)[i + 1] - (*grid_)[i];
}

}  // namespace fraclab
