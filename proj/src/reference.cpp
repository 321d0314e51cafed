#include "nonclassical/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <fmt/core.h>

namespace nonclassical {

namespace {

constexpr double kEuler = 0.57721566490153286060651209;
constexpr double kFourPi = 4.0 * std::numbers::pi;

double shell_volume(double lo, double hi) {
  return kFourPi / 3.0 * (hi * hi * hi - lo * lo * lo);
}

void require_positive_radius(double r, const char* what) {
  if (!(r > 0.0)) {
    throw std::domain_error(
        fmt::format("{}: radius must be > 0 (point source is singular), got {}",
                    what, r));
  }
}

}  // namespace

double exp_integral_e1(double x) {
  if (!(x > 0.0)) {
    throw std::domain_error(
        fmt::format("exp_integral_e1: argument must be > 0, got {}", x));
  }
  constexpr double eps = 1e-16;
  if (x <= 1.0) {
    // E1(x) = -γ - ln x - Σ_{k>=1} (-x)^k / (k k!)
    double sum = 0.0;
    double term = 1.0;  // (-x)^k / k!
    for (int k = 1; k < 100; ++k) {
      term *= -x / k;
      const double add = term / k;
      sum += add;
      if (std::abs(add) < eps * std::abs(sum)) break;
    }
    return -kEuler - std::log(x) - sum;
  }
  // Modified Lentz evaluation of the continued fraction
  // E1(x) = e^{-x} / (x + 1 - 1/(x + 3 - 4/(x + 5 - ...)))
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 1000; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = 1.0 / (a * d + b);
    c = b + a / c;
    const double del = c * d;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h * std::exp(-x);
}

double diffusion_point_source(const CrossSections& xs, double r) {
  require_positive_radius(r, "diffusion_point_source");
  const double st = xs.sigma_t();
  const double kappa = std::sqrt(3.0 * st * xs.sigma_a());
  return st * 3.0 * st * std::exp(-kappa * r) / (kFourPi * r);
}

double diffusion_shell_average(const CrossSections& xs, double r_lo,
                               double r_hi) {
  const double st = xs.sigma_t();
  const double kappa = std::sqrt(3.0 * st * xs.sigma_a());
  // ∫ 4π r^2 · 3 st^2 e^{-κr} / (4π r) dr = 3 st^2 ∫ r e^{-κr} dr
  auto antideriv = [kappa](double r) {
    return -(1.0 + kappa * r) * std::exp(-kappa * r) / (kappa * kappa);
  };
  return 3.0 * st * st * (antideriv(r_hi) - antideriv(r_lo)) /
         shell_volume(r_lo, r_hi);
}

double first_flight_shell_average(const PathLengthModel& model, double r_lo,
                                  double r_hi) {
  const double inner = r_lo > 0.0 ? model.cdf(r_lo) : 0.0;
  return (model.cdf(r_hi) - inner) / shell_volume(r_lo, r_hi);
}

double sp3_green_scalar(const CrossSections& xs, double r) {
  require_positive_radius(r, "sp3_green_scalar");
  static const Sp3Constants k = solve_sp3_constants();
  const double st = xs.sigma_t();
  return st / (kFourPi * r) *
         (k.amp_plus * std::exp(-st * k.lambda_plus * r) +
          k.amp_minus * std::exp(-st * k.lambda_minus * r));
}

RadialKernel::RadialKernel(const PathLengthModel& model) : model_(model) {}

double RadialKernel::operator()(double u) const {
  const double st = model_.sigma_t();
  if (model_.kind() == ModelKind::Classical) {
    return st * exp_integral_e1(st * u);
  }
  double sum = 0.0;
  for (const auto& t : model_.terms()) {
    sum += t.weight / t.rate * std::exp(-t.rate * st * u);
  }
  return st * sum;
}

double RadialKernel::integral(double u) const {
  if (u <= 0.0) return 0.0;
  const double x = model_.sigma_t() * u;
  if (model_.kind() == ModelKind::Classical) {
    // ∫_0^x E1 = x E1(x) + 1 - e^{-x}
    return x * exp_integral_e1(x) - std::expm1(-x);
  }
  double sum = 0.0;
  for (const auto& t : model_.terms()) {
    sum += t.weight / (t.rate * t.rate) * -std::expm1(-t.rate * x);
  }
  return sum;
}

double RadialKernel::first_moment(double u) const {
  if (u <= 0.0) return 0.0;
  const double st = model_.sigma_t();
  const double x = st * u;
  if (model_.kind() == ModelKind::Classical) {
    // ∫_0^x y E1(y) dy = x^2/2 E1(x) + (1 - (1 + x) e^{-x}) / 2
    const double e2 = -std::expm1(-x) - x * std::exp(-x);
    return (0.5 * x * x * exp_integral_e1(x) + 0.5 * e2) / st;
  }
  double sum = 0.0;
  for (const auto& t : model_.terms()) {
    const double y = t.rate * x;
    sum += t.weight / (t.rate * t.rate * t.rate) *
           (-std::expm1(-y) - y * std::exp(-y));
  }
  return sum / st;
}

RadialGrid RadialGrid::uniform(double r_max, std::size_t points) {
  if (points < 2 || !(r_max > 0.0)) {
    throw std::invalid_argument("RadialGrid needs r_max > 0 and >= 2 points");
  }
  RadialGrid g;
  g.r_max = r_max;
  const double h = r_max / static_cast<double>(points);
  g.nodes.resize(points);
  g.weights.assign(points, h);
  for (std::size_t j = 0; j < points; ++j) {
    g.nodes[j] = h * static_cast<double>(j + 1);
  }
  g.weights.back() = 0.5 * h;
  return g;
}

RadialOperator::RadialOperator(const RadialKernel& kernel,
                               const RadialGrid& grid)
    : atom_(kernel.atom()), m_(grid.nodes.size()) {
  nodes_.reserve(m_ + 1);
  nodes_.push_back(0.0);
  nodes_.insert(nodes_.end(), grid.nodes.begin(), grid.nodes.end());
  w_.assign(m_ * (m_ + 1), 0.0);

  std::vector<double> q0_minus(m_ + 1), q1_minus(m_ + 1);
  std::vector<double> q0_plus(m_ + 1), q1_plus(m_ + 1);
  for (std::size_t i = 1; i <= m_; ++i) {
    const double r = nodes_[i];
    for (std::size_t j = 0; j <= m_; ++j) {
      const double d = std::abs(r - nodes_[j]);
      q0_minus[j] = kernel.integral(d);
      q1_minus[j] = kernel.first_moment(d);
      q0_plus[j] = kernel.integral(r + nodes_[j]);
      q1_plus[j] = kernel.first_moment(r + nodes_[j]);
    }
    double* row = &w_[(i - 1) * (m_ + 1)];
    for (std::size_t j = 0; j < m_; ++j) {
      const double a = nodes_[j];
      const double b = nodes_[j + 1];
      // ∫_a^b P(|r - r'|) dr' and ∫_a^b r' P(|r - r'|) dr'
      double near0, near1;
      if (a >= r) {
        near0 = q0_minus[j + 1] - q0_minus[j];
        near1 = (q1_minus[j + 1] - q1_minus[j]) + r * near0;
      } else {
        near0 = q0_minus[j] - q0_minus[j + 1];
        near1 = r * near0 - (q1_minus[j] - q1_minus[j + 1]);
      }
      // ∫_a^b P(r + r') dr' and ∫_a^b r' P(r + r') dr'
      const double far0 = q0_plus[j + 1] - q0_plus[j];
      const double far1 = (q1_plus[j + 1] - q1_plus[j]) - r * far0;
      const double i0 = near0 - far0;
      const double i1 = near1 - far1;
      const double h = b - a;
      row[j] += (b * i0 - i1) / h;
      row[j + 1] += (i1 - a * i0) / h;
    }
  }
}

std::vector<double> RadialOperator::apply(std::span<const double> g) const {
  if (g.size() != m_) {
    throw std::invalid_argument("RadialOperator::apply: size mismatch");
  }
  std::vector<double> u(m_ + 1);
  for (std::size_t j = 1; j <= m_; ++j) u[j] = nodes_[j] * g[j - 1];
  u[0] = m_ >= 2 ? 2.0 * u[1] - u[2] : u[1];

  std::vector<double> out(m_);
  for (std::size_t i = 0; i < m_; ++i) {
    const double* row = &w_[i * (m_ + 1)];
    double sum = 0.0;
    for (std::size_t j = 0; j <= m_; ++j) sum += row[j] * u[j];
    out[i] = atom_ * g[i] + sum / (2.0 * nodes_[i + 1]);
  }
  return out;
}

std::vector<double> IntegralSolution::density() const {
  std::vector<double> f(scattered.size());
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = density(j);
  return f;
}

namespace {

// K[f1](r) for the continuous first-flight density f1 = p(r)/(4π r^2),
// integrated adaptively; the classical kernel has a log singularity at r' = r.
std::vector<double> first_flight_convolution(const RadialKernel& kernel,
                                             const RadialGrid& grid) {
  const PathLengthModel& model = kernel.model();
  const double st = model.sigma_t();
  const double tail = 60.0 / st;
  boost::math::quadrature::tanh_sinh<double> integrator;

  std::vector<double> out(grid.nodes.size());
  for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
    const double r = grid.nodes[i];
    // r' f1(r') = p(r') / (4π r'); `dist` = |r - r'| computed without
    // cancellation from the quadrature's endpoint complement.
    auto integrand = [&](double rp, double dist) {
      if (!(rp > 0.0) || !(dist > 0.0)) return 0.0;
      return model.density(rp) / (kFourPi * rp) *
             (kernel(dist) - kernel(r + rp));
    };
    const double inner = integrator.integrate(
        [&](double rp, double rc) {
          const double dist = rp > 0.5 * r ? rc : r - rp;
          return integrand(rp, dist);
        },
        0.0, r, 1e-12);
    const double outer = integrator.integrate(
        [&](double rp, double rc) {
          const double dist = rp < r + 0.5 * tail ? -rc : rp - r;
          return integrand(rp, dist);
        },
        r, r + tail, 1e-12);
    out[i] = kernel.atom() * model.density(r) / (kFourPi * r * r) +
             (inner + outer) / (2.0 * r);
  }
  return out;
}

double sup_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

IntegralSolution solve_integral_equation(const PathLengthModel& model,
                                         const RadialGrid& grid, double tol) {
  const double c = model.cross_sections().scattering_ratio();
  if (grid.nodes.size() < 256) {
    throw std::invalid_argument(fmt::format(
        "solve_integral_equation: need >= 256 grid points, got {}",
        grid.nodes.size()));
  }
  if (c <= 0.9 && grid.r_max * model.sigma_t() < 12.0) {
    throw std::invalid_argument(fmt::format(
        "solve_integral_equation: grid must extend to >= 12 mean free paths, "
        "got r_max = {}",
        grid.r_max));
  }
  if (!(tol > 0.0 && tol < 1.0)) {
    throw std::invalid_argument("solve_integral_equation: tol must be in (0,1)");
  }

  const RadialKernel kernel(model);
  const double atom = model.atom_at_zero();
  const std::size_t m = grid.nodes.size();

  IntegralSolution sol;
  sol.model = model.kind();
  sol.scattering_ratio = c;
  sol.grid = grid;
  sol.source_strength = 1.0 / (1.0 - atom * c);
  sol.origin_mass = atom * sol.source_strength;
  sol.first_flight.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double r = grid.nodes[j];
    sol.first_flight[j] = model.density(r) / (kFourPi * r * r);
  }
  sol.scattered.assign(m, 0.0);
  sol.scatter_source.assign(m, 0.0);
  if (c == 0.0) return sol;

  const std::vector<double> kf1 = first_flight_convolution(kernel, grid);
  for (std::size_t j = 0; j < m; ++j) {
    sol.scatter_source[j] = c * sol.source_strength * kf1[j];
  }

  const RadialOperator op(kernel, grid);
  const int max_iter =
      static_cast<int>(std::ceil(std::log(tol) / std::log(c))) + 50;
  std::vector<double>& f = sol.scattered;
  f = sol.scatter_source;
  for (int it = 1; it <= max_iter; ++it) {
    const std::vector<double> kf = op.apply(f);
    double change = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      const double next = sol.scatter_source[j] + c * kf[j];
      change = std::max(change, std::abs(next - f[j]));
      f[j] = next;
    }
    const double norm = sup_norm(f);
    sol.iterations = it;
    sol.last_change = norm > 0.0 ? change / norm : 0.0;
    if (sol.last_change < tol) return sol;
  }
  throw ConvergenceError(
      fmt::format("source iteration did not converge in {} sweeps "
                  "(relative change {:.3e}, tolerance {:.3e})",
                  max_iter, sol.last_change, tol),
      max_iter, sol.last_change);
}

double fixed_point_residual(const IntegralSolution& sol,
                            const PathLengthModel& model) {
  const double norm = sup_norm(sol.scattered);
  if (norm == 0.0) return 0.0;
  const RadialOperator op(RadialKernel(model), sol.grid);
  const std::vector<double> kf = op.apply(sol.scattered);
  double res = 0.0;
  for (std::size_t j = 0; j < kf.size(); ++j) {
    res = std::max(res, std::abs(sol.scattered[j] - sol.scatter_source[j] -
                                 sol.scattering_ratio * kf[j]));
  }
  return res / norm;
}

namespace {

// ∫_lo^hi 4π r u(r) dr for the piecewise-linear interpolant of
// u = r · scattered, with u(0) extrapolated as in RadialOperator.
double scattered_shell_integral(const IntegralSolution& sol, double lo,
                                double hi) {
  const auto& nodes = sol.grid.nodes;
  const std::size_t m = nodes.size();
  std::vector<double> r(m + 1), u(m + 1);
  r[0] = 0.0;
  for (std::size_t j = 1; j <= m; ++j) {
    r[j] = nodes[j - 1];
    u[j] = r[j] * sol.scattered[j - 1];
  }
  u[0] = 2.0 * u[1] - u[2];
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    const double a = std::max(lo, r[j]);
    const double b = std::min(hi, r[j + 1]);
    if (!(b > a)) continue;
    const double slope = (u[j + 1] - u[j]) / (r[j + 1] - r[j]);
    const double icpt = u[j] - slope * r[j];
    total += icpt * (b * b - a * a) / 2.0 + slope * (b * b * b - a * a * a) / 3.0;
  }
  return kFourPi * total;
}

}  // namespace

double shell_average(const IntegralSolution& sol, const PathLengthModel& model,
                     double r_lo, double r_hi) {
  if (!(r_hi > r_lo) || r_lo < 0.0) {
    throw std::invalid_argument("shell_average: need 0 <= r_lo < r_hi");
  }
  const double atom = model.atom_at_zero();
  // Continuous first-flight mass, then the origin mass in the first shell.
  const double c_lo = r_lo > 0.0 ? model.cdf(r_lo) - atom : 0.0;
  double mass = sol.source_strength * (model.cdf(r_hi) - atom - c_lo);
  if (r_lo == 0.0) mass += sol.origin_mass;
  mass += scattered_shell_integral(sol, r_lo, r_hi);
  return mass / shell_volume(r_lo, r_hi);
}

double total_collision_rate(const IntegralSolution& sol,
                            const PathLengthModel& model) {
  const double atom = model.atom_at_zero();
  return sol.origin_mass + sol.source_strength * (1.0 - atom) +
         scattered_shell_integral(sol, 0.0, sol.grid.r_max);
}

}  // namespace nonclassical
