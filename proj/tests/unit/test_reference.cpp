#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/expint.hpp>
#include <doctest.h>

#include "nonclassical/reference.hpp"

using namespace nonclassical;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

double integrate(auto f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b, 1e-13);
}

double integrate_to_inf(auto f, double a) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f, a, std::numeric_limits<double>::infinity(), 1e-13);
}

double shell_volume(double lo, double hi) {
  return 4.0 / 3.0 * kPi * (hi * hi * hi - lo * lo * lo);
}

}  // namespace

TEST_CASE("E1 matches Boost across the series/fraction switch") {
  for (double x : {1e-10, 1e-3, 0.1, 0.5, 0.999, 1.0, 1.001, 2.0, 10.0, 50.0,
                   300.0}) {
    CHECK(exp_integral_e1(x) == Approx(boost::math::expint(1, x)).epsilon(1e-13));
  }
  CHECK(exp_integral_e1(1.0) == Approx(0.2193839344).epsilon(1e-10));
  CHECK(exp_integral_e1(0.001) == Approx(6.331539364).epsilon(1e-9));
  CHECK_THROWS_AS(exp_integral_e1(0.0), std::domain_error);
}

TEST_CASE("diffusion point source and its shell average") {
  const CrossSections xs(2.0, 1.2);
  const double kappa = std::sqrt(3.0 * 2.0 * 0.8);
  for (double r : {0.1, 1.0, 3.0}) {
    CHECK(diffusion_point_source(xs, r) ==
          Approx(3.0 * 4.0 * std::exp(-kappa * r) / (4.0 * kPi * r)).epsilon(1e-14));
  }
  CHECK(diffusion_point_source(CrossSections(1.0, 0.0), 1.0) ==
        Approx(0.0422368).epsilon(1e-6));
  for (auto [lo, hi] : {std::pair{0.0, 0.1}, {0.3, 0.5}, {2.0, 4.0}}) {
    const double mass = integrate(
        [&](double r) { return 4.0 * kPi * r * r * diffusion_point_source(xs, r); },
        lo, hi);
    CHECK(diffusion_shell_average(xs, lo, hi) ==
          Approx(mass / shell_volume(lo, hi)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(diffusion_point_source(xs, 0.0), std::domain_error);
  CHECK_THROWS_AS(sp3_green_scalar(xs, -1.0), std::domain_error);
}

TEST_CASE("SP3 Green's function carries total flux 1/sigma_t") {
  for (double st : {0.5, 1.0, 2.0}) {
    const CrossSections xs(st, 0.0);
    const double total = integrate_to_inf(
        [&](double r) { return 4.0 * kPi * r * r * sp3_green_scalar(xs, r); }, 0.0);
    CHECK(total == Approx(1.0 / st).epsilon(1e-12));
  }
}

TEST_CASE("first-flight shell averages match quadrature of the density") {
  for (ModelKind k : kAllModels) {
    const auto m = make_model(k, CrossSections(1.5, 0.0));
    for (auto [lo, hi] : {std::pair{0.0, 0.2}, {0.2, 0.9}, {3.0, 3.5}}) {
      double mass = integrate([&](double s) { return m.density(s); }, lo, hi);
      if (lo == 0.0) mass += m.atom_at_zero();
      CHECK(first_flight_shell_average(m, lo, hi) ==
            Approx(mass / shell_volume(lo, hi)).epsilon(1e-11));
    }
  }
}

TEST_CASE("radial kernel and its antiderivatives") {
  for (ModelKind k : kAllModels) {
    const auto m = make_model(k, CrossSections(1.3, 0.0));
    const RadialKernel P(m);
    CAPTURE(to_string(k));
    for (double u : {0.01, 0.4, 2.0, 7.0}) {
      const double direct =
          integrate_to_inf([&](double s) { return m.density(s) / s; }, u);
      CHECK(P(u) == Approx(direct).epsilon(1e-11));
      const double q0 = integrate([&](double t) { return P(t); }, 0.0, u);
      const double q1 = integrate([&](double t) { return t * P(t); }, 0.0, u);
      CHECK(P.integral(u) == Approx(q0).epsilon(1e-10));
      CHECK(P.first_moment(u) == Approx(q1).epsilon(1e-10));
    }
    CHECK(P.integral(0.0) == 0.0);
    // ∫_0^∞ P = ∫ p = continuous mass.
    CHECK(P.integral(200.0) == Approx(1.0 - m.atom_at_zero()).epsilon(1e-12));
  }
}

TEST_CASE("radial operator reproduces a constant away from the boundary") {
  // u = r g is linear for constant g, so the product rule is exact.
  for (ModelKind k : kAllModels) {
    const auto m = make_model(k, CrossSections(1.0, 0.0));
    const RadialGrid grid = RadialGrid::uniform(40.0, 400);
    const RadialOperator op(RadialKernel(m), grid);
    const std::vector<double> ones(grid.nodes.size(), 1.0);
    const auto out = op.apply(ones);
    for (std::size_t j = 0; j < grid.nodes.size(); ++j) {
      if (grid.nodes[j] > 10.0) break;
      CHECK(out[j] == Approx(1.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("radial operator weights are reciprocal on interior nodes") {
  const auto m = make_model(ModelKind::SP3, CrossSections(1.0, 0.0));
  const RadialGrid grid = RadialGrid::uniform(12.0, 256);
  const RadialOperator op(RadialKernel(m), grid);
  const std::size_t n = op.size();
  for (std::size_t i = 1; i < n; i += 17) {
    for (std::size_t j = 1; j < n; j += 13) {
      CHECK(op.weight(i - 1, j) == Approx(op.weight(j - 1, i)).epsilon(1e-12));
    }
  }
}

TEST_CASE("once-scattered source of the diffusion law has a closed form") {
  // In Fourier space the diffusion flight law is 3/(3 + k^2); squaring and
  // inverting gives K[f1](r) = 9 e^{-sqrt3 r} / (8 sqrt3 π).
  const double c = 0.5;
  const auto m = make_model(ModelKind::Diffusion, CrossSections(1.0, c));
  const IntegralSolution sol =
      solve_integral_equation(m, RadialGrid::uniform(12.0, 256));
  const double r3 = std::sqrt(3.0);
  for (std::size_t j = 0; j < sol.grid.nodes.size(); j += 11) {
    const double r = sol.grid.nodes[j];
    CHECK(sol.scatter_source[j] / c ==
          Approx(9.0 * std::exp(-r3 * r) / (8.0 * r3 * kPi)).epsilon(1e-9));
  }
}

TEST_CASE("source iteration equals the truncated Neumann series") {
  for (ModelKind k : kAllModels) {
    const auto m = make_model(k, CrossSections(1.0, 0.3));
    const IntegralSolution sol =
        solve_integral_equation(m, RadialGrid::uniform(12.0, 256), 1e-13);
    const RadialOperator op(RadialKernel(m), sol.grid);
    std::vector<double> term = sol.scatter_source;
    std::vector<double> sum = term;
    for (int n = 1; n < 30; ++n) {
      term = op.apply(term);
      for (std::size_t j = 0; j < term.size(); ++j) {
        term[j] *= 0.3;
        sum[j] += term[j];
      }
    }
    for (std::size_t j = 0; j < sum.size(); ++j) {
      CHECK(sol.scattered[j] == Approx(sum[j]).epsilon(1e-10));
    }
    CHECK(fixed_point_residual(sol, m) < 1e-12);
  }
}

TEST_CASE("integral solution conserves collisions") {
  for (ModelKind k : {ModelKind::Diffusion, ModelKind::SP2, ModelKind::SP3}) {
    for (double c : {0.5, 0.9}) {
      const auto m = make_model(k, CrossSections(1.0, c));
      const double radius = c > 0.8 ? 40.0 : 16.0;
      const IntegralSolution sol =
          solve_integral_equation(m, RadialGrid::uniform(radius, 640));
      CAPTURE(to_string(k));
      CHECK(total_collision_rate(sol, m) == Approx(1.0 / (1.0 - c)).epsilon(2e-4));
      CHECK(fixed_point_residual(sol, m) < 1e-9);
    }
  }
}

TEST_CASE("classical collision total converges at second order") {
  // The E1 kernel is singular at contact, so the error is larger but shrinks
  // like h^2.
  const auto m = make_model(ModelKind::Classical, CrossSections(1.0, 0.9));
  double prev_err = 0.0;
  for (std::size_t points : {320, 640, 1280}) {
    const IntegralSolution sol =
        solve_integral_equation(m, RadialGrid::uniform(40.0, points));
    const double err = std::abs(total_collision_rate(sol, m) - 10.0);
    if (prev_err > 0.0) CHECK(prev_err / err == Approx(4.0).epsilon(0.1));
    prev_err = err;
  }
  CHECK(prev_err < 2e-3);
}

TEST_CASE("SP2 solution keeps a point mass at the origin") {
  const double c = 0.6;
  const auto m = make_model(ModelKind::SP2, CrossSections(1.0, c));
  const IntegralSolution sol =
      solve_integral_equation(m, RadialGrid::uniform(12.0, 256));
  const double a = 4.0 / 9.0;
  CHECK(sol.source_strength == Approx(1.0 / (1.0 - a * c)).epsilon(1e-15));
  CHECK(sol.origin_mass == Approx(a / (1.0 - a * c)).epsilon(1e-15));
  // The innermost shell average includes the origin mass.
  const double inner = shell_average(sol, m, 0.0, 0.05);
  CHECK(inner * shell_volume(0.0, 0.05) > sol.origin_mass);
}

TEST_CASE("integral oracle agrees with diffusion theory for the diffusion law") {
  const CrossSections xs(1.0, 0.5);
  const auto m = make_model(ModelKind::Diffusion, xs);
  const IntegralSolution sol = solve_integral_equation(
      m, RadialGrid::uniform(kDefaultGridRadius, kDefaultGridPoints));
  for (std::size_t j = 0; j < sol.grid.nodes.size(); ++j) {
    const double r = sol.grid.nodes[j];
    if (r > 10.0) break;
    CHECK(sol.density(j) ==
          Approx(diffusion_point_source(xs, r)).epsilon(0.005));
  }
  for (double lo = 0.0; lo < 10.0; lo += 0.625) {
    CHECK(shell_average(sol, m, lo, lo + 0.625) ==
          Approx(diffusion_shell_average(xs, lo, lo + 0.625)).epsilon(0.005));
  }
}

TEST_CASE("pure absorber returns the first-flight density") {
  const auto m = make_model(ModelKind::SP3, CrossSections(1.0, 0.0));
  const IntegralSolution sol =
      solve_integral_equation(m, RadialGrid::uniform(12.0, 256));
  CHECK(sol.iterations == 0);
  for (std::size_t j = 0; j < sol.scattered.size(); ++j) CHECK(sol.scattered[j] == 0.0);
  CHECK(shell_average(sol, m, 1.0, 2.0) ==
        Approx(first_flight_shell_average(m, 1.0, 2.0)).epsilon(1e-14));
}

TEST_CASE("solver rejects unusable grids") {
  const auto m = make_model(ModelKind::SP3, CrossSections(1.0, 0.5));
  CHECK_THROWS_AS(solve_integral_equation(m, RadialGrid::uniform(12.0, 100)),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_integral_equation(m, RadialGrid::uniform(8.0, 512)),
                  std::invalid_argument);
  CHECK_THROWS_AS(solve_integral_equation(m, RadialGrid::uniform(12.0, 256), 1.5),
                  std::invalid_argument);
  const ConvergenceError e("stalled", 17, 1e-3);
  CHECK(e.iterations() == 17);
  CHECK(e.change() == 1e-3);
  CHECK(std::string(e.what()) == "stalled");
}
