#include <cmath>
#include <limits>
#include <stdexcept>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <doctest.h>

#include "nonclassical/kernels.hpp"
#include "nonclassical/reference.hpp"

using namespace nonclassical;
using doctest::Approx;

namespace {

PathLengthModel model(ModelKind k, double st = 1.0) {
  return make_model(k, CrossSections(st, 0.0));
}

double integrate_0_inf(auto f) {
  boost::math::quadrature::exp_sinh<double> q;
  return q.integrate(f, 0.0, std::numeric_limits<double>::infinity(), 1e-14);
}

double integrate(auto f, double a, double b) {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate(f, a, b, 1e-14);
}

}  // namespace

TEST_CASE("model names round trip and reject junk") {
  for (ModelKind k : kAllModels) CHECK(parse_model_kind(to_string(k)) == k);
  CHECK(parse_model_kind("SP3") == ModelKind::SP3);
  CHECK_THROWS_AS(parse_model_kind("sp4"), std::invalid_argument);
}

TEST_CASE("cross sections validate their inputs") {
  CHECK_THROWS_AS(CrossSections(0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(CrossSections(-1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(CrossSections(std::nan(""), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(CrossSections(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(CrossSections(1.0, -0.1), std::invalid_argument);
  const CrossSections xs(2.0, 1.5);
  CHECK(xs.sigma_a() == 0.5);
  CHECK(xs.scattering_ratio() == 0.75);
}

TEST_CASE("SP3 constants agree with an independent solve") {
  const Sp3Constants c = solve_sp3_constants();
  // Roots of 3x^2 - 30x + 35 in x = l^2 by the quadratic formula.
  const double disc = std::sqrt(900.0 - 4.0 * 3.0 * 35.0);
  const double lp = std::sqrt((30.0 + disc) / 6.0);
  const double lm = std::sqrt((30.0 - disc) / 6.0);
  CHECK(c.lambda_plus == Approx(lp).epsilon(1e-14));
  CHECK(c.lambda_minus == Approx(lm).epsilon(1e-14));

  // Amplitudes from normalisation and the exact second moment.
  //   A+/lp^2 + A-/lm^2 = 1,  6 A+/lp^4 + 6 A-/lm^4 = 2
  const double a11 = 1.0 / (lp * lp), a12 = 1.0 / (lm * lm);
  const double a21 = 6.0 * a11 * a11, a22 = 6.0 * a12 * a12;
  const double det = a11 * a22 - a12 * a21;
  const double amp_p = (1.0 * a22 - a12 * 2.0) / det;
  const double amp_m = (a11 * 2.0 - a21 * 1.0) / det;
  CHECK(c.amp_plus == Approx(amp_p).epsilon(1e-12));
  CHECK(c.amp_minus == Approx(amp_m).epsilon(1e-12));

  CHECK(c.a_plus == Approx(-0.3266193350).epsilon(1e-9));
  CHECK(c.a_minus == Approx(0.6123336207).epsilon(1e-9));
}

TEST_CASE("densities integrate to one with the atom") {
  for (ModelKind k : kAllModels) {
    for (double st : {0.5, 1.0, 2.0}) {
      const auto m = model(k, st);
      const double mass =
          m.atom_at_zero() + integrate_0_inf([&](double s) { return m.density(s); });
      CHECK(mass == Approx(1.0).epsilon(1e-12));
    }
  }
}

TEST_CASE("closed-form moments match quadrature") {
  for (ModelKind k : kAllModels) {
    for (double st : {0.5, 1.0, 2.0}) {
      const auto m = model(k, st);
      const double m1 = integrate_0_inf([&](double s) { return s * m.density(s); });
      const double m2 =
          integrate_0_inf([&](double s) { return s * s * m.density(s); });
      CHECK(m.moment(1) == Approx(m1).epsilon(1e-10));
      CHECK(m.moment(2) == Approx(m2).epsilon(1e-10));
      CHECK(m.moment(2) == Approx(2.0 / (st * st)).epsilon(1e-13));
    }
  }
  CHECK_THROWS_AS(model(ModelKind::SP2).moment(3), std::invalid_argument);
}

TEST_CASE("cdf is the integral of the density") {
  for (ModelKind k : kAllModels) {
    const auto m = model(k, 1.3);
    for (double s : {1e-6, 0.1, 0.7, 2.0, 5.0, 15.0}) {
      const double expect =
          m.atom_at_zero() + integrate(
                                 [&](double t) { return m.density(t); }, 0.0, s);
      CHECK(m.cdf(s) == Approx(expect).epsilon(1e-12));
      CHECK(m.cdf(s) + m.survival(s) == Approx(1.0).epsilon(1e-14));
    }
  }
}

TEST_CASE("survival keeps relative accuracy deep in the tail") {
  for (ModelKind k : kAllModels) {
    const auto m = model(k);
    const double s = 300.0;
    const double tail = integrate_0_inf([&](double t) { return m.density(s + t); });
    CHECK(m.survival(s) > 0.0);
    CHECK(m.survival(s) == Approx(tail).epsilon(1e-10));
  }
}

TEST_CASE("SP2 atom sits exactly at zero") {
  const auto m = model(ModelKind::SP2);
  CHECK(m.cdf(0.0) == 4.0 / 9.0);
  CHECK(m.atom_at_zero() == 4.0 / 9.0);
  CHECK(m.density(0.0) == 0.0);
  for (ModelKind k : {ModelKind::Classical, ModelKind::Diffusion, ModelKind::SP3}) {
    CHECK(model(k).cdf(0.0) == 0.0);
  }
}

TEST_CASE("hazard is density over survival and has the right limits") {
  for (ModelKind k : kAllModels) {
    const auto m = model(k, 0.8);
    for (double s : {0.01, 0.5, 1.0, 4.0, 20.0}) {
      CHECK(m.hazard(s) == Approx(m.density(s) / m.survival(s)).epsilon(1e-12));
    }
    CHECK_THROWS_AS(m.hazard(0.0), std::domain_error);
    CHECK_THROWS_AS(m.density(-1.0), std::domain_error);
    CHECK_THROWS_AS(m.cdf(-1e-300), std::domain_error);
    // Far tail, where the exponent alone would underflow survival.
    CHECK(std::isfinite(m.hazard(2000.0)));
  }
  CHECK(model(ModelKind::Classical).hazard(3.0) == 1.0);
  CHECK(model(ModelKind::Diffusion).hazard(1e7) ==
        Approx(std::sqrt(3.0)).epsilon(1e-6));
  CHECK(model(ModelKind::SP2).hazard(1e7) ==
        Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-6));
  CHECK(model(ModelKind::SP3).hazard(1e7) ==
        Approx(solve_sp3_constants().lambda_minus).epsilon(1e-6));
  for (ModelKind k : kAllModels) CHECK(model(k).hazard_at_zero_limit() ==
                                       (k == ModelKind::Classical ? 1.0 : 0.0));
}

TEST_CASE("hazard of the Erlang-type laws at finite s") {
  // Single Erlang-2 term with rate k: hazard = k^2 s / (1 + k s).
  const double k = std::sqrt(3.0);
  CHECK(model(ModelKind::Diffusion).hazard(4.0) ==
        Approx(k * k * 4.0 / (1.0 + k * 4.0)).epsilon(1e-14));
  // SP3 at s = 50: the fast term is negligible (e^{-89}).
  const double lm = solve_sp3_constants().lambda_minus;
  CHECK(model(ModelKind::SP3).hazard(50.0) ==
        Approx(lm * lm * 50.0 / (1.0 + lm * 50.0)).epsilon(1e-12));
}

TEST_CASE("single-term laws have a non-decreasing hazard") {
  for (ModelKind k : {ModelKind::Classical, ModelKind::Diffusion, ModelKind::SP2}) {
    const auto m = model(k);
    double prev = 0.0;
    for (double s = 0.01; s < 60.0; s += 0.01) {
      const double h = m.hazard(s);
      CHECK(h >= prev * (1.0 - 1e-14));
      prev = h;
    }
  }
}

TEST_CASE("SP3 hazard overshoots its limit before settling") {
  const auto m = model(ModelKind::SP3);
  const double lm = solve_sp3_constants().lambda_minus;
  CHECK(m.hazard(1.0) > lm);
  CHECK(m.hazard(3.0) < m.hazard(1.0));
  CHECK(m.hazard(3.0) < m.hazard(10.0));
  for (double s = 0.05; s < 200.0; s *= 1.1) CHECK(m.hazard(s) > 0.0);
}

TEST_CASE("spot values of the densities") {
  const double r3 = std::sqrt(3.0);
  // Diffusion peaks at s = 1/sqrt(3) with height sqrt(3)/e.
  CHECK(model(ModelKind::Diffusion).density(1.0 / r3) ==
        Approx(r3 / std::exp(1.0)).epsilon(1e-14));
  CHECK(model(ModelKind::SP3).density(1.0) == Approx(0.444738).epsilon(1e-6));
  CHECK(model(ModelKind::Classical, 2.0).density(0.5) ==
        Approx(2.0 * std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("first-collision densities equal the point-source solutions with no scattering") {
  // p(s) = 4π s^2 f(s) for a purely absorbing medium.
  const double st = 1.7;
  const CrossSections xs(st, 0.0);
  for (double s : {0.05, 0.3, 1.0, 3.0}) {
    const double shell = 4.0 * M_PI * s * s;
    CHECK(make_model(ModelKind::Diffusion, xs).density(s) ==
          Approx(shell * diffusion_point_source(xs, s)).epsilon(1e-13));
    CHECK(make_model(ModelKind::SP3, xs).density(s) ==
          Approx(shell * st * sp3_green_scalar(xs, s)).epsilon(1e-13));
  }
}

TEST_CASE("reciprocal rates are Gauss-Legendre abscissae") {
  const auto& s2 = boost::math::quadrature::gauss<double, 2>::abscissa();
  const auto& s4 = boost::math::quadrature::gauss<double, 4>::abscissa();
  CHECK(1.0 / model(ModelKind::Diffusion).terms()[0].rate ==
        Approx(s2[0]).epsilon(1e-14));
  const Sp3Constants c = solve_sp3_constants();
  // Boost stores the non-negative abscissae in increasing order.
  CHECK(1.0 / c.lambda_plus == Approx(s4[0]).epsilon(1e-14));
  CHECK(1.0 / c.lambda_minus == Approx(s4[1]).epsilon(1e-14));
}
