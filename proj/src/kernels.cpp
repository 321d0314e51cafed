#include "nonclassical/kernels.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <fmt/core.h>

namespace nonclassical {

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::Classical:
      return "classical";
    case ModelKind::Diffusion:
      return "diffusion";
    case ModelKind::SP2:
      return "sp2";
    case ModelKind::SP3:
      return "sp3";
  }
  return "unknown";
}

ModelKind parse_model_kind(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  for (ModelKind kind : kAllModels) {
    if (lower == to_string(kind)) return kind;
  }
  throw std::invalid_argument(fmt::format(
      "unknown model '{}' (expected classical, diffusion, sp2 or sp3)", name));
}

CrossSections::CrossSections(double sigma_t, double sigma_s)
    : sigma_t_(sigma_t), sigma_s_(sigma_s) {
  if (!(sigma_t > 0.0) || !std::isfinite(sigma_t)) {
    throw std::invalid_argument(
        fmt::format("sigma_t must be positive and finite, got {}", sigma_t));
  }
  if (!(sigma_s >= 0.0)) {
    throw std::invalid_argument(
        fmt::format("sigma_s must be non-negative, got {}", sigma_s));
  }
  if (!(sigma_s < sigma_t)) {
    throw std::invalid_argument(fmt::format(
        "sigma_s must be strictly less than sigma_t (got sigma_s={}, "
        "sigma_t={})",
        sigma_s, sigma_t));
  }
}

Sp3Constants solve_sp3_constants() {
  // 3 l^4 - 30 l^2 + 35 = 0 is a quadratic in l^2.
  const double disc = 2.0 * std::sqrt(10.0 / 3.0);
  const double l2_plus = 5.0 + disc;
  const double l2_minus = 5.0 - disc;

  Sp3Constants c{};
  c.lambda_plus = std::sqrt(l2_plus);
  c.lambda_minus = std::sqrt(l2_minus);
  c.a_plus = 14.0 / (35.0 - 9.0 * l2_plus);
  c.a_minus = 14.0 / (35.0 - 9.0 * l2_minus);

  // A+ a+ + A- a- = -14/9,  A+ + A- = 55/9
  const double rhs_coupling = -14.0 / 9.0;
  const double rhs_sum = 55.0 / 9.0;
  c.amp_plus = (rhs_coupling - c.a_minus * rhs_sum) / (c.a_plus - c.a_minus);
  c.amp_minus = rhs_sum - c.amp_plus;

  const double tol = 1e-12;
  const auto quartic = [](double l) {
    const double l2 = l * l;
    return 3.0 * l2 * l2 - 30.0 * l2 + 35.0;
  };
  const double norm = c.amp_plus / l2_plus + c.amp_minus / l2_minus;
  if (std::abs(quartic(c.lambda_plus)) > tol * 100.0 ||
      std::abs(quartic(c.lambda_minus)) > tol * 100.0 ||
      std::abs(c.amp_plus * c.a_plus + c.amp_minus * c.a_minus - rhs_coupling) >
          tol ||
      std::abs(norm - 1.0) > tol) {
    throw std::logic_error("SP3 constants failed their defining equations");
  }
  return c;
}

PathLengthModel::PathLengthModel(ModelKind kind, CrossSections xs)
    : kind_(kind), xs_(xs) {
  switch (kind) {
    case ModelKind::Classical:
      break;
    case ModelKind::Diffusion: {
      const double lambda = std::sqrt(3.0);
      terms_.push_back({lambda * lambda, lambda});
      break;
    }
    case ModelKind::SP2: {
      const double lambda = std::sqrt(5.0 / 3.0);
      atom_ = 4.0 / 9.0;
      terms_.push_back({(5.0 / 9.0) * lambda * lambda, lambda});
      break;
    }
    case ModelKind::SP3:
      sp3_ = solve_sp3_constants();
      // Slowest-decaying term last; hazard() rescales by it.
      terms_.push_back({sp3_.amp_plus, sp3_.lambda_plus});
      terms_.push_back({sp3_.amp_minus, sp3_.lambda_minus});
      break;
  }
}

PathLengthModel make_model(ModelKind kind, CrossSections xs) {
  return PathLengthModel(kind, xs);
}

namespace {

void require_nonnegative(double s, const char* what) {
  if (!(s >= 0.0)) {
    throw std::domain_error(
        fmt::format("{}: path length must be >= 0, got {}", what, s));
  }
}

// 1 - (1 + x) e^{-x}, accurate for small x.
double erlang2_cdf(double x) { return -std::expm1(-x) - x * std::exp(-x); }

}  // namespace

double PathLengthModel::density(double s) const {
  require_nonnegative(s, "density");
  const double st = xs_.sigma_t();
  const double x = st * s;
  if (kind_ == ModelKind::Classical) return st * std::exp(-x);
  double sum = 0.0;
  for (const auto& t : terms_) sum += t.weight * std::exp(-t.rate * x);
  return st * x * sum;
}

double PathLengthModel::hazard(double s) const {
  if (!(s > 0.0)) {
    throw std::domain_error(fmt::format(
        "hazard: path length must be > 0, got {} (query atom_at_zero for s=0)",
        s));
  }
  const double st = xs_.sigma_t();
  if (kind_ == ModelKind::Classical) return st;
  const double x = st * s;
  // Scale numerator and denominator by e^{k_min x}; k_min is the last term.
  const double k_min = terms_.back().rate;
  double num = 0.0;
  double den = 0.0;
  for (const auto& t : terms_) {
    const double e = std::exp(-(t.rate - k_min) * x);
    num += t.weight * e;
    den += t.weight / (t.rate * t.rate) * (1.0 + t.rate * x) * e;
  }
  return st * x * num / den;
}

double PathLengthModel::hazard_at_zero_limit() const {
  return kind_ == ModelKind::Classical ? xs_.sigma_t() : 0.0;
}

double PathLengthModel::cdf(double s) const {
  require_nonnegative(s, "cdf");
  const double x = xs_.sigma_t() * s;
  if (kind_ == ModelKind::Classical) return -std::expm1(-x);
  double sum = 0.0;
  for (const auto& t : terms_) {
    sum += t.weight / (t.rate * t.rate) * erlang2_cdf(t.rate * x);
  }
  return atom_ + sum;
}

double PathLengthModel::survival(double s) const {
  require_nonnegative(s, "survival");
  const double x = xs_.sigma_t() * s;
  if (kind_ == ModelKind::Classical) return std::exp(-x);
  if (s == 0.0) return 1.0 - atom_;
  double sum = 0.0;
  for (const auto& t : terms_) {
    sum += t.weight / (t.rate * t.rate) * (1.0 + t.rate * x) *
           std::exp(-t.rate * x);
  }
  return sum;
}

double PathLengthModel::moment(int order) const {
  if (order != 1 && order != 2) {
    throw std::invalid_argument(
        fmt::format("moment: order must be 1 or 2, got {}", order));
  }
  const double st = xs_.sigma_t();
  if (kind_ == ModelKind::Classical) {
    return order == 1 ? 1.0 / st : 2.0 / (st * st);
  }
  // int_0^inf s^k * st^2 s w e^{-r st s} ds = w (k+1)! / (r^{k+2} st^k)
  double sum = 0.0;
  for (const auto& t : terms_) {
    const double r2 = t.rate * t.rate;
    sum += order == 1 ? 2.0 * t.weight / (r2 * t.rate)
                      : 6.0 * t.weight / (r2 * r2);
  }
  return order == 1 ? sum / st : sum / (st * st);
}

}  // namespace nonclassical
