#include "nonclassical/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <utility>

#include <fmt/core.h>

#include "root_finding.hpp"

namespace nonclassical {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailProbability = 1e-12;

// Hazard including its right limit at s = 0, so root finders may evaluate
// at the lower bracket end.
double hazard_or_limit(const PathLengthModel& m, double s) {
  return s > 0.0 ? m.hazard(s) : m.hazard_at_zero_limit();
}

// Solves survival(s) = target (0 < target < 1 - atom) in log form.
// ln S is concave-decreasing for these laws, so Newton is well behaved.
double solve_survival(const PathLengthModel& m, double log_target, double lo,
                      double hi, double guess) {
  auto fn = [&](double s) {
    return std::pair{std::log(m.survival(s)) - log_target,
                     -hazard_or_limit(m, s)};
  };
  if (!std::isfinite(hi)) {
    hi = std::max(lo, guess) * 2.0 + 1.0 / m.sigma_t();
    while (fn(hi).first > 0.0) hi *= 2.0;
  }
  return detail::safeguarded_newton(fn, lo, hi, guess, 1e-14);
}

}  // namespace

double invert_f(double y) {
  if (!(y > 0.0) || !(y <= 1.0)) {
    throw std::domain_error(
        fmt::format("invert_f: argument must lie in (0, 1], got {}", y));
  }
  if (y == 1.0) return 0.0;

  // ln f(z) - ln y = ln(1+z) - z - ln y is concave and decreasing.
  const double log_y = std::log(y);
  auto fn = [log_y](double z) {
    return std::pair{std::log1p(z) - z - log_y, -z / (1.0 + z)};
  };
  const double guess = y > 0.5 ? std::sqrt(2.0 * (1.0 - y))
                               : -log_y + std::log(1.0 - log_y);
  double hi = 2.0 * guess + 1.0;
  while (fn(hi).first > 0.0) hi *= 2.0;
  return detail::safeguarded_newton(fn, 0.0, hi, guess, 1e-15);
}

QuantileTable::QuantileTable(ModelKind kind, std::size_t knots)
    : kind_(kind) {
  if (knots < 2) throw std::invalid_argument("QuantileTable needs >= 2 knots");
  const PathLengthModel unit(kind, CrossSections(1.0, 0.0));
  atom_ = unit.atom_at_zero();
  const double t_max = -std::log(kTailProbability);
  dt_ = t_max / static_cast<double>(knots - 1);

  xi_.resize(knots);
  length_.resize(knots);
  xi_[0] = atom_;
  length_[0] = 0.0;
  const double log_continuous = std::log1p(-atom_);
  for (std::size_t j = 1; j < knots; ++j) {
    const double t = static_cast<double>(j) * dt_;
    xi_[j] = 1.0 - (1.0 - atom_) * std::exp(-t);
    const double lo = length_[j - 1];
    length_[j] = solve_survival(unit, log_continuous - t, lo, kInf, lo + dt_);
  }
}

QuantileTable::Lookup QuantileTable::lookup(double xi) const {
  if (xi <= atom_) return {0.0, 0.0, 0.0};
  const double t = -(std::log1p(-xi) - std::log1p(-atom_));
  const double pos = t / dt_;
  const std::size_t last = length_.size() - 1;
  if (pos >= static_cast<double>(last)) {
    const double slope = (length_[last] - length_[last - 1]) / dt_;
    const double guess =
        length_[last] + slope * (t - static_cast<double>(last) * dt_);
    return {guess, length_[last] * (1.0 - 1e-9), kInf};
  }
  const auto j = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(j);
  const double guess = length_[j] + frac * (length_[j + 1] - length_[j]);
  return {guess, length_[j] * (1.0 - 1e-9), length_[j + 1] * (1.0 + 1e-9)};
}

const QuantileTable& shared_quantile_table(ModelKind kind) {
  static std::array<std::once_flag, kAllModels.size()> flags;
  static std::array<std::unique_ptr<QuantileTable>, kAllModels.size()> tables;
  const auto i = static_cast<std::size_t>(kind);
  std::call_once(flags[i],
                 [&] { tables[i] = std::make_unique<QuantileTable>(kind); });
  return *tables[i];
}

double sample_path(const PathLengthModel& model, double xi) {
  if (!(xi >= 0.0) || !(xi < 1.0)) {
    throw std::domain_error(
        fmt::format("sample_path: variate must lie in [0, 1), got {}", xi));
  }
  const double st = model.sigma_t();
  switch (model.kind()) {
    case ModelKind::Classical:
      return -std::log1p(-xi) / st;
    case ModelKind::Diffusion:
      return invert_f(1.0 - xi) / (model.terms().front().rate * st);
    case ModelKind::SP2: {
      if (xi <= model.atom_at_zero()) return 0.0;
      const double rate = model.terms().front().rate * st;
      const double y = (9.0 / 5.0) * (1.0 - xi);
      // Just above the atom y rounds to 1; f(z) ~ 1 - z^2/2 there.
      if (y >= 1.0) return std::sqrt(2.0 * (9.0 / 5.0) * (xi - 4.0 / 9.0)) / rate;
      return invert_f(y) / rate;
    }
    case ModelKind::SP3: {
      if (xi == 0.0) return 0.0;
      const auto hint = shared_quantile_table(ModelKind::SP3).lookup(xi);
      const double lo = hint.lo / st;
      const double hi = hint.hi / st;
      const double guess = hint.guess / st;
      if (xi > 0.5) return solve_survival(model, std::log1p(-xi), lo, hi, guess);
      auto fn = [&](double s) {
        return std::pair{model.cdf(s) - xi, model.density(s)};
      };
      return detail::safeguarded_newton(fn, lo, hi, guess, 1e-14);
    }
  }
  throw std::logic_error("sample_path: unhandled model kind");
}

MomentReport empirical_check(const PathLengthModel& model, std::size_t n,
                             RandomStream stream) {
  if (n < 10000) {
    throw std::invalid_argument(
        fmt::format("empirical_check: need at least 10^4 samples, got {}", n));
  }
  std::vector<double> samples(n);
  double sum = 0.0, sum2 = 0.0, sum4 = 0.0;
  std::size_t zeros = 0;
  for (auto& s : samples) {
    s = sample_path(model, stream.uniform());
    const double s2 = s * s;
    sum += s;
    sum2 += s2;
    sum4 += s2 * s2;
    if (s == 0.0) ++zeros;
  }
  const double dn = static_cast<double>(n);
  const double mean = sum / dn;
  const double m2 = sum2 / dn;
  const double var1 = (sum2 - dn * mean * mean) / (dn - 1.0);
  const double var2 = (sum4 - dn * m2 * m2) / (dn - 1.0);
  const double pz = static_cast<double>(zeros) / dn;

  std::sort(samples.begin(), samples.end());
  constexpr int kProbes = 64;
  const double probe_max = 10.0 / model.sigma_t();
  Estimate worst{0.0, 0.0};
  for (int j = 0; j <= kProbes; ++j) {
    const double s = probe_max * j / kProbes;
    const auto below = std::upper_bound(samples.begin(), samples.end(), s) -
                       samples.begin();
    const double empirical = static_cast<double>(below) / dn;
    const double exact = model.cdf(s);
    const double dev = std::abs(empirical - exact);
    if (dev > worst.value) {
      worst = {dev, std::sqrt(exact * (1.0 - exact) / dn)};
    }
  }

  return MomentReport{
      n,
      {mean, std::sqrt(var1 / dn)},
      {m2, std::sqrt(var2 / dn)},
      {pz, std::sqrt(pz * (1.0 - pz) / dn)},
      worst,
  };
}

}  // namespace nonclassical
