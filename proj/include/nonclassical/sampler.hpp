#pragma once

#include <cstddef>
#include <vector>

#include "nonclassical/kernels.hpp"
#include "nonclassical/random_stream.hpp"

namespace nonclassical {

/// Inverse of f(z) = (1 + z) e^{-z} on z >= 0, for y in (0, 1].
double invert_f(double y);

/// Monotone table of (ξ, Σt·s) knots for a model at unit Σt, spaced
/// uniformly in t = -ln((1-ξ)/(1-atom)) so the exponential tail is resolved.
/// Covers ξ from the atom at zero up to 1 - 1e-12.
class QuantileTable {
 public:
  static constexpr std::size_t kDefaultKnots = 2048;

  QuantileTable(ModelKind kind, std::size_t knots = kDefaultKnots);

  ModelKind kind() const { return kind_; }
  std::size_t size() const { return xi_.size(); }
  const std::vector<double>& xi() const { return xi_; }
  const std::vector<double>& optical_length() const { return length_; }

  /// Interpolated Σt·s and the bracketing knot interval [lo, hi] (hi may be
  /// +inf past the last knot).
  struct Lookup {
    double guess;
    double lo;
    double hi;
  };
  Lookup lookup(double xi) const;

 private:
  ModelKind kind_;
  double atom_;
  double dt_;
  std::vector<double> xi_;
  std::vector<double> length_;
};

/// Lazily built, process-wide table for `kind`; Σt scales out so one table
/// per kind suffices.
const QuantileTable& shared_quantile_table(ModelKind kind);

/// Exact inverse-transform sample of the distance to collision, ξ in [0, 1).
/// Pure function: all randomness is supplied by the caller.
double sample_path(const PathLengthModel& model, double xi);

struct Estimate {
  double value;
  double std_error;
};

struct MomentReport {
  std::size_t samples;
  Estimate mean;
  Estimate second_moment;
  Estimate zero_fraction;
  /// max_j |F_n(s_j) - F(s_j)| over the probe grid; std_error is the binomial
  /// standard error sqrt(F(1-F)/n) at the maximising probe.
  Estimate max_cdf_deviation;
};

/// Draws n >= 10^4 samples from `stream` and compares them with the
/// analytic law.
MomentReport empirical_check(const PathLengthModel& model, std::size_t n,
                             RandomStream stream);

}  // namespace nonclassical
