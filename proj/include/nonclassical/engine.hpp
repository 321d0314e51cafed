#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonclassical/kernels.hpp"
#include "nonclassical/random_stream.hpp"
#include "nonclassical/sampler.hpp"

namespace nonclassical {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec3& operator+=(const Vec3& o) {
    x += o.x;
    y += o.y;
    z += o.z;
    return *this;
  }
  friend Vec3 operator*(double a, const Vec3& v) {
    return {a * v.x, a * v.y, a * v.z};
  }
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }
};

/// Uniform direction on the unit sphere from two variates.
Vec3 isotropic_direction(double u_mu, double u_phi);

struct Particle {
  Vec3 position;
  Vec3 direction;
  double weight = 1.0;
};

enum class CaptureMode { Analog, Implicit };

std::string_view to_string(CaptureMode mode);
CaptureMode parse_capture_mode(std::string_view name);

/// Raised for configurations that violate ProblemConfig invariants.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Point source of unit strength at the origin in an infinite medium.
struct ProblemConfig {
  ModelKind model = ModelKind::Diffusion;
  double sigma_t = 1.0;
  double sigma_s = 0.5;
  std::uint64_t histories = 1'000'000;
  std::uint64_t batches = 100;
  std::uint64_t seed = 1;
  double r_max = 10.0;
  std::size_t shells = 64;
  CaptureMode capture = CaptureMode::Analog;
  /// 0 selects NONCLASSICAL_MC_WORKERS, falling back to the CPU count.
  unsigned workers = 0;

  /// Throws ConfigError; requires histories >= batches >= 10,
  /// r_max >= 5 mean free paths (5 / sigma_t) and sigma_s < sigma_t.
  void validate() const;
};

/// Radial-shell collision tally with per-batch accumulators.
///
/// Batch rows are disjoint, so workers that own distinct batches may score
/// concurrently.
class ShellTally {
 public:
  ShellTally(std::vector<double> edges, std::size_t batches);
  static ShellTally uniform(double r_max, std::size_t shells,
                            std::size_t batches);

  std::size_t shells() const { return edges_.size() - 1; }
  std::size_t batches() const { return batches_; }
  const std::vector<double>& edges() const { return edges_; }
  double volume(std::size_t shell) const;

  /// Shell containing radius r, or shells() if r lies beyond the last edge.
  std::size_t locate(double r) const;

  void score(std::size_t batch, double r, double weight);
  void add_histories(std::size_t batch, std::uint64_t n) {
    histories_[batch] += n;
  }

  double weight(std::size_t batch, std::size_t shell) const {
    return weight_[batch * shells() + shell];
  }
  std::uint64_t scores(std::size_t batch, std::size_t shell) const {
    return count_[batch * shells() + shell];
  }
  std::uint64_t histories(std::size_t batch) const { return histories_[batch]; }

 private:
  std::vector<double> edges_;
  std::size_t batches_;
  std::vector<double> weight_;
  std::vector<std::uint64_t> count_;
  std::vector<std::uint64_t> histories_;
};

struct HistoryOutcome {
  std::uint64_t collisions = 0;
  double collision_weight = 0.0;
  double absorbed_weight = 0.0;
  std::uint64_t flights = 0;
  std::uint64_t zero_length_flights = 0;
  double first_flight = 0.0;
  bool fault = false;   // non-finite position
  bool capped = false;  // hit the per-history collision cap
};

inline constexpr std::uint64_t kMaxCollisionsPerHistory = 100'000;
inline constexpr double kRouletteThreshold = 0.01;
inline constexpr double kRouletteSurvival = 0.1;

/// Transports one source particle born at the origin until absorption,
/// scoring every collision into `tally` row `batch`.
HistoryOutcome run_history(const PathLengthModel& model, RandomStream& stream,
                           ShellTally& tally, std::size_t batch,
                           CaptureMode capture = CaptureMode::Analog);

struct ShellEstimate {
  double r_lo;
  double r_hi;
  double mean;
  double std_error;
  std::uint64_t n_scores;
};

struct TallyResult {
  ProblemConfig config;
  std::vector<ShellEstimate> shells;
  /// Scored collision weight per history; the raw count in analog mode.
  Estimate collisions_per_history;
  Estimate absorbed_per_history;
  /// Fraction of flights of exactly zero length.
  Estimate zero_length_fraction;
  /// Mean squared length of the first flight out of the source.
  Estimate first_flight_second_moment;
  std::uint64_t total_collisions = 0;
  std::uint64_t faults = 0;
  std::uint64_t capped = 0;
};

/// Worker count from NONCLASSICAL_MC_WORKERS, else hardware concurrency.
unsigned default_worker_count();

/// Runs config.histories histories split into config.batches fixed batches.
/// The result is bitwise identical for any worker count.
TallyResult simulate(const ProblemConfig& config);

struct ScalarFluxEstimate {
  std::vector<Estimate> values;
  /// Set when `values` holds the collision-rate density f rather than φ0:
  /// for non-exponential laws φ0 is not f / Σt.
  bool nonclassical = false;
};

ScalarFluxEstimate scalar_flux_from_collisions(const TallyResult& result,
                                               const CrossSections& xs);

}  // namespace nonclassical
