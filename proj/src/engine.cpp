#include "nonclassical/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <numbers>
#include <thread>

#include <fmt/core.h>

namespace nonclassical {

Vec3 isotropic_direction(double u_mu, double u_phi) {
  const double mu = 2.0 * u_mu - 1.0;
  const double phi = 2.0 * std::numbers::pi * u_phi;
  const double sin_theta = std::sqrt(std::max(0.0, 1.0 - mu * mu));
  return {sin_theta * std::cos(phi), sin_theta * std::sin(phi), mu};
}

std::string_view to_string(CaptureMode mode) {
  return mode == CaptureMode::Analog ? "analog" : "implicit";
}

CaptureMode parse_capture_mode(std::string_view name) {
  std::string lower(name);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  if (lower == "analog") return CaptureMode::Analog;
  if (lower == "implicit") return CaptureMode::Implicit;
  throw std::invalid_argument(fmt::format(
      "unknown capture mode '{}' (expected analog or implicit)", name));
}

void ProblemConfig::validate() const {
  try {
    CrossSections(sigma_t, sigma_s);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (batches < 10) {
    throw ConfigError(fmt::format("batches must be >= 10, got {}", batches));
  }
  if (histories < batches) {
    throw ConfigError(fmt::format(
        "histories ({}) must be >= batches ({})", histories, batches));
  }
  if (!(r_max * sigma_t >= 5.0) || !std::isfinite(r_max)) {
    throw ConfigError(fmt::format(
        "r_max must cover at least 5 mean free paths (5/sigma_t = {}), got {}",
        5.0 / sigma_t, r_max));
  }
  if (shells == 0) throw ConfigError("shells must be positive");
}

ShellTally::ShellTally(std::vector<double> edges, std::size_t batches)
    : edges_(std::move(edges)), batches_(batches) {
  if (edges_.size() < 2 || edges_.front() != 0.0) {
    throw std::invalid_argument("shell edges must start at 0 with >= 1 shell");
  }
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    if (!(edges_[k] > edges_[k - 1])) {
      throw std::invalid_argument("shell edges must be strictly increasing");
    }
  }
  if (batches_ == 0) throw std::invalid_argument("tally needs >= 1 batch");
  weight_.assign(batches_ * shells(), 0.0);
  count_.assign(batches_ * shells(), 0);
  histories_.assign(batches_, 0);
}

ShellTally ShellTally::uniform(double r_max, std::size_t shells,
                               std::size_t batches) {
  std::vector<double> edges(shells + 1);
  for (std::size_t k = 0; k <= shells; ++k) {
    edges[k] = r_max * static_cast<double>(k) / static_cast<double>(shells);
  }
  return ShellTally(std::move(edges), batches);
}

double ShellTally::volume(std::size_t shell) const {
  const double lo = edges_[shell];
  const double hi = edges_[shell + 1];
  return 4.0 / 3.0 * std::numbers::pi * (hi * hi * hi - lo * lo * lo);
}

std::size_t ShellTally::locate(double r) const {
  // Shells are [lo, hi); r = 0 falls in the innermost shell.
  const auto it = std::upper_bound(edges_.begin(), edges_.end(), r);
  return static_cast<std::size_t>(it - edges_.begin()) - 1;
}

void ShellTally::score(std::size_t batch, double r, double weight) {
  const std::size_t k = locate(r);
  if (k >= shells()) return;
  weight_[batch * shells() + k] += weight;
  ++count_[batch * shells() + k];
}

HistoryOutcome run_history(const PathLengthModel& model, RandomStream& stream,
                           ShellTally& tally, std::size_t batch,
                           CaptureMode capture) {
  const double c = model.cross_sections().scattering_ratio();
  HistoryOutcome out;
  Particle p;
  p.direction = isotropic_direction(stream.uniform(), stream.uniform());

  while (true) {
    const double s = sample_path(model, stream.uniform());
    if (out.flights == 0) out.first_flight = s;
    ++out.flights;
    if (s == 0.0) ++out.zero_length_flights;
    p.position += s * p.direction;
    if (!p.position.finite()) {
      out.fault = true;
      return out;
    }

    tally.score(batch, p.position.norm(), p.weight);
    ++out.collisions;
    out.collision_weight += p.weight;

    if (capture == CaptureMode::Analog) {
      if (stream.uniform() >= c) {
        out.absorbed_weight += p.weight;
        return out;
      }
    } else {
      out.absorbed_weight += (1.0 - c) * p.weight;
      p.weight *= c;
      if (p.weight == 0.0) return out;
      if (p.weight < kRouletteThreshold) {
        if (stream.uniform() >= kRouletteSurvival) return out;
        p.weight /= kRouletteSurvival;
      }
    }

    if (out.collisions >= kMaxCollisionsPerHistory) {
      out.capped = true;
      return out;
    }
    // Scatter isotropically; the path-length clock restarts at zero.
    p.direction = isotropic_direction(stream.uniform(), stream.uniform());
  }
}

unsigned default_worker_count() {
  if (const char* env = std::getenv("NONCLASSICAL_MC_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

namespace {

struct BatchStats {
  std::uint64_t histories = 0;
  std::uint64_t collisions = 0;
  double collision_weight = 0.0;
  double absorbed_weight = 0.0;
  std::uint64_t flights = 0;
  std::uint64_t zero_flights = 0;
  double first_flight_sq = 0.0;
  std::uint64_t faults = 0;
  std::uint64_t capped = 0;
};

// Mean of numer/denom over all batches with the between-batch standard error.
Estimate batch_estimate(const std::vector<double>& numer,
                        const std::vector<double>& denom) {
  const std::size_t b = numer.size();
  double total_n = 0.0, total_d = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    total_n += numer[i];
    total_d += denom[i];
  }
  const double mean = total_d > 0.0 ? total_n / total_d : 0.0;
  if (b < 2) return {mean, 0.0};
  double ss = 0.0;
  for (std::size_t i = 0; i < b; ++i) {
    const double x = denom[i] > 0.0 ? numer[i] / denom[i] : 0.0;
    ss += (x - mean) * (x - mean);
  }
  const double db = static_cast<double>(b);
  return {mean, std::sqrt(ss / (db * (db - 1.0)))};
}

}  // namespace

TallyResult simulate(const ProblemConfig& config) {
  config.validate();
  const PathLengthModel model(config.model,
                              CrossSections(config.sigma_t, config.sigma_s));
  const std::size_t n_batches = config.batches;
  ShellTally tally =
      ShellTally::uniform(config.r_max, config.shells, n_batches);
  std::vector<BatchStats> stats(n_batches);

  // Build the shared table before any worker starts.
  if (config.model == ModelKind::SP3) shared_quantile_table(ModelKind::SP3);

  const std::uint64_t n = config.histories;
  auto run_batch = [&](std::size_t b) {
    const std::uint64_t first = n * b / n_batches;
    const std::uint64_t last = n * (b + 1) / n_batches;
    BatchStats& st = stats[b];
    for (std::uint64_t h = first; h < last; ++h) {
      RandomStream stream(config.seed, h);
      const HistoryOutcome o =
          run_history(model, stream, tally, b, config.capture);
      ++st.histories;
      st.collisions += o.collisions;
      st.collision_weight += o.collision_weight;
      st.absorbed_weight += o.absorbed_weight;
      st.flights += o.flights;
      st.zero_flights += o.zero_length_flights;
      st.first_flight_sq += o.first_flight * o.first_flight;
      st.faults += o.fault ? 1 : 0;
      st.capped += o.capped ? 1 : 0;
    }
    tally.add_histories(b, last - first);
  };

  const unsigned workers = std::max<unsigned>(
      1, std::min<std::size_t>(config.workers ? config.workers
                                              : default_worker_count(),
                               n_batches));
  if (workers == 1) {
    for (std::size_t b = 0; b < n_batches; ++b) run_batch(b);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    {
      std::vector<std::jthread> pool;
      pool.reserve(workers);
      for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          try {
            for (std::size_t b = next++; b < n_batches; b = next++) run_batch(b);
          } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        });
      }
    }
    if (error) std::rethrow_exception(error);
  }

  // Reduction in batch order.
  TallyResult result;
  result.config = config;
  std::vector<double> hist(n_batches);
  for (std::size_t b = 0; b < n_batches; ++b) {
    hist[b] = static_cast<double>(stats[b].histories);
  }
  std::vector<double> numer(n_batches), denom(n_batches);
  for (std::size_t k = 0; k < tally.shells(); ++k) {
    const double vol = tally.volume(k);
    std::uint64_t count = 0;
    for (std::size_t b = 0; b < n_batches; ++b) {
      numer[b] = tally.weight(b, k);
      denom[b] = hist[b] * vol;
      count += tally.scores(b, k);
    }
    const Estimate e = batch_estimate(numer, denom);
    result.shells.push_back({tally.edges()[k], tally.edges()[k + 1], e.value,
                             e.std_error, count});
  }

  auto per_history = [&](auto field) {
    for (std::size_t b = 0; b < n_batches; ++b) numer[b] = field(stats[b]);
    return batch_estimate(numer, hist);
  };
  result.collisions_per_history =
      per_history([](const BatchStats& s) { return s.collision_weight; });
  result.absorbed_per_history =
      per_history([](const BatchStats& s) { return s.absorbed_weight; });
  result.first_flight_second_moment =
      per_history([](const BatchStats& s) { return s.first_flight_sq; });
  for (std::size_t b = 0; b < n_batches; ++b) {
    numer[b] = static_cast<double>(stats[b].zero_flights);
    denom[b] = static_cast<double>(stats[b].flights);
    result.total_collisions += stats[b].collisions;
    result.faults += stats[b].faults;
    result.capped += stats[b].capped;
  }
  result.zero_length_fraction = batch_estimate(numer, denom);
  return result;
}

ScalarFluxEstimate scalar_flux_from_collisions(const TallyResult& result,
                                               const CrossSections& xs) {
  ScalarFluxEstimate out;
  out.nonclassical = result.config.model != ModelKind::Classical;
  const double scale = out.nonclassical ? 1.0 : 1.0 / xs.sigma_t();
  out.values.reserve(result.shells.size());
  for (const auto& s : result.shells) {
    out.values.push_back({s.mean * scale, s.std_error * scale});
  }
  return out;
}

}  // namespace nonclassical
