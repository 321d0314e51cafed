#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "nonclassical/kernels.hpp"

namespace nonclassical {

/// E1(x) = ∫_x^∞ e^{-t}/t dt for x > 0: power series for x <= 1,
/// continued fraction above.
double exp_integral_e1(double x);

/// Collision-rate density f = Σt φ0 of the classic diffusion equation for a
/// unit point source at the origin, r > 0.
double diffusion_point_source(const CrossSections& xs, double r);

/// Volume average of diffusion_point_source over the shell [r_lo, r_hi].
double diffusion_shell_average(const CrossSections& xs, double r_lo,
                               double r_hi);

/// Volume average of the uncollided (first-flight) collision density over
/// [r_lo, r_hi]; the SP2 atom counts in a shell with r_lo = 0.
double first_flight_shell_average(const PathLengthModel& model, double r_lo,
                                  double r_hi);

/// Scalar-flux Green's function G0(r) of the SP3 equations, r > 0.
double sp3_green_scalar(const CrossSections& xs, double r);

/// Radial form of the point kernel p(s)/(4π s^2): P(u) = ∫_u^∞ p(s)/s ds,
/// continuous part only. Its antiderivatives are closed-form for every
/// model, which lets the solver integrate P exactly over grid cells.
class RadialKernel {
 public:
  explicit RadialKernel(const PathLengthModel& model);

  const PathLengthModel& model() const { return model_; }
  double atom() const { return model_.atom_at_zero(); }

  /// P(u), u > 0. Diverges logarithmically at 0 for the classical law.
  double operator()(double u) const;
  /// ∫_0^u P(t) dt
  double integral(double u) const;
  /// ∫_0^u t P(t) dt
  double first_moment(double u) const;

 private:
  PathLengthModel model_;
};

/// Uniform radial nodes r_j = j h, j = 1..M, with trapezoid weights.
struct RadialGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  double r_max = 0.0;

  static RadialGrid uniform(double r_max, std::size_t points);
  double spacing() const { return r_max / static_cast<double>(nodes.size()); }
};

/// Discrete radial convolution
///   K[g](r) = atom g(r) + (1/2r) ∫_0^R r' g(r') [P(|r-r'|) - P(r+r')] dr'
/// with r' g(r') interpolated linearly between nodes.
class RadialOperator {
 public:
  RadialOperator(const RadialKernel& kernel, const RadialGrid& grid);

  std::vector<double> apply(std::span<const double> g) const;

  /// Cell-integrated weights W(row, col) with row = i - 1 for output node
  /// r_i (i = 1..M) and col = j for input node r_j (j = 0..M, r_0 = 0), such
  /// that the continuous part of K[g](r_i) is Σ_j W r_j g(r_j) / (2 r_i).
  double weight(std::size_t row, std::size_t col) const {
    return w_[row * (m_ + 1) + col];
  }
  std::size_t size() const { return m_; }

 private:
  double atom_;
  std::size_t m_;
  std::vector<double> nodes_;
  std::vector<double> w_;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, int iterations, double change)
      : std::runtime_error(what), iterations_(iterations), change_(change) {}
  int iterations() const { return iterations_; }
  double change() const { return change_; }

 private:
  int iterations_;
  double change_;
};

/// Point-source solution of f = K[c f + δ].
///
/// The density splits into a mass at the origin (SP2 only), the uncollided
/// part and the scattered part:
///   f = origin_mass δ(x) + source_strength · f1(r) + scattered(r),
/// where f1 = p(r)/(4π r^2) is the continuous first-flight density.
struct IntegralSolution {
  ModelKind model;
  double scattering_ratio;
  RadialGrid grid;
  double origin_mass = 0.0;
  double source_strength = 1.0;
  std::vector<double> first_flight;  // f1 at nodes
  /// c · source_strength · K[f1] at nodes (the once-scattered source).
  std::vector<double> scatter_source;
  std::vector<double> scattered;
  int iterations = 0;
  double last_change = 0.0;

  /// Regular part of f at node j.
  double density(std::size_t j) const {
    return source_strength * first_flight[j] + scattered[j];
  }
  std::vector<double> density() const;
};

inline constexpr double kDefaultSolverTolerance = 1e-10;
inline constexpr std::size_t kDefaultGridPoints = 512;
inline constexpr double kDefaultGridRadius = 12.0;  // mean free paths

/// Source iteration on the scattered part, converging geometrically with
/// ratio <= c. Throws ConvergenceError after ceil(ln tol / ln c) + 50 sweeps.
IntegralSolution solve_integral_equation(const PathLengthModel& model,
                                         const RadialGrid& grid,
                                         double tol = kDefaultSolverTolerance);

/// max_j |scattered - scatter_source - c K[scattered]| / max_j |scattered|.
double fixed_point_residual(const IntegralSolution& sol,
                            const PathLengthModel& model);

/// Volume average of the full solution over [r_lo, r_hi], r_hi <= grid end.
double shell_average(const IntegralSolution& sol, const PathLengthModel& model,
                     double r_lo, double r_hi);

/// ∫ f dV over the grid, including the origin mass.
double total_collision_rate(const IntegralSolution& sol,
                            const PathLengthModel& model);

}  // namespace nonclassical
