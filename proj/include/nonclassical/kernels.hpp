#pragma once

#include <array>
#include <string_view>
#include <vector>

namespace nonclassical {

/// Distance-to-collision law. Classical is the exponential law of ordinary
/// transport; the others reproduce diffusion, SP2 and SP3 exactly in an
/// infinite homogeneous medium.
enum class ModelKind { Classical, Diffusion, SP2, SP3 };

inline constexpr std::array<ModelKind, 4> kAllModels{
    ModelKind::Classical, ModelKind::Diffusion, ModelKind::SP2, ModelKind::SP3};

std::string_view to_string(ModelKind kind);

/// Accepts "classical", "diffusion", "sp2", "sp3" (case-insensitive).
/// Throws std::invalid_argument otherwise.
ModelKind parse_model_kind(std::string_view name);

class CrossSections {
 public:
  /// Requires sigma_t > 0 and 0 <= sigma_s < sigma_t.
  CrossSections(double sigma_t, double sigma_s);

  double sigma_t() const { return sigma_t_; }
  double sigma_s() const { return sigma_s_; }
  double sigma_a() const { return sigma_t_ - sigma_s_; }
  double scattering_ratio() const { return sigma_s_ / sigma_t_; }

 private:
  double sigma_t_;
  double sigma_s_;
};

/// Constants of the two-exponential SP3 scalar-flux Green's function.
struct Sp3Constants {
  double lambda_plus;
  double lambda_minus;
  double a_plus;
  double a_minus;
  double amp_plus;   // A+
  double amp_minus;  // A-
};

/// Roots of 3 l^4 - 30 l^2 + 35 = 0, the G2/G0 coupling ratios and the
/// amplitudes fixed by the point-source jump conditions.
Sp3Constants solve_sp3_constants();

/// One term w * (Σt s) * Σt * exp(-k Σt s) of the continuous density.
/// Diffusion, SP2 and SP3 are all sums of such terms.
struct ErlangTerm {
  double weight;
  double rate;
};

/// Immutable distance-to-collision distribution for one model and medium.
///
/// The continuous part of p(s) is returned by density(); SP2 additionally
/// carries a probability mass at s = 0 which is reported by atom_at_zero()
/// and included in cdf(), never in density().
class PathLengthModel {
 public:
  PathLengthModel(ModelKind kind, CrossSections xs);

  ModelKind kind() const { return kind_; }
  const CrossSections& cross_sections() const { return xs_; }
  double sigma_t() const { return xs_.sigma_t(); }
  double atom_at_zero() const { return atom_; }

  /// Empty for Classical.
  const std::vector<ErlangTerm>& terms() const { return terms_; }

  /// Only meaningful for SP3.
  const Sp3Constants& sp3() const { return sp3_; }

  /// Continuous part of p(s), s >= 0.
  double density(double s) const;

  /// Σt(s) = p(s) / (1 - cdf(s)) for s > 0. The SP2 mass at the origin is
  /// distributional and has no finite hazard, so s = 0 is rejected.
  double hazard(double s) const;

  /// Right limit of the hazard at s = 0 (continuous part only).
  double hazard_at_zero_limit() const;

  /// P(distance <= s), including the atom at zero.
  double cdf(double s) const;

  /// 1 - cdf(s), evaluated without cancellation for large s.
  double survival(double s) const;

  /// Closed-form k-th moment of the distance to collision, k in {1, 2}.
  double moment(int order) const;

  double mean_free_path() const { return moment(1); }

 private:
  ModelKind kind_;
  CrossSections xs_;
  double atom_ = 0.0;
  std::vector<ErlangTerm> terms_;
  Sp3Constants sp3_{};
};

PathLengthModel make_model(ModelKind kind, CrossSections xs);

}  // namespace nonclassical
