#pragma once

// Box-counting estimates, Moran-equation Hausdorff bounds and theorem
// verdicts on predicted graph dimensions.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fif/fifcore.hpp"
#include "fif/regularity.hpp"
#include "fif/report.hpp"

namespace fif {

struct DimensionEstimate {
  std::vector<unsigned> levels;        // m, delta = |I| 2^-m
  std::vector<double> deltas;
  std::vector<std::uint64_t> counts;   // N_delta
  double slope = 0.0;                  // least squares of log N against -log delta
  double intercept = 0.0;
  double residual = 0.0;               // max |log N - fit|

  double dimension() const { return slope; }
  /// Counts nondecreasing as delta shrinks and slope within [0.95, 2.05].
  bool plausible() const;
};

/// Column-anchored count: sum over the 2^m columns of 1 + floor(range / delta).
/// delta must be |I| / 2^m, each column must hold >= 8 sample steps and the
/// sample error must not exceed delta / 10.
std::uint64_t box_count(const SampledFunction& g, double delta);
std::uint64_t box_count_level(const SampledFunction& g, unsigned m);

/// Requires m_max >= m_min + 3.
DimensionEstimate box_dimension(const SampledFunction& g, unsigned m_min, unsigned m_max);

/// CSV `m,delta,count,log_count`.
void write_csv(std::ostream& out, const DimensionEstimate& est);

struct MoranSolution {
  std::vector<double> ratios;
  double exponent = 0.0;   // s with sum r_i^s = 1
  double residual = 0.0;   // |sum r_i^s - 1|
  unsigned iterations = 0;
};

/// Bisection for sum r_i^s = 1. Needs k >= 2 ratios, each in (0, 1).
MoranSolution moran_solve(std::span<const double> ratios);

struct HausdorffBounds {
  MoranSolution lower;  // from the lower bi-Lipschitz ratios r_i
  MoranSolution upper;  // from the upper ratios R_i
};

/// Requires 0 < r_i <= R_i < 1 componentwise.
HausdorffBounds hausdorff_bounds(std::span<const double> lower, std::span<const double> upper);

struct BiLipschitzEstimate {
  std::vector<double> lower;       // min distortion ratio per map
  std::vector<double> upper;       // max distortion ratio per map
  std::vector<bool> degenerate;    // lower ratio ~ 0 (the map collapses some direction)
  std::size_t pairs = 0;
  /// Every map has 0 < r_j and R_j < 1 on the sample.
  bool hypothesis_holds() const;
};

/// Empirical distortion of W_j(x, y) = (L_j(x), alpha_j(x) y + q_j(x)) over
/// random point pairs in I x [-M, M]. A third of the pairs share x and a third
/// share y so axis directions are always probed.
BiLipschitzEstimate estimate_bilipschitz(const FractalSystem& sys, std::size_t n_pairs, std::uint64_t seed = 42);

struct DimensionSettings {
  std::size_t grid = std::size_t{1} << 15;
  double tol = 1e-8;
  double s = 1.0;           // Hoelder exponent
  double beta = 0.5;        // V^beta exponent
  unsigned p = 2;           // oscillation base
  unsigned osc_m_max = 12;
  unsigned m_min = 4;       // box-count ladder
  unsigned m_max = 11;
};

enum class Agreement { agree, disagree, not_asserted };
const char* to_string(Agreement a);

struct Prediction {
  double lo = 0.0;
  double hi = 0.0;
};

struct TheoremVerdict {
  std::string theorem;
  ConditionReport hypothesis;
  std::optional<Prediction> prediction;
  double estimate = 0.0;
  double tolerance = 0.0;
  Agreement agreement = Agreement::not_asserted;
  std::vector<std::string> notes;

  /// Indeterminate unless the hypothesis passed; then pass or fail by agreement
  /// with the prediction (pass when the theorem predicts nothing numeric).
  Verdict verdict() const;
};

/// Shared artefacts of one construction: samples of f^alpha and their box estimate.
struct Construction {
  SampleResult sampled;
  DimensionEstimate boxdim;
};

Construction construct(const FractalSystem& sys, const DimensionSettings& settings);

/// Hypothesis of the exact box-dimension theorem
///   ||alpha||_H < a^s min{1, (K_f - (||b|| + M) k_alpha a^-s) / (k_{f^alpha} + k_b)}
/// with every constant estimated from samples; when it holds, 2 - s is compared
/// with the box estimate at tolerance 0.1.
TheoremVerdict exact_boxdim_verdict(const FractalSystem& sys, const DimensionSettings& settings,
                                    const Construction& built);
TheoremVerdict exact_boxdim_verdict(const FractalSystem& sys, const DimensionSettings& settings);

/// Constructs f^alpha once, measures its box dimension once, and emits one
/// verdict per theorem: Hoelder invariance, Hoelder sandwich, V^beta invariance,
/// exact box dimension, BV and AC dimension one.
std::vector<TheoremVerdict> dimension_report(const FractalSystem& sys, const DimensionSettings& settings,
                                             const Construction& built);
std::vector<TheoremVerdict> dimension_report(const FractalSystem& sys, const DimensionSettings& settings);

}  // namespace fif
