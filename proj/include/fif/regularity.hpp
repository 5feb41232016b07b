#pragma once

// Oscillation, V^beta, Hoelder, bounded-variation and absolute-continuity
// functionals on sampled data, and the regularity-invariance hypotheses for
// alpha-fractal systems. All sups over infinite sets are grid maxima.

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "fif/fifcore.hpp"
#include "fif/report.hpp"

namespace fif {

struct OscillationLevel {
  unsigned m = 0;
  double osc = 0.0;             // Osc(m, g) = sum of ranges
  std::vector<double> ranges;   // R_g(Q) for the p^m p-adic intervals, left to right
};

struct OscillationProfile {
  unsigned p = 2;
  std::vector<OscillationLevel> levels;  // m = 1..m_max
};

/// Same samples reparametrized onto [0, 1].
SampledFunction rescale(const SampledFunction& g);

/// Level m of the oscillation profile. The grid size must be divisible by p^m.
/// The abscissa is rescaled to [0, 1] implicitly.
OscillationLevel oscillation(const SampledFunction& g, unsigned p, unsigned m);
OscillationProfile oscillation_profile(const SampledFunction& g, unsigned p, unsigned m_max);

/// CSV `m,osc,normalized` with normalized = Osc / p^{m (1 - beta)}.
void write_csv(std::ostream& out, const OscillationProfile& profile, double beta);

/// Least-squares slope of log_p Osc(m) against m; Osc ~ p^{m (1 - exponent)}.
/// Returns 1 - slope, the observed oscillation exponent.
double observed_osc_exponent(const OscillationProfile& profile);

/// max over m = 1..m_max of Osc(m, g) / p^{m (1 - beta)}.
double vbeta_seminorm(const SampledFunction& g, double beta, unsigned p, unsigned m_max);
/// ||g||_inf + vbeta_seminorm.
double vbeta_norm(const SampledFunction& g, double beta, unsigned p, unsigned m_max);

double sup_norm(const SampledFunction& g);

/// k_j with a_j = p^{-k_j} for every map, or nullopt when the partition is not p-adic.
std::optional<std::vector<unsigned>> padic_exponents(const AffineMaps& maps, unsigned p);

struct DecompositionCheck {
  Verdict verdict = Verdict::indeterminate;
  double total = 0.0;  // Osc(m, g)
  double split = 0.0;  // sum_j Osc(m, g, L_j(I))
};

/// Osc(m, g) = sum_j Osc(m, g, L_j(I)) for p-adic partitions and m >= max k_j,
/// checked to 1e-12 relative. Indeterminate when the hypothesis does not hold.
DecompositionCheck osc_decomposition_check(const SampledFunction& g, const FractalSystem& sys, unsigned p,
                                           unsigned m);

/// max{||alpha||_inf + sum_j sup_m Osc(m, alpha_j)/p^{m(1-beta)}, sum_j ||alpha_j||_inf} < 1.
ConditionReport vbeta_invariance_check(const FractalSystem& sys, double beta, unsigned p, unsigned m_max);

/// Largest quotient |g(x) - g(y)| / |x - y|^s over sample pairs at dyadic separations.
double hoelder_seminorm(const SampledFunction& g, double s);

/// ||alpha||_H / a^s < 1 with ||alpha||_H = ||alpha||_inf + [alpha]_s.
ConditionReport hoelder_invariance_check(const FractalSystem& sys, double s);

/// Largest K such that every sample x has some sampled y within each ladder
/// distance delta with |g(x) - g(y)| >= K |x - y|^s.
double lower_oscillation_constant(const SampledFunction& g, double s, std::span<const double> deltas);

/// Sum of |g_{i+1} - g_i|; exact for piecewise-monotone g given enough samples.
double total_variation(const SampledFunction& g);

/// |e(lo)| + integral of |e'| by composite Simpson over 2^12 panels.
/// Throws DomainError when e' cannot be evaluated on the quadrature nodes.
double ac_norm(const Expr& e, Interval iv);

/// ||alpha||_BV < 1 / (2 (N - 1)),  ||g||_BV = |g(x_1)| + V(g, I).
ConditionReport bv_invariance_check(const FractalSystem& sys);

/// ||alpha||_AC < a / (2 (N - 1)),  ||g||_AC = |g(x_1)| + integral |g'|.
ConditionReport ac_invariance_check(const FractalSystem& sys);

}  // namespace fif
