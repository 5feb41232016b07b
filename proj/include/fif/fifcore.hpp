#pragma once

// alpha-fractal functions and classical fractal interpolation functions.
//
// Both are fixed points of a Read-Bajraktarevic operator of the form
//   g(L_j(u)) = alpha_j(u) g(u) + q_j(u),   u in I, j = 0..N-2,
// with L_j(x) = a_j x + b_j mapping I onto the j-th subinterval. For the
// alpha-fractal function q_j(u) = f(L_j(u)) - alpha_j(u) b(u).

#include <cstddef>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fif/expr.hpp"
#include "fif/kernels.hpp"
#include "fif/report.hpp"

namespace fif {

class Partition {
 public:
  /// Throws ValidationError unless there are at least 3 strictly increasing finite knots.
  explicit Partition(std::vector<double> knots);

  std::size_t size() const { return knots_.size(); }
  std::size_t intervals() const { return knots_.size() - 1; }
  double operator[](std::size_t n) const { return knots_[n]; }
  const std::vector<double>& knots() const { return knots_; }
  Interval domain() const { return {knots_.front(), knots_.back()}; }
  bool equidistant(double rel_tol = 1e-12) const;

  /// Index j of the subinterval [x_j, x_{j+1}] owning x. Shared knots belong to
  /// the left subinterval, except the first knot which belongs to j = 0.
  std::size_t locate(double x) const;

 private:
  std::vector<double> knots_;
};

/// L_j(x) = slope[j] * x + offset[j] with L_j(x_1) = x_j, L_j(x_N) = x_{j+1}.
struct AffineMaps {
  std::vector<double> slope;
  std::vector<double> offset;

  static AffineMaps from(const Partition& p);

  std::size_t size() const { return slope.size(); }
  double min_slope() const;
  double apply(std::size_t j, double x) const { return slope[j] * x + offset[j]; }
  double inverse(std::size_t j, double x) const { return (x - offset[j]) / slope[j]; }
};

/// Values on the uniform grid lo + i (hi - lo) / G, i = 0..G, with a uniform error bound.
struct SampledFunction {
  Interval domain;
  std::vector<double> values;
  double error = 0.0;

  std::size_t grid_size() const { return values.empty() ? 0 : values.size() - 1; }
  double step() const { return domain.length() / static_cast<double>(grid_size()); }
  double x(std::size_t i) const;
  std::span<const double> view() const { return values; }

  static SampledFunction sample(const Expr& e, Interval iv, std::size_t grid);
};

/// CSV with header `x,value,err`, full-precision decimals.
void write_csv(std::ostream& out, const SampledFunction& g);
SampledFunction read_csv(std::istream& in);

struct SystemOptions {
  /// Grid steps used for every cached sup-norm estimate.
  std::size_t norm_grid = std::size_t{1} << 16;
};

/// Common interface of the two system kinds. Immutable after construction.
class FractalSystem {
 public:
  virtual ~FractalSystem() = default;

  const Partition& partition() const { return partition_; }
  const AffineMaps& maps() const { return maps_; }
  Interval domain() const { return partition_.domain(); }
  std::size_t map_count() const { return maps_.size(); }
  const std::vector<Expr>& scaling() const { return scaling_; }

  /// Per-map grid estimates of ||alpha_j||_inf and their max ||alpha||_inf.
  const std::vector<double>& scaling_sups() const { return scaling_sups_; }
  double scaling_sup() const { return scaling_sup_; }

  /// Uniform bound M on the fixed point.
  double bound() const { return bound_; }
  /// Bound on ||g0 - fixed point||_inf, g0 = initial().
  double initial_gap() const { return initial_gap_; }
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// q_j(u).
  virtual double offset(std::size_t j, double u) const = 0;
  /// Starting function of the iteration (the germ for alpha-fractal systems).
  virtual double initial(double x) const = 0;
  virtual bool is_alpha_fractal() const = 0;

 protected:
  FractalSystem(Partition p, std::vector<Expr> scaling, SystemOptions opts);
  void finish_scaling();

  Partition partition_;
  AffineMaps maps_;
  std::vector<Expr> scaling_;
  SystemOptions options_;
  std::vector<double> scaling_sups_;
  double scaling_sup_ = 0.0;
  double bound_ = 0.0;
  double initial_gap_ = 0.0;
  std::vector<std::string> warnings_;
};

class AlphaFractalSystem final : public FractalSystem {
 public:
  const Expr& germ() const { return germ_; }
  const Expr& base() const { return base_; }
  double germ_sup() const { return germ_sup_; }
  double base_sup() const { return base_sup_; }
  /// ||f - b||_inf grid estimate.
  double germ_base_gap() const { return gap_sup_; }

  double offset(std::size_t j, double u) const override;
  double initial(double x) const override { return germ_(x); }
  bool is_alpha_fractal() const override { return true; }

 private:
  friend AlphaFractalSystem make_system(const Partition&, const Expr&, const Expr&, const std::vector<Expr>&,
                                        SystemOptions);
  AlphaFractalSystem(Partition p, Expr f, Expr b, std::vector<Expr> alpha, SystemOptions opts);

  Expr germ_;
  Expr base_;
  double germ_sup_ = 0.0;
  double base_sup_ = 0.0;
  double gap_sup_ = 0.0;
};

struct DataPoint {
  double x;
  double y;
};

class ClassicalFifSystem final : public FractalSystem {
 public:
  const std::vector<DataPoint>& data() const { return data_; }
  const std::vector<Expr>& offsets() const { return offsets_; }

  double offset(std::size_t j, double u) const override { return offsets_[j](u); }
  /// Piecewise-linear interpolant of the data.
  double initial(double x) const override;
  bool is_alpha_fractal() const override { return false; }

 private:
  friend ClassicalFifSystem make_classical(const std::vector<DataPoint>&, const std::vector<Expr>&,
                                           const std::vector<Expr>&, SystemOptions);
  ClassicalFifSystem(std::vector<DataPoint> data, std::vector<Expr> alpha, std::vector<Expr> q, SystemOptions opts);

  std::vector<DataPoint> data_;
  std::vector<Expr> offsets_;
};

/// Builds f^alpha_{Delta,b}. Throws ValidationError on a join-up violation,
/// ||alpha_j||_inf >= 1, or a scaling vector of the wrong length.
AlphaFractalSystem make_system(const Partition& partition, const Expr& germ, const Expr& base,
                               const std::vector<Expr>& scaling, SystemOptions opts = {});

/// Builds the classical FIF with F_j(x, y) = alpha_j(x) y + q_j(x).
ClassicalFifSystem make_classical(const std::vector<DataPoint>& data, const std::vector<Expr>& scaling,
                                  const std::vector<Expr>& offsets, SystemOptions opts = {});

/// M = ||f||_inf + ||alpha||/(1 - ||alpha||) ||f - b||_inf.
double uniform_bound(double germ_sup, double scaling_sup, double gap_sup);
double uniform_bound(const FractalSystem& sys);

/// Precomputed operator on a grid of `grid` steps over the system's domain.
/// Knots and preimages that land on grid points are used exactly; others are
/// linearly interpolated between neighbouring samples.
kernels::RbPlan make_plan(const FractalSystem& sys, std::size_t grid);

/// One application of the operator to g. Throws ValidationError when
/// G < 2 (N - 1) or g does not live on the system's domain.
SampledFunction rb_apply(const FractalSystem& sys, const SampledFunction& g);

struct SampleResult {
  SampledFunction samples;
  std::size_t iterations = 0;
  /// Iteration bound from the contraction estimate.
  std::size_t iteration_bound = 0;
  /// Exact sup-norm contraction factor of the discrete operator.
  double contraction = 0.0;
};

/// Fixed-point iteration from samples of initial() until the sup change is
/// <= tol (1 - contraction). For grid-aligned systems samples.error <= tol.
SampleResult sample_fif(const FractalSystem& sys, std::size_t grid, double tol);

struct PointValue {
  double value;
  double error;
};

/// (T^depth g0)(x) along the single preimage chain of x; O(depth).
PointValue eval_fif(const FractalSystem& sys, double x, std::size_t depth);

/// Hypothesis of the metric-contraction proposition:
///   max{a_j + 2 c2 M k_alpha_j / c1, ||alpha_j||_inf} < 1  for every j.
ConditionReport check_metric_contraction(const FractalSystem& sys, double c1 = 1.0, double c2 = 1.0);

/// Estimator grid used for expression-level Lipschitz and Hoelder constants.
inline constexpr std::size_t kEstimatorGrid = std::size_t{1} << 14;

}  // namespace fif
