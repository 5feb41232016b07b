#pragma once

// Data-parallel inner loops. Each kernel has a serial reference in
// `kernels::serial` and an OpenMP version in `kernels::parallel` with the same
// contract. Max/min reductions agree bit-for-bit between the two; sums agree
// up to summation order.

#include <cstddef>
#include <span>
#include <vector>

namespace fif::kernels {

/// One Read-Bajraktarevic sweep on a fixed grid:
///   out[i] = coef[i] * (weight[i] * in[src[i]] + (1 - weight[i]) * in[src[i] + 1]) + offset[i]
/// weight[i] == 1 when the preimage of grid point i is itself a grid point.
struct RbPlan {
  std::vector<std::size_t> src;
  std::vector<double> weight;
  std::vector<double> coef;
  std::vector<double> offset;
  bool aligned = true;

  std::size_t size() const { return src.size(); }
};

namespace serial {

/// Applies the plan; returns max_i |out[i] - in[i]|.
double rb_sweep(const RbPlan& plan, std::span<const double> in, std::span<double> out);

/// ranges[k] = max - min of v over the closed block [k*block, (k+1)*block].
void block_ranges(std::span<const double> v, std::size_t block, std::span<double> ranges);

/// max over dyadic separations d = 1, 2, 4, ... of |v[i+d] - v[i]| / (d*h)^s.
double dyadic_hoelder(std::span<const double> v, double h, double s);

/// For each ladder reach D (in samples), min over i of
///   max over offsets d <= D (dyadic, plus D itself), both directions, of |v[i] - v[i+-d]| / (d*h)^s,
/// then min over the ladder.
double lower_oscillation(std::span<const double> v, double h, double s, std::span<const std::size_t> reaches);

double total_variation(std::span<const double> v);

}  // namespace serial

namespace parallel {

double rb_sweep(const RbPlan& plan, std::span<const double> in, std::span<double> out);
void block_ranges(std::span<const double> v, std::size_t block, std::span<double> ranges);
double dyadic_hoelder(std::span<const double> v, double h, double s);
double lower_oscillation(std::span<const double> v, double h, double s, std::span<const std::size_t> reaches);
double total_variation(std::span<const double> v);

}  // namespace parallel

}  // namespace fif::kernels
