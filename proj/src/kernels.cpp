#include "fif/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <omp.h>

namespace fif::kernels {

namespace {

inline double sweep_point(const RbPlan& plan, std::span<const double> in, std::size_t i) {
  const std::size_t k = plan.src[i];
  const double w = plan.weight[i];
  const double g = w == 1.0 ? in[k] : w * in[k] + (1.0 - w) * in[k + 1];
  return plan.coef[i] * g + plan.offset[i];
}

inline double block_range(std::span<const double> v, std::size_t block, std::size_t k) {
  const std::size_t first = k * block;
  const std::size_t last = std::min(first + block, v.size() - 1);
  double lo = v[first];
  double hi = v[first];
  for (std::size_t i = first + 1; i <= last; ++i) {
    lo = std::min(lo, v[i]);
    hi = std::max(hi, v[i]);
  }
  return hi - lo;
}

std::vector<std::size_t> dyadic_offsets(std::size_t limit) {
  std::vector<std::size_t> out;
  for (std::size_t d = 1; d <= limit; d *= 2) out.push_back(d);
  return out;
}

inline double separation_max(std::span<const double> v, double h, double s, std::size_t d) {
  const double scale = std::pow(static_cast<double>(d) * h, s);
  double best = 0.0;
  for (std::size_t i = 0; i + d < v.size(); ++i) best = std::max(best, std::fabs(v[i + d] - v[i]));
  return best / scale;
}

// Offsets sorted ascending; level_end[l] (ascending) is how many offsets a ladder level may use.
struct Ladder {
  std::vector<std::size_t> offsets;
  std::vector<double> scales;
  std::vector<std::size_t> level_end;
};

Ladder make_ladder(std::span<const std::size_t> reaches, double h, double s) {
  Ladder lad;
  std::size_t top = 0;
  for (std::size_t r : reaches) top = std::max(top, r);
  lad.offsets = dyadic_offsets(top);
  lad.offsets.insert(lad.offsets.end(), reaches.begin(), reaches.end());
  std::sort(lad.offsets.begin(), lad.offsets.end());
  lad.offsets.erase(std::unique(lad.offsets.begin(), lad.offsets.end()), lad.offsets.end());
  for (std::size_t d : lad.offsets) lad.scales.push_back(std::pow(static_cast<double>(d) * h, s));
  for (std::size_t r : reaches) {
    lad.level_end.push_back(static_cast<std::size_t>(
        std::upper_bound(lad.offsets.begin(), lad.offsets.end(), r) - lad.offsets.begin()));
  }
  std::sort(lad.level_end.begin(), lad.level_end.end());
  return lad;
}

// min over ladder levels of the running max quotient at sample i.
inline double point_lower(std::span<const double> v, std::size_t i, const Ladder& lad) {
  double running = 0.0;
  double result = std::numeric_limits<double>::infinity();
  std::size_t next = 0;
  for (std::size_t end : lad.level_end) {
    for (; next < end; ++next) {
      const std::size_t d = lad.offsets[next];
      double diff = 0.0;
      if (i + d < v.size()) diff = std::fabs(v[i + d] - v[i]);
      if (i >= d) diff = std::max(diff, std::fabs(v[i] - v[i - d]));
      running = std::max(running, diff / lad.scales[next]);
    }
    result = std::min(result, running);
  }
  return result;
}

}  // namespace

// ---------------------------------------------------------------------------

namespace serial {

double rb_sweep(const RbPlan& plan, std::span<const double> in, std::span<double> out) {
  double change = 0.0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    out[i] = sweep_point(plan, in, i);
    change = std::max(change, std::fabs(out[i] - in[i]));
  }
  return change;
}

void block_ranges(std::span<const double> v, std::size_t block, std::span<double> ranges) {
  for (std::size_t k = 0; k < ranges.size(); ++k) ranges[k] = block_range(v, block, k);
}

double dyadic_hoelder(std::span<const double> v, double h, double s) {
  double best = 0.0;
  for (std::size_t d : dyadic_offsets(v.size() - 1)) best = std::max(best, separation_max(v, h, s, d));
  return best;
}

double lower_oscillation(std::span<const double> v, double h, double s, std::span<const std::size_t> reaches) {
  const Ladder lad = make_ladder(reaches, h, s);
  double result = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < v.size(); ++i) result = std::min(result, point_lower(v, i, lad));
  return result;
}

double total_variation(std::span<const double> v) {
  double sum = 0.0;
  for (std::size_t i = 1; i < v.size(); ++i) sum += std::fabs(v[i] - v[i - 1]);
  return sum;
}

}  // namespace serial

// ---------------------------------------------------------------------------

namespace parallel {

double rb_sweep(const RbPlan& plan, std::span<const double> in, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(plan.size());
  double change = 0.0;
#pragma omp parallel for schedule(static) reduction(max : change)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    out[u] = sweep_point(plan, in, u);
    change = std::max(change, std::fabs(out[u] - in[u]));
  }
  return change;
}

void block_ranges(std::span<const double> v, std::size_t block, std::span<double> ranges) {
  const auto n = static_cast<std::ptrdiff_t>(ranges.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t k = 0; k < n; ++k) {
    ranges[static_cast<std::size_t>(k)] = block_range(v, block, static_cast<std::size_t>(k));
  }
}

double dyadic_hoelder(std::span<const double> v, double h, double s) {
  double best = 0.0;
  for (std::size_t d : dyadic_offsets(v.size() - 1)) {
    const double scale = std::pow(static_cast<double>(d) * h, s);
    const auto n = static_cast<std::ptrdiff_t>(v.size() - d);
    double level = 0.0;
#pragma omp parallel for schedule(static) reduction(max : level)
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const auto u = static_cast<std::size_t>(i);
      level = std::max(level, std::fabs(v[u + d] - v[u]));
    }
    best = std::max(best, level / scale);
  }
  return best;
}

double lower_oscillation(std::span<const double> v, double h, double s, std::span<const std::size_t> reaches) {
  const Ladder lad = make_ladder(reaches, h, s);
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  double result = std::numeric_limits<double>::infinity();
#pragma omp parallel for schedule(static) reduction(min : result)
  for (std::ptrdiff_t i = 0; i < n; ++i) result = std::min(result, point_lower(v, static_cast<std::size_t>(i), lad));
  return result;
}

double total_variation(std::span<const double> v) {
  const auto n = static_cast<std::ptrdiff_t>(v.size());
  double sum = 0.0;
#pragma omp parallel for schedule(static) reduction(+ : sum)
  for (std::ptrdiff_t i = 1; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    sum += std::fabs(v[u] - v[u - 1]);
  }
  return sum;
}

}  // namespace parallel

}  // namespace fif::kernels
