#include "fif/fifcore.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

namespace fif {

namespace {

constexpr double kJoinUpTol = 1e-9;
constexpr double kSnapTol = 1e-8;  // in grid-index units

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

bool same_domain(Interval a, Interval b) {
  const double scale = std::max({1.0, std::fabs(a.lo), std::fabs(a.hi)});
  return std::fabs(a.lo - b.lo) <= 1e-12 * scale && std::fabs(a.hi - b.hi) <= 1e-12 * scale;
}

// Grid index of `x` if it lies on the grid (within kSnapTol), else -1.
long snap_index(double x, Interval iv, std::size_t grid) {
  const double t = (x - iv.lo) / iv.length() * static_cast<double>(grid);
  const double r = std::round(t);
  if (std::fabs(t - r) <= kSnapTol && r >= 0 && r <= static_cast<double>(grid)) return static_cast<long>(r);
  return -1;
}

}  // namespace

// ---------------------------------------------------------------------------
// Partition, AffineMaps

Partition::Partition(std::vector<double> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 3) throw ValidationError("partition needs at least 3 knots, got " + std::to_string(knots_.size()));
  for (std::size_t n = 0; n < knots_.size(); ++n) {
    if (!std::isfinite(knots_[n])) throw ValidationError("partition knot " + std::to_string(n + 1) + " is not finite");
    if (n > 0 && !(knots_[n] > knots_[n - 1])) {
      throw ValidationError("partition knots must be strictly increasing (x_" + std::to_string(n) + " = " +
                            num(knots_[n - 1]) + ", x_" + std::to_string(n + 1) + " = " + num(knots_[n]) + ")");
    }
  }
}

bool Partition::equidistant(double rel_tol) const {
  const double h = (knots_.back() - knots_.front()) / static_cast<double>(intervals());
  for (std::size_t n = 1; n < knots_.size(); ++n) {
    if (std::fabs(knots_[n] - knots_[n - 1] - h) > rel_tol * std::fabs(h)) return false;
  }
  return true;
}

std::size_t Partition::locate(double x) const {
  // first j with x <= x_{j+1}
  const auto it = std::lower_bound(knots_.begin() + 1, knots_.end() - 1, x);
  return static_cast<std::size_t>(it - (knots_.begin() + 1));
}

AffineMaps AffineMaps::from(const Partition& p) {
  AffineMaps m;
  const double x1 = p[0];
  const double length = p.domain().length();
  for (std::size_t j = 0; j < p.intervals(); ++j) {
    const double a = (p[j + 1] - p[j]) / length;
    m.slope.push_back(a);
    m.offset.push_back(p[j] - a * x1);
  }
  return m;
}

double AffineMaps::min_slope() const { return *std::min_element(slope.begin(), slope.end()); }

// ---------------------------------------------------------------------------
// SampledFunction

double SampledFunction::x(std::size_t i) const {
  if (i == grid_size()) return domain.hi;
  return domain.lo + step() * static_cast<double>(i);
}

SampledFunction SampledFunction::sample(const Expr& e, Interval iv, std::size_t grid) {
  if (grid < 1) throw ValidationError("sample grid needs at least one step");
  SampledFunction g{iv, std::vector<double>(grid + 1), 0.0};
  for (std::size_t i = 0; i <= grid; ++i) g.values[i] = e(g.x(i));
  return g;
}

void write_csv(std::ostream& out, const SampledFunction& g) {
  out << "x,value,err\n";
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    out << num(g.x(i)) << ',' << num(g.values[i]) << ',' << num(g.error) << '\n';
  }
}

SampledFunction read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("x,value", 0) != 0) throw ValidationError("sample CSV: missing header");
  std::vector<double> xs;
  SampledFunction g;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell[3];
    for (auto& c : cell) std::getline(row, c, ',');
    try {
      xs.push_back(std::stod(cell[0]));
      g.values.push_back(std::stod(cell[1]));
      if (!cell[2].empty()) g.error = std::max(g.error, std::stod(cell[2]));
    } catch (const std::exception&) {
      throw ValidationError("sample CSV: malformed row '" + line + "'");
    }
  }
  if (xs.size() < 2) throw ValidationError("sample CSV: need at least two rows");
  g.domain = {xs.front(), xs.back()};
  return g;
}

// ---------------------------------------------------------------------------
// Systems

FractalSystem::FractalSystem(Partition p, std::vector<Expr> scaling, SystemOptions opts)
    : partition_(std::move(p)), maps_(AffineMaps::from(partition_)), scaling_(std::move(scaling)), options_(opts) {
  if (scaling_.size() != partition_.intervals()) {
    throw ValidationError("scaling vector has " + std::to_string(scaling_.size()) + " entries, expected N-1 = " +
                          std::to_string(partition_.intervals()));
  }
}

void FractalSystem::finish_scaling() {
  scaling_sups_.clear();
  for (std::size_t j = 0; j < scaling_.size(); ++j) {
    const double s = expr::sup_norm(scaling_[j], domain(), options_.norm_grid);
    if (s >= 1.0) {
      throw ValidationError("scaling function alpha_" + std::to_string(j + 1) + " = " + scaling_[j].str() +
                            " has ||alpha||_inf = " + num(s) + " >= 1");
    }
    if (s >= 0.999) {
      warnings_.push_back("||alpha_" + std::to_string(j + 1) + "||_inf = " + num(s) +
                          " is within the 0.999 safety margin of 1");
    }
    scaling_sups_.push_back(s);
  }
  scaling_sup_ = *std::max_element(scaling_sups_.begin(), scaling_sups_.end());
}

AlphaFractalSystem::AlphaFractalSystem(Partition p, Expr f, Expr b, std::vector<Expr> alpha, SystemOptions opts)
    : FractalSystem(std::move(p), std::move(alpha), opts), germ_(std::move(f)), base_(std::move(b)) {
  const Interval iv = domain();
  const double f1 = germ_(iv.lo), fn = germ_(iv.hi);
  const double b1 = base_(iv.lo), bn = base_(iv.hi);
  if (std::fabs(b1 - f1) > kJoinUpTol) {
    throw ValidationError("join-up violated: b(x_1) = " + num(b1) + " but f(x_1) = " + num(f1));
  }
  if (std::fabs(bn - fn) > kJoinUpTol) {
    throw ValidationError("join-up violated: b(x_N) = " + num(bn) + " but f(x_N) = " + num(fn));
  }
  finish_scaling();
  const Expr gap = Expr::binary(expr::Op::sub, germ_, base_);
  germ_sup_ = expr::sup_norm(germ_, iv, options_.norm_grid);
  base_sup_ = expr::sup_norm(base_, iv, options_.norm_grid);
  gap_sup_ = expr::sup_norm(gap, iv, options_.norm_grid);
  if (germ_ == base_ || gap_sup_ == 0.0) warnings_.push_back("base equals germ: f^alpha = f");
  bound_ = uniform_bound(germ_sup_, scaling_sup_, gap_sup_);
  initial_gap_ = scaling_sup_ / (1.0 - scaling_sup_) * gap_sup_;
}

double AlphaFractalSystem::offset(std::size_t j, double u) const {
  return germ_(maps_.apply(j, u)) - scaling_[j](u) * base_(u);
}

AlphaFractalSystem make_system(const Partition& partition, const Expr& germ, const Expr& base,
                               const std::vector<Expr>& scaling, SystemOptions opts) {
  return AlphaFractalSystem(partition, germ, base, scaling, opts);
}

ClassicalFifSystem::ClassicalFifSystem(std::vector<DataPoint> data, std::vector<Expr> alpha, std::vector<Expr> q,
                                       SystemOptions opts)
    : FractalSystem(
          [&data] {
            std::vector<double> xs;
            for (const auto& d : data) xs.push_back(d.x);
            return Partition(std::move(xs));
          }(),
          std::move(alpha), opts),
      data_(std::move(data)),
      offsets_(std::move(q)) {
  if (offsets_.size() != partition_.intervals()) {
    throw ValidationError("offset list has " + std::to_string(offsets_.size()) + " entries, expected N-1 = " +
                          std::to_string(partition_.intervals()));
  }
  const Interval iv = domain();
  const double y1 = data_.front().y, yn = data_.back().y;
  for (std::size_t j = 0; j < offsets_.size(); ++j) {
    const double want_lo = data_[j].y - scaling_[j](iv.lo) * y1;
    const double want_hi = data_[j + 1].y - scaling_[j](iv.hi) * yn;
    const double got_lo = offsets_[j](iv.lo), got_hi = offsets_[j](iv.hi);
    if (std::fabs(got_lo - want_lo) > kJoinUpTol) {
      throw ValidationError("join-up violated: q_" + std::to_string(j + 1) + "(x_1) = " + num(got_lo) +
                            " but y_" + std::to_string(j + 1) + " - alpha_" + std::to_string(j + 1) +
                            "(x_1) y_1 = " + num(want_lo));
    }
    if (std::fabs(got_hi - want_hi) > kJoinUpTol) {
      throw ValidationError("join-up violated: q_" + std::to_string(j + 1) + "(x_N) = " + num(got_hi) +
                            " but y_" + std::to_string(j + 2) + " - alpha_" + std::to_string(j + 1) +
                            "(x_N) y_N = " + num(want_hi));
    }
  }
  finish_scaling();

  double g0_sup = 0.0;
  for (const auto& d : data_) g0_sup = std::max(g0_sup, std::fabs(d.y));
  const std::size_t n = options_.norm_grid;
  double first_step = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double x = i == n ? iv.hi : iv.lo + iv.length() * static_cast<double>(i) / static_cast<double>(n);
    const std::size_t j = partition_.locate(x);
    const double u = std::clamp(maps_.inverse(j, x), iv.lo, iv.hi);
    first_step = std::max(first_step, std::fabs(scaling_[j](u) * initial(u) + offsets_[j](u) - initial(x)));
  }
  initial_gap_ = first_step / (1.0 - scaling_sup_);
  bound_ = g0_sup + initial_gap_;
}

double ClassicalFifSystem::initial(double x) const {
  const std::size_t j = partition_.locate(x);
  const DataPoint& l = data_[j];
  const DataPoint& r = data_[j + 1];
  const double t = (x - l.x) / (r.x - l.x);
  return l.y + t * (r.y - l.y);
}

ClassicalFifSystem make_classical(const std::vector<DataPoint>& data, const std::vector<Expr>& scaling,
                                  const std::vector<Expr>& offsets, SystemOptions opts) {
  return ClassicalFifSystem(data, scaling, offsets, opts);
}

double uniform_bound(double germ_sup, double scaling_sup, double gap_sup) {
  return germ_sup + scaling_sup / (1.0 - scaling_sup) * gap_sup;
}

double uniform_bound(const FractalSystem& sys) { return sys.bound(); }

// ---------------------------------------------------------------------------
// Operator on a grid

kernels::RbPlan make_plan(const FractalSystem& sys, std::size_t grid) {
  const std::size_t n_maps = sys.map_count();
  if (grid < 2 * n_maps) {
    throw ValidationError("grid of " + std::to_string(grid) + " steps is too coarse for " + std::to_string(n_maps) +
                          " maps (need at least " + std::to_string(2 * n_maps) + ")");
  }
  const Interval iv = sys.domain();
  const Partition& part = sys.partition();
  const AffineMaps& maps = sys.maps();
  const double h = iv.length() / static_cast<double>(grid);

  // Grid points that coincide with knots are pinned to the knot value.
  std::vector<double> xs(grid + 1);
  for (std::size_t i = 0; i <= grid; ++i) xs[i] = i == grid ? iv.hi : iv.lo + h * static_cast<double>(i);
  for (std::size_t k = 0; k < part.size(); ++k) {
    if (const long idx = snap_index(part[k], iv, grid); idx >= 0) xs[static_cast<std::size_t>(idx)] = part[k];
  }

  kernels::RbPlan plan;
  plan.src.resize(grid + 1);
  plan.weight.resize(grid + 1);
  plan.coef.resize(grid + 1);
  plan.offset.resize(grid + 1);
  for (std::size_t i = 0; i <= grid; ++i) {
    const std::size_t j = part.locate(xs[i]);
    double u = std::clamp(maps.inverse(j, xs[i]), iv.lo, iv.hi);
    if (const long idx = snap_index(u, iv, grid); idx >= 0) {
      plan.src[i] = static_cast<std::size_t>(idx);
      plan.weight[i] = 1.0;
      u = xs[plan.src[i]];
    } else {
      const double t = (u - iv.lo) / h;
      std::size_t k = static_cast<std::size_t>(std::floor(t));
      double w = 1.0 - (t - static_cast<double>(k));
      if (k >= grid) {
        k = grid - 1;
        w = 0.0;
      }
      plan.src[i] = k;
      plan.weight[i] = w;
      plan.aligned = false;
    }
    plan.coef[i] = sys.scaling()[j](u);
    plan.offset[i] = sys.offset(j, u);
  }
  return plan;
}

namespace {

double contraction_of(const kernels::RbPlan& plan) {
  double a = 0.0;
  for (double c : plan.coef) a = std::max(a, std::fabs(c));
  return a;
}

// Spread of the samples that an interpolated preimage mixes, weighted by |alpha|.
double interpolation_term(const kernels::RbPlan& plan, std::span<const double> g) {
  double eta = 0.0;
  for (std::size_t i = 0; i < plan.size(); ++i) {
    if (plan.weight[i] == 1.0) continue;
    const std::size_t k = plan.src[i];
    eta = std::max(eta, std::fabs(plan.coef[i]) * std::fabs(g[k + 1] - g[k]));
  }
  return eta;
}

}  // namespace

SampledFunction rb_apply(const FractalSystem& sys, const SampledFunction& g) {
  if (!same_domain(g.domain, sys.domain())) throw ValidationError("rb_apply: sample domain differs from system domain");
  const kernels::RbPlan plan = make_plan(sys, g.grid_size());
  SampledFunction out{g.domain, std::vector<double>(g.values.size()), 0.0};
  kernels::parallel::rb_sweep(plan, g.values, out.values);
  out.error = contraction_of(plan) * g.error + (plan.aligned ? 0.0 : interpolation_term(plan, g.values));
  return out;
}

SampleResult sample_fif(const FractalSystem& sys, std::size_t grid, double tol) {
  if (!(tol > 0.0)) throw ValidationError("sample_fif: tolerance must be positive");
  const kernels::RbPlan plan = make_plan(sys, grid);
  const double a = contraction_of(plan);
  if (a >= 1.0) throw NumericError("discrete operator is not a contraction (max |alpha| = " + num(a) + ")");

  SampleResult result;
  result.contraction = a;
  const Interval iv = sys.domain();
  SampledFunction cur{iv, std::vector<double>(grid + 1), 0.0};
  for (std::size_t i = 0; i <= grid; ++i) cur.values[i] = sys.initial(cur.x(i));
  for (std::size_t k = 0; k < sys.partition().size(); ++k) {
    if (const long idx = snap_index(sys.partition()[k], iv, grid); idx >= 0) {
      cur.values[static_cast<std::size_t>(idx)] = sys.initial(sys.partition()[k]);
    }
  }
  std::vector<double> next(grid + 1);
  const double target = tol * (1.0 - a);
  double change = 0.0;
  std::size_t guard = 0;
  for (;;) {
    change = kernels::parallel::rb_sweep(plan, cur.values, next);
    cur.values.swap(next);
    ++result.iterations;
    if (result.iterations == 1) {
      if (change <= target || a == 0.0) {
        result.iteration_bound = 1;
      } else {
        result.iteration_bound =
            static_cast<std::size_t>(std::ceil(std::log(target / change) / std::log(a))) + 1;
      }
      guard = 10 * result.iteration_bound;
    }
    if (change <= target) break;
    if (result.iterations >= guard) {
      throw NumericError("fixed-point iteration did not converge within " + std::to_string(guard) +
                         " sweeps (last change " + num(change) + ", target " + num(target) + ")");
    }
  }
  cur.error = (a > 0.0 ? a / (1.0 - a) * change : 0.0);
  if (!plan.aligned) cur.error += interpolation_term(plan, cur.values) / (1.0 - a);
  result.samples = std::move(cur);
  return result;
}

PointValue eval_fif(const FractalSystem& sys, double x, std::size_t depth) {
  const Interval iv = sys.domain();
  const double slack = 1e-12 * std::max(1.0, iv.length());
  if (!(x >= iv.lo - slack && x <= iv.hi + slack)) {
    throw ValidationError("eval_fif: x = " + num(x) + " outside [" + num(iv.lo) + ", " + num(iv.hi) + "]");
  }
  std::vector<std::size_t> js(depth);
  std::vector<double> us(depth);
  double cur = std::clamp(x, iv.lo, iv.hi);
  for (std::size_t d = 0; d < depth; ++d) {
    const std::size_t j = sys.partition().locate(cur);
    cur = std::clamp(sys.maps().inverse(j, cur), iv.lo, iv.hi);
    js[d] = j;
    us[d] = cur;
  }
  double v = sys.initial(cur);
  for (std::size_t d = depth; d-- > 0;) v = sys.scaling()[js[d]](us[d]) * v + sys.offset(js[d], us[d]);
  return {v, std::pow(sys.scaling_sup(), static_cast<double>(depth)) * sys.initial_gap()};
}

ConditionReport check_metric_contraction(const FractalSystem& sys, double c1, double c2) {
  ConditionReport r;
  r.theorem = "metric_contraction";
  if (!(c1 > 0.0) || !(c2 > 0.0)) throw ValidationError("metric constants c1, c2 must be positive");
  const double m = sys.bound();
  r.set("c1", c1);
  r.set("c2", c2);
  r.set("M", m);
  double worst = 0.0;
  try {
    for (std::size_t j = 0; j < sys.map_count(); ++j) {
      const std::string tag = std::to_string(j + 1);
      const double k = expr::derivative_sup(sys.scaling()[j], sys.domain(), kEstimatorGrid);
      const double lhs = std::max(sys.maps().slope[j] + 2.0 * c2 * m * k / c1, sys.scaling_sups()[j]);
      r.set("k_alpha_" + tag, k);
      r.set("lhs_" + tag, lhs);
      worst = std::max(worst, lhs);
    }
  } catch (const DomainError& e) {
    r.verdict = Verdict::indeterminate;
    r.notes.push_back(std::string("Lipschitz estimate failed: ") + e.what());
    return r;
  }
  decide(r, worst, 1.0);
  return r;
}

}  // namespace fif
