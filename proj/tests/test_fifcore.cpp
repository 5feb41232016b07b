#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <sstream>

#include "fif/fifcore.hpp"
#include "oracles.hpp"

using namespace fif;
using expr::parse;

namespace {

constexpr double kPi = 3.141592653589793;

std::vector<Expr> consts(std::size_t n, double c) { return std::vector<Expr>(n, Expr::constant(c)); }

AlphaFractalSystem sin_system(double alpha) {
  return make_system(Partition({0, 0.5, 1}), parse("sin(3.141592653589793*x)"), parse("0"), consts(2, alpha));
}

oracle::Recursion sin_oracle(double alpha) {
  return {0.0, 1.0, 2, [alpha](std::size_t, double) { return alpha; },
          [alpha](std::size_t j, double u) { return std::sin(kPi * (0.5 * u + 0.5 * double(j))) - alpha * 0.0; },
          [](double x) { return std::sin(kPi * x); }};
}

// A small corpus of alpha-fractal systems used by the property checks.
std::vector<AlphaFractalSystem> corpus() {
  std::vector<AlphaFractalSystem> out;
  out.push_back(sin_system(0.5));
  out.push_back(make_system(Partition({0, 0.25, 0.5, 0.75, 1}), parse("x^2"), parse("x"), consts(4, 0.3)));
  out.push_back(make_system(Partition({0, 0.5, 1}), parse("exp(x)"), parse("1 + (exp(1) - 1)*x^3"),
                            {parse("0.4*x"), parse("0.3*cos(x)")}));
  out.push_back(make_system(Partition({-1, 0, 1}), parse("abs(x)"), parse("1"), {parse("0.6"), parse("-0.6")}));
  return out;
}

}  // namespace

TEST_CASE("partition validation and knot ownership") {
  CHECK_THROWS_AS(Partition({0, 1}), ValidationError);
  CHECK_THROWS_AS(Partition({0, 0.5, 0.5, 1}), ValidationError);
  CHECK_THROWS_AS(Partition({0, NAN, 1}), ValidationError);
  const Partition p({0, 0.25, 0.5, 1});
  CHECK(p.locate(0.0) == 0);
  CHECK(p.locate(0.25) == 0);
  CHECK(p.locate(0.26) == 1);
  CHECK(p.locate(0.5) == 1);
  CHECK(p.locate(1.0) == 2);
  CHECK_FALSE(p.equidistant());
  CHECK(Partition({0, 0.5, 1}).equidistant());
}

TEST_CASE("affine maps from the partition") {
  const AffineMaps m = AffineMaps::from(Partition({0, 0.5, 1}));
  CHECK(m.slope == std::vector<double>{0.5, 0.5});
  CHECK(m.offset == std::vector<double>{0.0, 0.5});
  const AffineMaps t = AffineMaps::from(Partition({0, 1.0 / 3, 1}));
  CHECK(t.slope[0] == doctest::Approx(1.0 / 3));
  CHECK(t.slope[1] == doctest::Approx(2.0 / 3));
  CHECK(t.offset[1] == doctest::Approx(1.0 / 3));
  CHECK(t.apply(1, 1.0) == 1.0);
  CHECK(t.apply(0, 0.0) == 0.0);
  CHECK(t.min_slope() == doctest::Approx(1.0 / 3));
}

TEST_CASE("make_system validation") {
  const Partition p({0, 0.5, 1});
  CHECK_THROWS_WITH_AS(make_system(p, parse("sin(3.141592653589793*x)"), parse("x*0"), consts(2, 1.2)),
                       doctest::Contains("||alpha"), ValidationError);
  CHECK_THROWS_AS(make_system(p, parse("x"), parse("0"), consts(3, 0.2)), ValidationError);
  CHECK_THROWS_WITH_AS(make_system(p, parse("x"), parse("x + 0.1"), consts(2, 0.2)), doctest::Contains("join-up"),
                       ValidationError);
  const auto warn = make_system(p, parse("x"), parse("x"), consts(2, 0.2));
  CHECK_FALSE(warn.warnings().empty());
  const auto near = make_system(p, parse("x"), parse("0*x + x^2"), consts(2, 0.9995));
  CHECK_FALSE(near.warnings().empty());
}

TEST_CASE("make_classical validation and degenerate attractor") {
  const std::vector<DataPoint> data{{0, 0}, {0.5, 1}, {1, 0}};
  // q_j(x_1) = y_j - alpha y_1, q_j(x_N) = y_{j+1} - alpha y_N
  CHECK_NOTHROW(make_classical(data, consts(2, 0.3), {parse("x"), parse("1 - x")}));
  CHECK_THROWS_WITH_AS(make_classical(data, consts(2, 0.3), {parse("x + 0.2"), parse("1 - x")}),
                       doctest::Contains("join-up"), ValidationError);
  CHECK_THROWS_AS(make_classical({{0, 0}, {1, 1}}, consts(1, 0.3), {parse("x")}), ValidationError);
  CHECK_THROWS_AS(make_classical({{0, 0}, {0.5, 1}, {0.4, 0}}, consts(2, 0.3), {parse("x"), parse("1-x")}),
                  ValidationError);

  const auto lin = make_classical(data, consts(2, 0.0), {parse("x"), parse("1 - x")});
  const SampleResult r = sample_fif(lin, 64, 1e-10);
  for (std::size_t i = 0; i <= 64; ++i) {
    const double x = r.samples.x(i);
    CHECK(r.samples.values[i] == doctest::Approx(x <= 0.5 ? 2 * x : 2 - 2 * x));
  }
}

TEST_CASE("rb_apply examples") {
  const Partition p({0, 0.5, 1});
  const auto zero = make_system(p, parse("x^2"), parse("x"), consts(2, 0.0));
  const SampledFunction junk = SampledFunction::sample(parse("cos(7*x)"), {0, 1}, 256);
  const SampledFunction t = rb_apply(zero, junk);
  for (std::size_t i = 0; i <= 256; ++i) CHECK(t.values[i] == doctest::Approx(t.x(i) * t.x(i)).epsilon(1e-14));

  const auto same = make_system(p, parse("x^2"), parse("x^2"), consts(2, 0.5));
  const SampledFunction f = SampledFunction::sample(parse("x^2"), {0, 1}, 256);
  const SampledFunction tf = rb_apply(same, f);
  for (std::size_t i = 0; i <= 256; ++i) CHECK(tf.values[i] == doctest::Approx(f.values[i]).epsilon(1e-14));

  const auto sys = sin_system(0.5);
  const SampleResult fixed = sample_fif(sys, 1024, 1e-10);
  const SampledFunction again = rb_apply(sys, fixed.samples);
  for (std::size_t i = 0; i <= 1024; ++i) CHECK(std::fabs(again.values[i] - fixed.samples.values[i]) <= 1e-10);

  CHECK_THROWS_AS(rb_apply(sys, SampledFunction::sample(parse("x"), {0, 1}, 3)), ValidationError);
  CHECK_THROWS_AS(make_plan(sys, 3), ValidationError);
}

TEST_CASE("sample_fif examples") {
  const auto zero = make_system(Partition({0, 0.5, 1}), parse("sin(x)"), parse("sin(1)*x"), consts(2, 0.0));
  const SampleResult z = sample_fif(zero, 512, 1e-8);
  CHECK(z.iterations == 1);
  CHECK(z.samples.error == 0.0);
  for (std::size_t i = 0; i <= 512; ++i) CHECK(z.samples.values[i] == doctest::Approx(std::sin(z.samples.x(i))));

  const auto sys = sin_system(0.5);
  const SampleResult r = sample_fif(sys, 1 << 12, 1e-8);
  CHECK(r.samples.error <= 1e-8);
  CHECK(r.iterations <= r.iteration_bound);
  const auto ref = sin_oracle(0.5);
  double worst = 0;
  for (std::size_t i = 0; i <= (1u << 12); i += 7) {
    worst = std::max(worst, std::fabs(r.samples.values[i] - ref(r.samples.x(i), 60)));
  }
  CHECK(worst <= 2e-8);
  for (double knot : {0.0, 0.5, 1.0}) {
    const std::size_t i = std::size_t(knot * (1 << 12));
    CHECK(std::fabs(r.samples.values[i] - std::sin(kPi * knot)) <= 1e-8);
  }
  CHECK_THROWS_AS(sample_fif(sys, 1 << 12, 0.0), ValidationError);
}

TEST_CASE("unaligned grids interpolate and stay certified") {
  // L_j^{-1} of a grid point on {0, 1/3, 1} is not a grid point.
  const auto sys = make_system(Partition({0, 1.0 / 3, 1}), parse("x*(1-x)"), parse("0"), consts(2, 0.3));
  const SampleResult r = sample_fif(sys, 3000, 1e-9);
  std::function<double(double, int)> g = [&](double x, int depth) -> double {
    const double f = x * (1 - x);
    if (depth == 0) return f;
    const double u = x <= 1.0 / 3 ? 3 * x : (x - 1.0 / 3) * 1.5;
    return f + 0.3 * (g(u, depth - 1) - 0.0);
  };
  double worst = 0;
  for (std::size_t i = 0; i <= 3000; i += 11) worst = std::max(worst, std::fabs(r.samples.values[i] - g(r.samples.x(i), 40)));
  CHECK(worst <= r.samples.error + 1e-12);
  CHECK(r.samples.error < 1e-3);
}

TEST_CASE("eval_fif examples") {
  const auto sys = sin_system(0.5);
  for (double knot : {0.0, 0.5, 1.0}) {
    for (std::size_t k : {0u, 5u, 40u}) CHECK(eval_fif(sys, knot, k).value == doctest::Approx(std::sin(kPi * knot)));
  }
  const auto zero = make_system(Partition({0, 0.5, 1}), parse("sin(x)"), parse("sin(1)*x"), consts(2, 0.0));
  for (double x : {0.1, 0.37, 0.9}) CHECK(eval_fif(zero, x, 17).value == doctest::Approx(std::sin(x)));

  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> xd(0, 1);
  const double bound = sys.scaling_sup() / (1 - sys.scaling_sup()) * sys.germ_base_gap();
  for (int k = 0; k < 100; ++k) {
    const double x = xd(rng);
    const double d = std::fabs(eval_fif(sys, x, 30).value - eval_fif(sys, x, 60).value);
    CHECK(d <= std::pow(0.5, 30) * bound * (1 + 1e-9));
    CHECK(eval_fif(sys, x, 30).error <= std::pow(0.5, 30) * bound * (1 + 1e-9));
  }
  CHECK_THROWS_AS(eval_fif(sys, 1.5, 3), ValidationError);
}

TEST_CASE("shared knots: left and right branches agree") {
  for (const auto& sys : corpus()) {
    const SampleResult r = sample_fif(sys, 1 << 12, 1e-10);
    const auto& s = r.samples;
    auto at = [&](double x) { return s.values[std::size_t(std::llround((x - s.domain.lo) / s.step()))]; };
    const Interval iv = sys.domain();
    for (std::size_t n = 1; n + 1 < sys.partition().size(); ++n) {
      // knot x_n is L_{n-1}(x_N) and L_n(x_1)
      const double left = sys.scaling()[n - 1](iv.hi) * at(iv.hi) + sys.offset(n - 1, iv.hi);
      const double right = sys.scaling()[n](iv.lo) * at(iv.lo) + sys.offset(n, iv.lo);
      CHECK(left == doctest::Approx(right).epsilon(1e-12));
    }
  }
}

TEST_CASE("uniform bound") {
  CHECK(uniform_bound(1.0, 0.5, 1.0) == 2.0);
  CHECK(uniform_bound(1.5, 0.0, 3.0) == 1.5);
  const auto same = make_system(Partition({0, 0.5, 1}), parse("x^2"), parse("x^2"), consts(2, 0.5));
  CHECK(same.bound() == doctest::Approx(1.0));
  const auto zero = make_system(Partition({0, 0.5, 1}), parse("x^2"), parse("x"), consts(2, 0.0));
  CHECK(zero.bound() == doctest::Approx(1.0));
}

TEST_CASE("metric contraction hypothesis") {
  const Partition p({0, 0.5, 1});
  const auto c = make_system(p, parse("x^2"), parse("x"), consts(2, 0.7));
  CHECK(check_metric_contraction(c).verdict == Verdict::pass);

  // ||f|| = 1, ||f - b|| = 1.5, ||alpha|| = 0.4 -> M = 1 + 0.4/0.6 * 1.5 = 2
  const auto lin = make_system(p, parse("1"), parse("1 - 6*x*(1-x)"), {parse("0.4*x"), parse("0.4*x")});
  CHECK(lin.bound() == doctest::Approx(2.0));
  const ConditionReport r = check_metric_contraction(lin, 1, 1);
  CHECK(r.constant("k_alpha_1").value() == doctest::Approx(0.4));
  CHECK(r.lhs == doctest::Approx(2.1));
  CHECK(r.verdict == Verdict::fail);
  const ConditionReport wide = check_metric_contraction(lin, 100, 1);
  CHECK(wide.lhs == doctest::Approx(0.516));
  CHECK(wide.verdict == Verdict::pass);
  CHECK_THROWS_AS(check_metric_contraction(lin, 0, 1), ValidationError);
}

TEST_CASE("property: fixed point, interpolation and perturbation bounds on the corpus") {
  const double tol = 1e-8;
  for (const auto& sys : corpus()) {
    const SampleResult r = sample_fif(sys, 1 << 12, tol);
    const auto& s = r.samples;
    const Interval iv = sys.domain();
    const std::size_t grid = s.grid_size();
    // residual of the self-referential equation at grid points whose preimage is a grid point
    double residual = 0;
    for (std::size_t i = 0; i <= grid; ++i) {
      const double x = s.x(i);
      const std::size_t j = sys.partition().locate(x);
      const double u = sys.maps().inverse(j, x);
      const double pos = (u - iv.lo) / s.step();
      if (std::fabs(pos - std::round(pos)) > 1e-9) continue;
      const double gu = s.values[std::size_t(std::llround(pos))];
      residual = std::max(residual, std::fabs(s.values[i] - sys.scaling()[j](u) * gu - sys.offset(j, u)));
    }
    CHECK(residual <= 3 * tol);

    const auto* a = &sys;
    for (double knot : sys.partition().knots()) {
      const std::size_t i = std::size_t(std::llround((knot - iv.lo) / s.step()));
      CHECK(std::fabs(s.values[i] - a->germ()(knot)) <= tol);
    }
    double dev = 0, top = 0;
    for (std::size_t i = 0; i <= grid; ++i) {
      dev = std::max(dev, std::fabs(s.values[i] - a->germ()(s.x(i))));
      top = std::max(top, std::fabs(s.values[i]));
    }
    const double A = sys.scaling_sup();
    CHECK(dev <= A / (1 - A) * a->germ_base_gap() + tol);
    CHECK(top <= sys.bound() + tol);

    const SampleResult again = sample_fif(sys, 1 << 12, tol);
    CHECK(again.samples.values == s.values);

    for (std::size_t i = 0; i <= grid; i += 97) {
      CHECK(std::fabs(eval_fif(sys, s.x(i), r.iterations).value - s.values[i]) <= 2 * tol);
    }
  }
}

TEST_CASE("sample CSV round trip") {
  const SampleResult r = sample_fif(sin_system(0.3), 64, 1e-9);
  std::stringstream ss;
  write_csv(ss, r.samples);
  CHECK(ss.str().rfind("x,value,err\n", 0) == 0);
  const SampledFunction back = read_csv(ss);
  CHECK(back.values == r.samples.values);
  CHECK(back.error == r.samples.error);
  CHECK(back.domain.lo == 0.0);
  CHECK(back.domain.hi == 1.0);
  std::stringstream bad("x,value,err\n0,1,0\n");
  CHECK_THROWS_AS(read_csv(bad), ValidationError);
}
