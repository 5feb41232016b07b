#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace fif {

enum class Verdict { pass, fail, indeterminate };

const char* to_string(Verdict v);

/// Multiplier applied to estimated left-hand sides before a strict-inequality
/// hypothesis is declared to hold. Grid estimators under-approximate sups.
inline constexpr double kSafetyFactor = 1.05;

/// Evaluated hypothesis of one theorem: pass iff kSafetyFactor * lhs < rhs.
struct ConditionReport {
  std::string theorem;
  std::vector<std::pair<std::string, double>> constants;
  double lhs = 0.0;
  double rhs = 1.0;
  Verdict verdict = Verdict::indeterminate;
  std::vector<std::string> notes;

  void set(std::string name, double value);
  std::optional<double> constant(const std::string& name) const;
  bool passed() const { return verdict == Verdict::pass; }
};

/// Sets lhs/rhs and the verdict according to the safety-factor rule.
void decide(ConditionReport& report, double lhs, double rhs);

}  // namespace fif
