#include "fif/report.hpp"

#include <cmath>

namespace fif {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
    case Verdict::indeterminate: return "indeterminate";
  }
  return "indeterminate";
}

void ConditionReport::set(std::string name, double value) {
  for (auto& [k, v] : constants) {
    if (k == name) {
      v = value;
      return;
    }
  }
  constants.emplace_back(std::move(name), value);
}

std::optional<double> ConditionReport::constant(const std::string& name) const {
  for (const auto& [k, v] : constants) {
    if (k == name) return v;
  }
  return std::nullopt;
}

void decide(ConditionReport& report, double lhs, double rhs) {
  report.lhs = lhs;
  report.rhs = rhs;
  if (!std::isfinite(lhs) || std::isnan(rhs)) {
    report.verdict = Verdict::indeterminate;
    return;
  }
  report.verdict = kSafetyFactor * lhs < rhs ? Verdict::pass : Verdict::fail;
}

}  // namespace fif
