#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <vector>

#include <json.hpp>

#include "siamaug/common.hpp"
#include "siamaug/event_log.hpp"

namespace siamaug {

// Exact-match fraction.
inline double accuracy(std::span<const int> predictions, std::span<const int> labels) {
  if (predictions.size() != labels.size()) {
    throw ContractError("accuracy: predictions and labels differ in length");
  }
  if (predictions.empty()) throw ContractError("accuracy on empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] == labels[i]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

namespace detail {

inline double shannon_entropy(const std::map<std::vector<ActivityId>, std::uint64_t>& counts,
                              double log_base) {
  std::uint64_t total = 0;
  for (const auto& [key, count] : counts) total += count;
  if (total == 0) return 0.0;
  double h = 0.0;
  for (const auto& [key, count] : counts) {
    const double p = static_cast<double>(count) / static_cast<double>(total);
    h -= p * std::log2(p);
  }
  if (log_base != 2.0) h /= std::log2(log_base);
  return h;
}

}  // namespace detail

// Shannon entropy over whole-trace variants: how evenly the log's cases
// spread across distinct activity sequences. In bits by default.
inline double trace_entropy(const EventLog& log, double log_base = 2.0) {
  if (log.empty()) throw ContractError("trace_entropy on empty log");
  std::map<std::vector<ActivityId>, std::uint64_t> counts;
  for (const auto& t : log.traces) ++counts[t.activities()];
  return detail::shannon_entropy(counts, log_base);
}

// Shannon entropy over all prefix occurrences: a trace of length T
// contributes T prefixes, so common early behavior weighs in once per case.
inline double prefix_entropy(const EventLog& log, double log_base = 2.0) {
  if (log.empty()) throw ContractError("prefix_entropy on empty log");
  std::map<std::vector<ActivityId>, std::uint64_t> counts;
  for (const auto& t : log.traces) {
    const auto acts = t.activities();
    std::vector<ActivityId> prefix;
    prefix.reserve(acts.size());
    for (ActivityId a : acts) {
      prefix.push_back(a);
      ++counts[prefix];
    }
  }
  return detail::shannon_entropy(counts, log_base);
}

struct EntropyReport {
  double base_trace_entropy = 0.0;
  double base_prefix_entropy = 0.0;
  double trace_entropy = 0.0;   // of the augmented log
  double prefix_entropy = 0.0;  // of the augmented log
  double relative_increase_trace = 0.0;   // percent
  double relative_increase_prefix = 0.0;  // percent
};

namespace detail {

inline double percent_increase(double base, double augmented) {
  if (base > 0.0) return 100.0 * (augmented - base) / base;
  if (augmented > 0.0) return std::numeric_limits<double>::infinity();
  return 0.0;
}

}  // namespace detail

inline EntropyReport relative_increase(const EventLog& base, const EventLog& augmented,
                                       double log_base = 2.0) {
  EntropyReport report;
  report.base_trace_entropy = trace_entropy(base, log_base);
  report.base_prefix_entropy = prefix_entropy(base, log_base);
  report.trace_entropy = trace_entropy(augmented, log_base);
  report.prefix_entropy = prefix_entropy(augmented, log_base);
  report.relative_increase_trace =
      detail::percent_increase(report.base_trace_entropy, report.trace_entropy);
  report.relative_increase_prefix =
      detail::percent_increase(report.base_prefix_entropy, report.prefix_entropy);
  return report;
}

// Infinity is encoded as the string "inf" since JSON has no literal for it.
inline nlohmann::json to_json(const EntropyReport& report) {
  auto number = [](double v) -> nlohmann::json {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
  };
  return {{"base_trace_entropy", report.base_trace_entropy},
          {"base_prefix_entropy", report.base_prefix_entropy},
          {"trace_entropy", report.trace_entropy},
          {"prefix_entropy", report.prefix_entropy},
          {"relative_increase_trace_pct", number(report.relative_increase_trace)},
          {"relative_increase_prefix_pct", number(report.relative_increase_prefix)}};
}

}  // namespace siamaug
