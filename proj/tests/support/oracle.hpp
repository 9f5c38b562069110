#pragma once

// Independent brute-force enumerator for the mining semantics. Deliberately
// written as plain nested loops over ordered containers, with no code shared
// with the library implementation, so the two can disagree.

#include <map>
#include <set>
#include <tuple>
#include <vector>

namespace siamaug::testing::oracle {

using Sequence = std::vector<int>;
using Logs = std::vector<Sequence>;

inline bool at_least(std::size_t count, double fraction, std::size_t total) {
  return static_cast<double>(count) >= fraction * static_cast<double>(total);
}

inline Logs filter_log(const Logs& log, double alpha) {
  std::map<int, std::set<std::size_t>> cases_with;
  for (std::size_t i = 0; i < log.size(); ++i) {
    for (int a : log[i]) cases_with[a].insert(i);
  }
  Logs out;
  for (const auto& trace : log) {
    bool keep = true;
    for (int a : trace) {
      if (!at_least(cases_with[a].size(), alpha, log.size())) {
        keep = false;
        break;
      }
    }
    if (keep) out.push_back(trace);
  }
  return out;
}

// (b, c) -> transition count, kept when count >= beta * total transitions.
inline std::map<std::pair<int, int>, std::size_t> direct_followers(const Logs& filtered,
                                                                   double beta) {
  std::map<std::pair<int, int>, std::size_t> counts;
  std::size_t total = 0;
  for (const auto& trace : filtered) {
    for (std::size_t i = 0; i + 1 < trace.size(); ++i) {
      ++counts[{trace[i], trace[i + 1]}];
      ++total;
    }
  }
  std::map<std::pair<int, int>, std::size_t> kept;
  for (const auto& [pair, count] : counts) {
    if (total > 0 && at_least(count, beta, total)) kept[pair] = count;
  }
  return kept;
}

// Full window b+pi+c as a flat sequence; set of traces containing it.
inline std::map<Sequence, std::set<std::size_t>> windows_by_trace(const Logs& filtered,
                                                                  int lambda_max) {
  std::map<Sequence, std::set<std::size_t>> found;
  for (std::size_t t = 0; t < filtered.size(); ++t) {
    const auto& trace = filtered[t];
    for (std::size_t i = 0; i < trace.size(); ++i) {
      for (std::size_t j = i + 2; j < trace.size(); ++j) {
        const std::size_t interior = j - i - 1;
        if (interior > static_cast<std::size_t>(lambda_max)) break;
        Sequence window(trace.begin() + static_cast<std::ptrdiff_t>(i),
                        trace.begin() + static_cast<std::ptrdiff_t>(j) + 1);
        found[window].insert(t);
      }
    }
  }
  return found;
}

// Rule windows b+pi+c with endpoint pair frequent and per-trace support
// reaching gamma.
inline std::set<Sequence> insertion_rules(const Logs& filtered, double beta, double gamma,
                                          int lambda_max) {
  const auto followers = direct_followers(filtered, beta);
  std::set<Sequence> rules;
  for (const auto& [window, traces] : windows_by_trace(filtered, lambda_max)) {
    if (followers.find({window.front(), window.back()}) == followers.end()) continue;
    if (at_least(traces.size(), gamma, filtered.size())) rules.insert(window);
  }
  return rules;
}

// (d, e) -> surviving alternatives rho; only pairs with >= 2 survive.
inline std::map<std::pair<int, int>, std::set<Sequence>> xor_sets(const Logs& filtered,
                                                                  double delta, int lambda_max) {
  std::map<std::pair<int, int>, std::set<Sequence>> grouped;
  for (const auto& [window, traces] : windows_by_trace(filtered, lambda_max)) {
    if (!at_least(traces.size(), delta, filtered.size())) continue;
    Sequence rho(window.begin() + 1, window.end() - 1);
    grouped[{window.front(), window.back()}].insert(rho);
  }
  std::map<std::pair<int, int>, std::set<Sequence>> out;
  for (const auto& [pair, alts] : grouped) {
    if (alts.size() >= 2) out[pair] = alts;
  }
  return out;
}

}  // namespace siamaug::testing::oracle
