#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <tuple>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "siamaug/common.hpp"
#include "siamaug/event_log.hpp"

namespace siamaug {

struct MiningConfig {
  double alpha = 1e-4;   // activity filter: fraction of cases
  double beta = 1e-4;    // direct follower: fraction of all transitions
  double gamma = 1e-4;   // insertion rule: fraction of filtered traces
  double delta = 1e-4;   // replacement alternative: fraction of filtered traces
  int lambda_max = 4;    // maximum intermediate sequence length

  void validate() const {
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (!in_unit(alpha) || !in_unit(beta) || !in_unit(gamma) || !in_unit(delta)) {
      throw ConfigError("mining thresholds must lie in [0,1]");
    }
    if (lambda_max < 1) throw ConfigError("lambda_max must be >= 1");
  }
};

struct FollowerPair {
  ActivityId b = 0;
  ActivityId c = 0;
  std::uint64_t count = 0;
  double support = 0.0;  // count / total transitions in the filtered log
};

struct InsertionRule {
  ActivityId b = 0;
  ActivityId c = 0;
  std::vector<ActivityId> pi;  // intermediate sequence, 1..lambda_max activities
  double trace_support = 0.0;  // fraction of filtered traces containing b,pi,c
};

struct XorAlternative {
  std::vector<ActivityId> rho;
  double trace_support = 0.0;
};

struct XorReplacementSet {
  ActivityId d = 0;
  ActivityId e = 0;
  std::vector<XorAlternative> alternatives;  // >= 2, pairwise distinct
};

namespace detail {

inline std::uint64_t pair_key(ActivityId a, ActivityId b) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) |
         static_cast<std::uint32_t>(b);
}

// count >= fraction * total, the inclusive reading of "at least factor f".
inline bool meets_fraction(std::uint64_t count, double fraction, std::uint64_t total) {
  return static_cast<double>(count) >= fraction * static_cast<double>(total);
}

}  // namespace detail

class MinedPatterns {
 public:
  std::vector<FollowerPair> followers;
  std::vector<InsertionRule> insertion_rules;
  std::vector<XorReplacementSet> xor_sets;
  MiningConfig config;
  std::uint64_t source_fingerprint = 0;
  std::vector<std::string> warnings;

  bool empty() const {
    return followers.empty() && insertion_rules.empty() && xor_sets.empty();
  }

  bool has_follower(ActivityId b, ActivityId c) const {
    return follower_keys_.count(detail::pair_key(b, c)) > 0;
  }

  // Indices into insertion_rules that share the given endpoints.
  const std::vector<std::size_t>& rules_for(ActivityId b, ActivityId c) const {
    static const std::vector<std::size_t> kNone;
    auto it = rule_index_.find(detail::pair_key(b, c));
    return it == rule_index_.end() ? kNone : it->second;
  }

  const XorReplacementSet* xor_for(ActivityId d, ActivityId e) const {
    auto it = xor_index_.find(detail::pair_key(d, e));
    return it == xor_index_.end() ? nullptr : &xor_sets[it->second];
  }

  // Sorts pattern lists into canonical order and rebuilds lookup tables.
  // Also enforces the structural invariants every source (mining or JSON)
  // must satisfy.
  void finalize() {
    std::sort(followers.begin(), followers.end(), [](const FollowerPair& x, const FollowerPair& y) {
      return std::tie(x.b, x.c) < std::tie(y.b, y.c);
    });
    std::sort(insertion_rules.begin(), insertion_rules.end(),
              [](const InsertionRule& x, const InsertionRule& y) {
                return std::tie(x.b, x.c, x.pi) < std::tie(y.b, y.c, y.pi);
              });
    for (auto& set : xor_sets) {
      std::sort(set.alternatives.begin(), set.alternatives.end(),
                [](const XorAlternative& x, const XorAlternative& y) { return x.rho < y.rho; });
    }
    std::sort(xor_sets.begin(), xor_sets.end(),
              [](const XorReplacementSet& x, const XorReplacementSet& y) {
                return std::tie(x.d, x.e) < std::tie(y.d, y.e);
              });

    follower_keys_.clear();
    for (const auto& f : followers) follower_keys_.insert(detail::pair_key(f.b, f.c));

    rule_index_.clear();
    for (std::size_t i = 0; i < insertion_rules.size(); ++i) {
      const auto& r = insertion_rules[i];
      if (r.pi.empty() || static_cast<int>(r.pi.size()) > config.lambda_max) {
        throw ContractError("insertion rule with intermediate length outside [1, lambda_max]");
      }
      if (!has_follower(r.b, r.c)) {
        throw ContractError("insertion rule endpoints are not a retained follower pair");
      }
      rule_index_[detail::pair_key(r.b, r.c)].push_back(i);
    }

    xor_index_.clear();
    for (std::size_t i = 0; i < xor_sets.size(); ++i) {
      const auto& set = xor_sets[i];
      if (set.alternatives.size() < 2) {
        throw ContractError("XOR replacement set needs at least 2 alternatives");
      }
      for (std::size_t a = 1; a < set.alternatives.size(); ++a) {
        if (set.alternatives[a].rho == set.alternatives[a - 1].rho) {
          throw ContractError("duplicate alternative in XOR replacement set");
        }
      }
      for (const auto& alt : set.alternatives) {
        if (alt.rho.empty() || static_cast<int>(alt.rho.size()) > config.lambda_max) {
          throw ContractError("XOR alternative length outside [1, lambda_max]");
        }
      }
      if (!xor_index_.emplace(detail::pair_key(set.d, set.e), i).second) {
        throw ContractError("duplicate XOR replacement set endpoints");
      }
    }
  }

 private:
  std::unordered_set<std::uint64_t> follower_keys_;
  std::unordered_map<std::uint64_t, std::vector<std::size_t>> rule_index_;
  std::unordered_map<std::uint64_t, std::size_t> xor_index_;
};

// Step 1: keep only traces whose activities all occur in at least
// alpha * N cases.
inline EventLog filter_log(const EventLog& log, double alpha) {
  if (log.empty()) throw ContractError("filter_log on empty log");
  std::unordered_map<ActivityId, std::uint64_t> case_count;
  for (const auto& t : log.traces) {
    std::unordered_set<ActivityId> seen;
    for (const auto& e : t.events) seen.insert(e.activity);
    for (ActivityId a : seen) ++case_count[a];
  }
  const auto n = static_cast<std::uint64_t>(log.size());
  EventLog out;
  out.vocab = log.vocab;
  for (const auto& t : log.traces) {
    bool all_frequent = true;
    for (const auto& e : t.events) {
      if (!detail::meets_fraction(case_count[e.activity], alpha, n)) {
        all_frequent = false;
        break;
      }
    }
    if (all_frequent) out.traces.push_back(t);
  }
  return out;
}

// Step 2: adjacent pairs kept when their count reaches beta times the total
// number of transitions in the filtered log.
inline std::vector<FollowerPair> mine_direct_followers(const EventLog& filtered, double beta) {
  std::map<std::pair<ActivityId, ActivityId>, std::uint64_t> counts;
  std::uint64_t total = 0;
  for (const auto& t : filtered.traces) {
    const auto acts = t.activities();
    for (std::size_t i = 0; i + 1 < acts.size(); ++i) {
      ++counts[{acts[i], acts[i + 1]}];
      ++total;
    }
  }
  std::vector<FollowerPair> out;
  if (total == 0) return out;
  for (const auto& [pair, count] : counts) {
    if (detail::meets_fraction(count, beta, total)) {
      out.push_back({pair.first, pair.second, count,
                     static_cast<double>(count) / static_cast<double>(total)});
    }
  }
  return out;
}

namespace detail {

// Flattened window key: [b, interior..., c]. A window of length w at
// position i in a trace contributes the pattern (t[i], t[i+1..i+w-2],
// t[i+w-1]).
using WindowKey = std::vector<ActivityId>;

// All distinct windows of interior length 1..lambda_max contained in the
// trace. Containment is per trace: multiplicities within one trace do not
// matter for support counting.
inline std::set<WindowKey> distinct_windows(const std::vector<ActivityId>& acts, int lambda_max) {
  std::set<WindowKey> windows;
  const std::size_t n = acts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t max_j = std::min(n - 1, i + 1 + static_cast<std::size_t>(lambda_max));
    for (std::size_t j = i + 2; j <= max_j; ++j) {
      windows.insert(WindowKey(acts.begin() + static_cast<std::ptrdiff_t>(i),
                               acts.begin() + static_cast<std::ptrdiff_t>(j) + 1));
    }
  }
  return windows;
}

}  // namespace detail

// Steps 3-4: contiguous b,pi,c windows whose per-trace support reaches gamma,
// restricted to endpoints that survived step 2.
inline std::vector<InsertionRule> mine_intermediate_sequences(
    const EventLog& filtered, const std::vector<FollowerPair>& followers, double gamma,
    int lambda_max) {
  std::unordered_set<std::uint64_t> follower_keys;
  for (const auto& f : followers) follower_keys.insert(detail::pair_key(f.b, f.c));

  std::map<detail::WindowKey, std::uint64_t> trace_counts;
  for (const auto& t : filtered.traces) {
    for (const auto& w : detail::distinct_windows(t.activities(), lambda_max)) {
      if (follower_keys.count(detail::pair_key(w.front(), w.back()))) ++trace_counts[w];
    }
  }

  const auto n = static_cast<std::uint64_t>(filtered.size());
  std::vector<InsertionRule> out;
  for (const auto& [window, count] : trace_counts) {
    if (!detail::meets_fraction(count, gamma, n)) continue;
    InsertionRule rule;
    rule.b = window.front();
    rule.c = window.back();
    rule.pi.assign(window.begin() + 1, window.end() - 1);
    rule.trace_support = static_cast<double>(count) / static_cast<double>(n);
    out.push_back(std::move(rule));
  }
  return out;
}

// Replacement steps 2-3: for each endpoint pair, alternatives that appear in
// at least delta of the filtered traces; a set is emitted only when two or
// more distinct alternatives survive.
inline std::vector<XorReplacementSet> mine_xor_structures(const EventLog& filtered, double delta,
                                                          int lambda_max) {
  std::map<detail::WindowKey, std::uint64_t> trace_counts;
  for (const auto& t : filtered.traces) {
    for (const auto& w : detail::distinct_windows(t.activities(), lambda_max)) ++trace_counts[w];
  }

  const auto n = static_cast<std::uint64_t>(filtered.size());
  std::map<std::pair<ActivityId, ActivityId>, std::vector<XorAlternative>> grouped;
  for (const auto& [window, count] : trace_counts) {
    if (!detail::meets_fraction(count, delta, n)) continue;
    XorAlternative alt;
    alt.rho.assign(window.begin() + 1, window.end() - 1);
    alt.trace_support = static_cast<double>(count) / static_cast<double>(n);
    grouped[{window.front(), window.back()}].push_back(std::move(alt));
  }

  std::vector<XorReplacementSet> out;
  for (auto& [pair, alts] : grouped) {
    if (alts.size() < 2) continue;
    XorReplacementSet set;
    set.d = pair.first;
    set.e = pair.second;
    set.alternatives = std::move(alts);
    out.push_back(std::move(set));
  }
  return out;
}

// Full pipeline over one training log: filter once, then run both mining
// procedures on the same filtered log.
inline MinedPatterns mine_all(const EventLog& log, const MiningConfig& config) {
  config.validate();
  if (log.empty()) throw ContractError("mine_all on empty log");

  MinedPatterns patterns;
  patterns.config = config;
  patterns.source_fingerprint = fingerprint(log);

  const EventLog filtered = filter_log(log, config.alpha);
  if (filtered.empty()) {
    patterns.warnings.push_back(
        "activity filter removed every trace; no patterns mined, transforms will fall back to random");
    patterns.finalize();
    return patterns;
  }

  patterns.followers = mine_direct_followers(filtered, config.beta);
  patterns.insertion_rules =
      mine_intermediate_sequences(filtered, patterns.followers, config.gamma, config.lambda_max);
  patterns.xor_sets = mine_xor_structures(filtered, config.delta, config.lambda_max);
  if (patterns.empty()) {
    patterns.warnings.push_back("no patterns met the thresholds; transforms will fall back to random");
  }
  patterns.finalize();
  return patterns;
}

// --- JSON serialization -----------------------------------------------------
//
// Patterns are stored with activity names rather than indices so the file is
// self-describing and survives vocabulary rebuilds.

inline constexpr int kPatternsFormatVersion = 1;

inline nlohmann::json patterns_to_json(const MinedPatterns& patterns, const ActivityVocab& vocab) {
  auto names = [&vocab](const std::vector<ActivityId>& ids) {
    nlohmann::json arr = nlohmann::json::array();
    for (ActivityId id : ids) arr.push_back(vocab.name_of(id));
    return arr;
  };

  nlohmann::json j;
  j["format"] = "siamaug-patterns";
  j["version"] = kPatternsFormatVersion;
  j["config"] = {{"alpha", patterns.config.alpha},
                 {"beta", patterns.config.beta},
                 {"gamma", patterns.config.gamma},
                 {"delta", patterns.config.delta},
                 {"lambda_max", patterns.config.lambda_max}};
  j["fingerprint"] = patterns.source_fingerprint;
  j["warnings"] = patterns.warnings;

  j["followers"] = nlohmann::json::array();
  for (const auto& f : patterns.followers) {
    j["followers"].push_back({{"b", vocab.name_of(f.b)},
                              {"c", vocab.name_of(f.c)},
                              {"count", f.count},
                              {"support", f.support}});
  }
  j["insertion_rules"] = nlohmann::json::array();
  for (const auto& r : patterns.insertion_rules) {
    j["insertion_rules"].push_back({{"b", vocab.name_of(r.b)},
                                    {"c", vocab.name_of(r.c)},
                                    {"pi", names(r.pi)},
                                    {"trace_support", r.trace_support}});
  }
  j["xor_sets"] = nlohmann::json::array();
  for (const auto& s : patterns.xor_sets) {
    nlohmann::json alts = nlohmann::json::array();
    for (const auto& a : s.alternatives) {
      alts.push_back({{"rho", names(a.rho)}, {"trace_support", a.trace_support}});
    }
    j["xor_sets"].push_back(
        {{"d", vocab.name_of(s.d)}, {"e", vocab.name_of(s.e)}, {"alternatives", alts}});
  }
  return j;
}

inline MinedPatterns patterns_from_json(const nlohmann::json& j, const ActivityVocab& vocab) {
  if (!j.is_object() || j.value("format", "") != "siamaug-patterns") {
    throw ParseError("not a siamaug patterns document");
  }
  if (j.value("version", 0) != kPatternsFormatVersion) {
    throw ParseError("unsupported patterns document version");
  }
  auto ids = [&vocab](const nlohmann::json& arr) {
    std::vector<ActivityId> out;
    for (const auto& name : arr) out.push_back(vocab.id_of(name.get<std::string>()));
    return out;
  };

  MinedPatterns patterns;
  const auto& cfg = j.at("config");
  patterns.config.alpha = cfg.at("alpha").get<double>();
  patterns.config.beta = cfg.at("beta").get<double>();
  patterns.config.gamma = cfg.at("gamma").get<double>();
  patterns.config.delta = cfg.at("delta").get<double>();
  patterns.config.lambda_max = cfg.at("lambda_max").get<int>();
  patterns.source_fingerprint = j.at("fingerprint").get<std::uint64_t>();
  if (j.contains("warnings")) {
    patterns.warnings = j.at("warnings").get<std::vector<std::string>>();
  }
  for (const auto& f : j.at("followers")) {
    patterns.followers.push_back({vocab.id_of(f.at("b").get<std::string>()),
                                  vocab.id_of(f.at("c").get<std::string>()),
                                  f.at("count").get<std::uint64_t>(),
                                  f.at("support").get<double>()});
  }
  for (const auto& r : j.at("insertion_rules")) {
    InsertionRule rule;
    rule.b = vocab.id_of(r.at("b").get<std::string>());
    rule.c = vocab.id_of(r.at("c").get<std::string>());
    rule.pi = ids(r.at("pi"));
    rule.trace_support = r.at("trace_support").get<double>();
    patterns.insertion_rules.push_back(std::move(rule));
  }
  for (const auto& s : j.at("xor_sets")) {
    XorReplacementSet set;
    set.d = vocab.id_of(s.at("d").get<std::string>());
    set.e = vocab.id_of(s.at("e").get<std::string>());
    for (const auto& a : s.at("alternatives")) {
      set.alternatives.push_back({ids(a.at("rho")), a.at("trace_support").get<double>()});
    }
    patterns.xor_sets.push_back(std::move(set));
  }
  patterns.finalize();
  return patterns;
}

}  // namespace siamaug
