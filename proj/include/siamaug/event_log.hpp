#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "siamaug/common.hpp"

namespace siamaug {

// Bijection between activity names and dense indices. Index 0 is padding,
// index 1 the end-of-sequence class; real activities occupy [2, size).
class ActivityVocab {
 public:
  static constexpr const char* kPadName = "<PAD>";
  static constexpr const char* kEosName = "<EOS>";

  ActivityVocab() {
    names_ = {kPadName, kEosName};
    ids_[kPadName] = kPadId;
    ids_[kEosName] = kEosId;
  }

  // Builds a vocabulary with deterministic ids: names are sorted before
  // assignment, so the same set of activities always yields the same indices
  // regardless of trace order.
  static ActivityVocab from_names(std::vector<std::string> names) {
    std::sort(names.begin(), names.end());
    names.erase(std::unique(names.begin(), names.end()), names.end());
    ActivityVocab v;
    for (auto& n : names) {
      if (n == kPadName || n == kEosName) {
        throw ConfigError("activity name collides with reserved token: " + n);
      }
      v.ids_.emplace(n, static_cast<ActivityId>(v.names_.size()));
      v.names_.push_back(std::move(n));
    }
    return v;
  }

  std::optional<ActivityId> lookup(const std::string& name) const {
    auto it = ids_.find(name);
    if (it == ids_.end()) return std::nullopt;
    return it->second;
  }

  ActivityId id_of(const std::string& name) const {
    auto id = lookup(name);
    if (!id) throw ConfigError("unknown activity: " + name);
    return *id;
  }

  const std::string& name_of(ActivityId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= names_.size()) {
      throw ContractError("activity id out of range: " + std::to_string(id));
    }
    return names_[static_cast<std::size_t>(id)];
  }

  std::size_t size() const { return names_.size(); }
  std::size_t real_count() const { return names_.size() - kReservedIds; }
  bool is_real(ActivityId id) const {
    return id >= static_cast<ActivityId>(kReservedIds) &&
           static_cast<std::size_t>(id) < names_.size();
  }

  std::vector<ActivityId> real_ids() const {
    std::vector<ActivityId> out;
    out.reserve(real_count());
    for (std::size_t i = kReservedIds; i < names_.size(); ++i) {
      out.push_back(static_cast<ActivityId>(i));
    }
    return out;
  }

  bool operator==(const ActivityVocab& other) const { return names_ == other.names_; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, ActivityId> ids_;
};

struct Event {
  ActivityId activity = kPadId;
  std::optional<std::int64_t> timestamp_ms;  // UTC epoch millis; absent for synthetic events
  std::map<std::string, std::string> attrs;  // opaque payload, unused by learning

  bool operator==(const Event&) const = default;
};

struct Trace {
  std::string case_id;
  std::vector<Event> events;
  std::map<std::string, std::string> attrs;

  std::vector<ActivityId> activities() const {
    std::vector<ActivityId> out;
    out.reserve(events.size());
    for (const auto& e : events) out.push_back(e.activity);
    return out;
  }

  std::optional<std::int64_t> first_timestamp() const {
    for (const auto& e : events) {
      if (e.timestamp_ms) return e.timestamp_ms;
    }
    return std::nullopt;
  }

  bool operator==(const Trace&) const = default;
};

struct EventLog {
  std::vector<Trace> traces;
  ActivityVocab vocab;

  std::size_t size() const { return traces.size(); }
  bool empty() const { return traces.empty(); }

  bool operator==(const EventLog&) const = default;
};

// Checks the structural invariants parsers must establish. Throws on
// violation; used by tests and by the builders below.
inline void validate_log(const EventLog& log) {
  std::unordered_set<std::string> seen_ids;
  for (const auto& t : log.traces) {
    if (t.events.empty()) throw ContractError("trace with no events: " + t.case_id);
    if (!seen_ids.insert(t.case_id).second) {
      throw ContractError("duplicate case id: " + t.case_id);
    }
    std::optional<std::int64_t> prev;
    for (const auto& e : t.events) {
      if (e.activity == kPadId || e.activity == kEosId || !log.vocab.is_real(e.activity)) {
        throw ContractError("event activity outside vocabulary in case " + t.case_id);
      }
      if (e.timestamp_ms && prev && *e.timestamp_ms < *prev) {
        throw ContractError("timestamps decrease within case " + t.case_id);
      }
      if (e.timestamp_ms) prev = e.timestamp_ms;
    }
  }
}

struct Prefix {
  std::string case_id;
  std::vector<ActivityId> activities;

  std::size_t length() const { return activities.size(); }
  bool operator==(const Prefix&) const = default;
};

// target is an activity index for the next-activity task and a class index
// (0 = negative, 1 = positive) for the outcome task.
struct LabeledExample {
  Prefix prefix;
  ActivityId target = kEosId;

  bool operator==(const LabeledExample&) const = default;
};

enum class PredictionTask { kNextActivity, kOutcome };

inline const char* to_string(PredictionTask task) {
  return task == PredictionTask::kNextActivity ? "next-activity" : "outcome";
}

struct SplitFractions {
  double train = 0.65;
  double validation = 0.15;
  double test = 0.20;

  void validate() const {
    if (train <= 0 || validation <= 0 || test <= 0) {
      throw ConfigError("split fractions must be positive");
    }
    if (std::abs(train + validation + test - 1.0) > 1e-9) {
      throw ConfigError("split fractions must sum to 1");
    }
  }
};

struct TemporalSplit {
  std::vector<std::string> train;
  std::vector<std::string> validation;
  std::vector<std::string> test;
};

// Cases ordered by first-event timestamp (ties by case id); the earliest
// floor(train*N) go to train, the next floor(validation*N) to validation,
// the remainder to test.
inline TemporalSplit temporal_split(const EventLog& log, SplitFractions fractions = {}) {
  fractions.validate();
  if (log.size() < 3) throw ConfigError("temporal split needs at least 3 traces");

  struct Key {
    std::int64_t ts;
    const std::string* id;
  };
  std::vector<Key> keys;
  keys.reserve(log.size());
  for (const auto& t : log.traces) {
    const auto ts = t.first_timestamp();
    keys.push_back({ts ? *ts : std::numeric_limits<std::int64_t>::min(), &t.case_id});
  }
  std::sort(keys.begin(), keys.end(), [](const Key& a, const Key& b) {
    if (a.ts != b.ts) return a.ts < b.ts;
    return *a.id < *b.id;
  });

  const std::size_t n = keys.size();
  const std::size_t n_train = static_cast<std::size_t>(fractions.train * static_cast<double>(n));
  const std::size_t n_val = static_cast<std::size_t>(fractions.validation * static_cast<double>(n));

  TemporalSplit split;
  for (std::size_t i = 0; i < n; ++i) {
    if (i < n_train) {
      split.train.push_back(*keys[i].id);
    } else if (i < n_train + n_val) {
      split.validation.push_back(*keys[i].id);
    } else {
      split.test.push_back(*keys[i].id);
    }
  }
  return split;
}

// Sub-log restricted to the given cases, in the given order. The vocabulary
// is shared with the full log so activity indices stay comparable across
// splits.
inline EventLog select_cases(const EventLog& log, const std::vector<std::string>& case_ids) {
  std::unordered_map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < log.traces.size(); ++i) index.emplace(log.traces[i].case_id, i);
  EventLog out;
  out.vocab = log.vocab;
  out.traces.reserve(case_ids.size());
  for (const auto& id : case_ids) {
    auto it = index.find(id);
    if (it == index.end()) throw ConfigError("case id not in log: " + id);
    out.traces.push_back(log.traces[it->second]);
  }
  return out;
}

// One example per prefix. Next-activity prefixes run k in [1, T] with the
// (k+1)-th activity as target (EOS past the end); outcome prefixes run
// k in [1, T-1] and share the trace-level label.
inline std::vector<LabeledExample> generate_prefixes(const Trace& trace, PredictionTask task,
                                                     std::optional<int> outcome_label = {}) {
  if (trace.events.empty()) throw ContractError("generate_prefixes on empty trace");
  if (task == PredictionTask::kOutcome && !outcome_label) {
    throw ContractError("outcome task requires an outcome label");
  }
  const auto acts = trace.activities();
  std::vector<LabeledExample> out;
  const std::size_t limit = task == PredictionTask::kNextActivity ? acts.size() : acts.size() - 1;
  for (std::size_t k = 1; k <= limit; ++k) {
    LabeledExample ex;
    ex.prefix.case_id = trace.case_id;
    ex.prefix.activities.assign(acts.begin(), acts.begin() + static_cast<std::ptrdiff_t>(k));
    if (task == PredictionTask::kNextActivity) {
      ex.target = k < acts.size() ? acts[k] : kEosId;
    } else {
      ex.target = static_cast<ActivityId>(*outcome_label);
    }
    out.push_back(std::move(ex));
  }
  return out;
}

// 1 iff any event of the trace carries one of the designated outcome
// activities.
inline int extract_outcome_label(const Trace& trace, const std::set<ActivityId>& outcome_activities) {
  if (outcome_activities.empty()) {
    throw ContractError("extract_outcome_label requires a non-empty target set");
  }
  for (const auto& e : trace.events) {
    if (outcome_activities.count(e.activity)) return 1;
  }
  return 0;
}

// Content hash over case ids, activity names and timestamps. Activity names
// (not indices) are hashed so the value is independent of vocabulary layout.
inline std::uint64_t fingerprint(const EventLog& log) {
  constexpr std::uint64_t kOffset = 1469598103934665603ULL;
  constexpr std::uint64_t kPrime = 1099511628211ULL;
  std::uint64_t h = kOffset;
  auto mix_bytes = [&h](const void* data, std::size_t n) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= kPrime;
    }
  };
  auto mix_str = [&](const std::string& s) {
    mix_bytes(s.data(), s.size());
    const char sep = '\x1f';
    mix_bytes(&sep, 1);
  };
  for (const auto& t : log.traces) {
    mix_str(t.case_id);
    for (const auto& e : t.events) {
      mix_str(log.vocab.name_of(e.activity));
      const std::int64_t ts = e.timestamp_ms ? *e.timestamp_ms
                                             : std::numeric_limits<std::int64_t>::min();
      mix_bytes(&ts, sizeof(ts));
    }
  }
  return h;
}

inline std::string fingerprint_hex(const EventLog& log) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fingerprint(log)));
  return std::string(buf);
}

}  // namespace siamaug
