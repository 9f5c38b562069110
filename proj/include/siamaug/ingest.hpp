#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "siamaug/common.hpp"
#include "siamaug/event_log.hpp"

namespace siamaug::detail {

struct RawEvent {
  std::string activity;
  std::optional<std::int64_t> timestamp_ms;
  std::map<std::string, std::string> attrs;
};

struct RawTrace {
  std::string case_id;
  std::vector<RawEvent> events;
  std::map<std::string, std::string> attrs;
};

// Assembles parsed rows into an EventLog: builds the sorted vocabulary,
// orders events by timestamp (stable; events without a timestamp keep their
// input position relative to each other and sort after timestamped ones),
// and drops empty traces.
inline EventLog build_log(std::vector<RawTrace> raw) {
  std::vector<std::string> names;
  for (const auto& t : raw) {
    for (const auto& e : t.events) names.push_back(e.activity);
  }
  EventLog log;
  log.vocab = ActivityVocab::from_names(std::move(names));

  for (auto& t : raw) {
    if (t.events.empty()) continue;
    std::stable_sort(t.events.begin(), t.events.end(), [](const RawEvent& a, const RawEvent& b) {
      const std::int64_t ka = a.timestamp_ms.value_or(std::numeric_limits<std::int64_t>::max());
      const std::int64_t kb = b.timestamp_ms.value_or(std::numeric_limits<std::int64_t>::max());
      return ka < kb;
    });
    Trace trace;
    trace.case_id = std::move(t.case_id);
    trace.attrs = std::move(t.attrs);
    trace.events.reserve(t.events.size());
    for (auto& e : t.events) {
      Event ev;
      ev.activity = log.vocab.id_of(e.activity);
      ev.timestamp_ms = e.timestamp_ms;
      ev.attrs = std::move(e.attrs);
      trace.events.push_back(std::move(ev));
    }
    log.traces.push_back(std::move(trace));
  }
  validate_log(log);
  return log;
}

}  // namespace siamaug::detail
