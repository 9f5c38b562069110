#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "siamaug/event_log.hpp"
#include "siamaug/rng.hpp"

namespace siamaug::testing {

// Builds a log from bare activity-name sequences; case ids are generated and
// timestamps spaced one minute apart per trace, one hour apart across traces,
// so temporal ordering equals construction order.
inline EventLog log_from_sequences(const std::vector<std::vector<std::string>>& sequences,
                                   bool with_timestamps = true) {
  std::vector<std::string> names;
  for (const auto& seq : sequences) {
    for (const auto& a : seq) names.push_back(a);
  }
  EventLog log;
  log.vocab = ActivityVocab::from_names(names);
  std::int64_t base = 1'600'000'000'000LL;
  for (std::size_t i = 0; i < sequences.size(); ++i) {
    Trace t;
    t.case_id = "case" + std::string(4 - std::min<std::size_t>(4, std::to_string(i + 1).size()), '0') +
                std::to_string(i + 1);
    for (std::size_t j = 0; j < sequences[i].size(); ++j) {
      Event e;
      e.activity = log.vocab.id_of(sequences[i][j]);
      if (with_timestamps) {
        e.timestamp_ms = base + static_cast<std::int64_t>(i) * 3'600'000 +
                         static_cast<std::int64_t>(j) * 60'000;
      }
      t.events.push_back(e);
    }
    log.traces.push_back(std::move(t));
  }
  validate_log(log);
  return log;
}

// Synthetic XOR process used across the suite:
//   (H1|H2) -> A -> (P|Q) -> B -> [D] -> (F1|F2)
// The leading hint token H* determines the branch and the final activity
// with probability 1-noise, so the next-activity task has learnable signal
// plus injected label noise. The optional D step feeds the
// insertion/deletion rules. The hint sits at position 0, where no mined
// window can reach it: every statistical rewrite provably preserves it,
// while random edits can corrupt it.
//
// rare_tail adds that many one-off exception activities, injected into a
// rare_prob fraction of traces, mimicking the long activity tail of real
// logs. Tail tokens stay below the mining thresholds, so only the random
// transforms ever emit them.
inline EventLog make_xor_process_log(std::size_t n_traces, std::uint64_t seed,
                                     double noise = 0.1, double insert_prob = 0.3,
                                     std::size_t rare_tail = 0, double rare_prob = 0.0) {
  Rng rng(seed);
  std::vector<std::vector<std::string>> sequences;
  sequences.reserve(n_traces);
  for (std::size_t i = 0; i < n_traces; ++i) {
    const bool h1 = rng.flip(0.5);
    const bool branch_p = rng.flip(noise) ? !h1 : h1;
    const bool outcome_f1 = rng.flip(noise) ? !h1 : h1;
    const bool with_d = rng.flip(insert_prob);
    std::vector<std::string> seq{h1 ? "H1" : "H2", "A", branch_p ? "P" : "Q", "B"};
    if (with_d) seq.push_back("D");
    seq.push_back(outcome_f1 ? "F1" : "F2");
    if (rare_tail > 0 && rng.flip(rare_prob)) {
      const auto r = rng.index(rare_tail);
      seq.insert(seq.begin() + 2 + static_cast<std::ptrdiff_t>(rng.index(2)),
                 "Exc" + std::to_string(r));
    }
    sequences.push_back(std::move(seq));
  }
  return log_from_sequences(sequences);
}

}  // namespace siamaug::testing
