#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "siamaug/common.hpp"
#include "siamaug/event_log.hpp"
#include "siamaug/pattern_miner.hpp"
#include "siamaug/rng.hpp"
#include "siamaug/transforms.hpp"

namespace siamaug {

// The transformation pool: statistical rewriters first, random ones only as
// fallback when no statistical rewriter applies.
struct AugmentationPool {
  std::vector<Transformation> statistical;
  std::vector<Transformation> fallback;

  static AugmentationPool standard(const MinedPatterns& patterns) {
    AugmentationPool pool;
    pool.statistical = {Transformation::statistical(TransformKind::kStatInsert, patterns),
                        Transformation::statistical(TransformKind::kStatDelete, patterns),
                        Transformation::statistical(TransformKind::kStatReplace, patterns)};
    pool.fallback = {Transformation::random(TransformKind::kRandInsert),
                     Transformation::random(TransformKind::kRandDelete),
                     Transformation::random(TransformKind::kRandReplace)};
    return pool;
  }

  // Random-strategy pool for the pretraining ablation: no statistical
  // rewriters at all, so every pair comes from the random transforms.
  static AugmentationPool random_only() {
    AugmentationPool pool;
    pool.fallback = {Transformation::random(TransformKind::kRandInsert),
                     Transformation::random(TransformKind::kRandDelete),
                     Transformation::random(TransformKind::kRandReplace)};
    return pool;
  }
};

// Two distinct augmented views of the same prefix. pad_length == 0 means the
// views are still unpadded; pad_batch produces the padded form.
struct ViewPair {
  std::vector<ActivityId> original;
  std::vector<ActivityId> v;
  std::vector<ActivityId> v_prime;
  std::size_t pad_length = 0;
};

struct PairStats {
  std::size_t statistical_candidates = 0;
  std::size_t fallback_candidates = 0;
  bool used_fallback = false;
  bool exhausted_trials = false;
  // Reported, never expected: no rewriter can reproduce its input, so a view
  // equal to the original would mean a broken transform.
  bool view_equals_original = false;
  TransformKind first_kind = TransformKind::kRandInsert;
  TransformKind second_kind = TransformKind::kRandInsert;
};

// All applicable statistical transforms; if none apply, all applicable
// fallbacks. An empty result means the sequence cannot be augmented at all.
inline std::vector<Transformation> select_applicable(Seq x, const AugmentationPool& pool,
                                                     const ActivityVocab& vocab) {
  std::vector<Transformation> out;
  for (const auto& t : pool.statistical) {
    if (applicable(t, x, vocab)) out.push_back(t);
  }
  if (!out.empty()) return out;
  for (const auto& t : pool.fallback) {
    if (applicable(t, x, vocab)) out.push_back(t);
  }
  return out;
}

namespace detail {

// Last-resort second view: grow x one random insertion at a time until it
// differs from v. Lengths eventually pass |v|, so this always terminates.
inline std::vector<ActivityId> forced_distinct_view(Seq x, const std::vector<ActivityId>& v,
                                                    const ActivityVocab& vocab, Rng& rng) {
  if (vocab.real_count() >= 2 && !x.empty()) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      auto candidate = rand_replace(x, vocab, rng).sequence;
      if (candidate != v) return candidate;
    }
  }
  std::vector<ActivityId> grown(x.begin(), x.end());
  do {
    grown = rand_insert(grown, vocab, rng).sequence;
  } while (grown == v);
  return grown;
}

}  // namespace detail

// Samples an applicable transform uniformly for the first view, then retries
// up to max_trials times for a second, distinct view. On exhaustion the
// second view is forced to differ.
inline ViewPair generate_view_pair(Seq x, const AugmentationPool& pool, const ActivityVocab& vocab,
                                   Rng& rng, int max_trials = 30, PairStats* stats = nullptr) {
  std::vector<Transformation> statistical;
  for (const auto& t : pool.statistical) {
    if (applicable(t, x, vocab)) statistical.push_back(t);
  }
  std::vector<Transformation> candidates = statistical;
  if (candidates.empty()) {
    for (const auto& t : pool.fallback) {
      if (applicable(t, x, vocab)) candidates.push_back(t);
    }
  }
  if (candidates.empty()) {
    throw ContractError("generate_view_pair: no applicable transformation");
  }
  if (stats) {
    stats->statistical_candidates = statistical.size();
    stats->fallback_candidates = statistical.empty() ? candidates.size() : 0;
    stats->used_fallback = statistical.empty();
  }

  ViewPair pair;
  pair.original.assign(x.begin(), x.end());

  const auto& first = candidates[rng.index(candidates.size())];
  if (stats) stats->first_kind = first.kind;
  pair.v = apply_transform(first, x, vocab, rng).sequence;

  for (int trial = 0; trial < max_trials; ++trial) {
    const auto& second = candidates[rng.index(candidates.size())];
    auto view = apply_transform(second, x, vocab, rng).sequence;
    if (view != pair.v) {
      if (stats) stats->second_kind = second.kind;
      pair.v_prime = std::move(view);
      if (stats && (pair.v == pair.original || pair.v_prime == pair.original)) {
        stats->view_equals_original = true;
      }
      return pair;
    }
  }
  if (stats) stats->exhausted_trials = true;
  pair.v_prime = detail::forced_distinct_view(x, pair.v, vocab, rng);
  if (stats) {
    stats->second_kind = TransformKind::kRandReplace;
    if (pair.v == pair.original || pair.v_prime == pair.original) {
      stats->view_equals_original = true;
    }
  }
  return pair;
}

// Left-pads every view in the batch to the longest view length.
inline std::vector<ViewPair> pad_batch(std::vector<ViewPair> pairs) {
  if (pairs.empty()) throw ContractError("pad_batch on empty batch");
  std::size_t pad_length = 0;
  for (const auto& p : pairs) {
    pad_length = std::max({pad_length, p.v.size(), p.v_prime.size()});
  }
  auto pad = [pad_length](std::vector<ActivityId>& seq) {
    std::vector<ActivityId> padded(pad_length - seq.size(), kPadId);
    padded.insert(padded.end(), seq.begin(), seq.end());
    seq = std::move(padded);
  };
  for (auto& p : pairs) {
    pad(p.v);
    pad(p.v_prime);
    p.pad_length = pad_length;
  }
  return pairs;
}

struct AugmentStats {
  std::map<TransformKind, std::size_t> applied;
  std::size_t fallback_uses = 0;
  std::size_t skipped_samples = 0;
};

// Whole-log upsampling: keeps every original trace and appends
// ceil((factor - 1) * N) synthetic traces, each a single rewrite of a
// uniformly sampled original. Synthetic events carry no timestamp.
inline EventLog augment_log(const EventLog& log, const MinedPatterns& patterns, double factor,
                            Rng& rng, AugmentStats* stats = nullptr) {
  if (factor < 1.0) throw ConfigError("augmentation factor must be >= 1");
  if (log.empty()) throw ContractError("augment_log on empty log");

  EventLog out = log;
  const double extra = (factor - 1.0) * static_cast<double>(log.size());
  const auto target = static_cast<std::size_t>(std::ceil(extra - 1e-9));
  if (target == 0) return out;

  const AugmentationPool pool = AugmentationPool::standard(patterns);
  std::size_t made = 0;
  for (std::size_t i = 0; i < target; ++i) {
    Rng worker = rng.fork(i);
    bool produced = false;
    // bounded resampling in case some traces admit no transform
    for (std::size_t attempt = 0; attempt < 16 && !produced; ++attempt) {
      const Trace& source = log.traces[worker.index(log.size())];
      const auto seq = source.activities();
      const auto candidates = select_applicable(seq, pool, log.vocab);
      if (candidates.empty()) {
        if (stats) ++stats->skipped_samples;
        continue;
      }
      const auto& chosen = candidates[worker.index(candidates.size())];
      auto rewritten = apply_transform(chosen, seq, log.vocab, worker);
      if (stats) {
        ++stats->applied[chosen.kind];
        if (!is_statistical(chosen.kind)) ++stats->fallback_uses;
      }
      Trace synthetic;
      synthetic.case_id = source.case_id + "_aug" + std::to_string(made + 1);
      synthetic.events.reserve(rewritten.sequence.size());
      for (ActivityId a : rewritten.sequence) {
        Event e;
        e.activity = a;
        synthetic.events.push_back(std::move(e));
      }
      out.traces.push_back(std::move(synthetic));
      produced = true;
      ++made;
    }
    if (!produced) break;
  }
  return out;
}

}  // namespace siamaug
