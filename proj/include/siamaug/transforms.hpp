#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "siamaug/common.hpp"
#include "siamaug/event_log.hpp"
#include "siamaug/pattern_miner.hpp"
#include "siamaug/rng.hpp"

namespace siamaug {

enum class TransformKind {
  kStatInsert,
  kStatDelete,
  kStatReplace,
  kRandInsert,
  kRandDelete,
  kRandReplace,
};

inline const char* to_string(TransformKind kind) {
  switch (kind) {
    case TransformKind::kStatInsert: return "StatisticalInsertion";
    case TransformKind::kStatDelete: return "StatisticalDeletion";
    case TransformKind::kStatReplace: return "StatisticalReplacement";
    case TransformKind::kRandInsert: return "RandomInsertion";
    case TransformKind::kRandDelete: return "RandomDeletion";
    case TransformKind::kRandReplace: return "RandomReplacement";
  }
  return "?";
}

inline bool is_statistical(TransformKind kind) {
  return kind == TransformKind::kStatInsert || kind == TransformKind::kStatDelete ||
         kind == TransformKind::kStatReplace;
}

// A trace rewriter from the augmentation pool. Statistical kinds carry the
// mined patterns they draw rules from.
struct Transformation {
  TransformKind kind;
  const MinedPatterns* patterns = nullptr;

  static Transformation statistical(TransformKind kind, const MinedPatterns& patterns) {
    if (!is_statistical(kind)) throw ContractError("not a statistical transform kind");
    return {kind, &patterns};
  }

  static Transformation random(TransformKind kind) {
    if (is_statistical(kind)) throw ContractError("statistical transform needs patterns");
    return {kind, nullptr};
  }
};

// The exact edit a rewriter performed, for audit and verification:
//   output == input[0, pos) + inserted + input[pos + |removed|, end)
struct AppliedEdit {
  TransformKind kind = TransformKind::kRandInsert;
  std::size_t pos = 0;
  std::vector<ActivityId> removed;
  std::vector<ActivityId> inserted;

  std::string describe(const ActivityVocab& vocab) const {
    std::string out = to_string(kind);
    out += " @" + std::to_string(pos) + " -[";
    for (std::size_t i = 0; i < removed.size(); ++i) {
      if (i) out += ' ';
      out += vocab.name_of(removed[i]);
    }
    out += "] +[";
    for (std::size_t i = 0; i < inserted.size(); ++i) {
      if (i) out += ' ';
      out += vocab.name_of(inserted[i]);
    }
    out += ']';
    return out;
  }
};

struct RewriteResult {
  std::vector<ActivityId> sequence;
  AppliedEdit edit;
};

using Seq = std::span<const ActivityId>;

// Start positions of contiguous b,pi,c occurrences, found by a left-to-right
// scan with non-overlapping interiors: after a match ending at index j the
// scan resumes at j, so the closing activity may open the next match.
inline std::vector<std::size_t> find_pattern_sites(Seq seq, ActivityId b,
                                                   std::span<const ActivityId> pi, ActivityId c) {
  std::vector<std::size_t> sites;
  const std::size_t window = pi.size() + 2;
  if (seq.size() < window) return sites;
  std::size_t i = 0;
  while (i + window <= seq.size()) {
    bool match = seq[i] == b && seq[i + window - 1] == c;
    for (std::size_t k = 0; match && k < pi.size(); ++k) {
      match = seq[i + 1 + k] == pi[k];
    }
    if (match) {
      sites.push_back(i);
      i += window - 1;
    } else {
      ++i;
    }
  }
  return sites;
}

namespace detail {

struct InsertCandidate {
  std::size_t pos;          // index of b in the sequence
  std::size_t rule_index;
};

inline std::vector<InsertCandidate> stat_insert_candidates(Seq seq, const MinedPatterns& patterns) {
  std::vector<InsertCandidate> out;
  for (std::size_t i = 0; i + 1 < seq.size(); ++i) {
    for (std::size_t r : patterns.rules_for(seq[i], seq[i + 1])) {
      out.push_back({i, r});
    }
  }
  return out;
}

struct DeleteCandidate {
  std::size_t pos;          // index of b
  std::size_t rule_index;
};

inline std::vector<DeleteCandidate> stat_delete_candidates(Seq seq, const MinedPatterns& patterns) {
  std::vector<DeleteCandidate> out;
  for (std::size_t r = 0; r < patterns.insertion_rules.size(); ++r) {
    const auto& rule = patterns.insertion_rules[r];
    for (std::size_t site : find_pattern_sites(seq, rule.b, rule.pi, rule.c)) {
      out.push_back({site, r});
    }
  }
  return out;
}

struct ReplaceCandidate {
  std::size_t pos;          // index of d
  std::size_t set_index;
  std::size_t alt_index;    // which rho_i matched
};

inline std::vector<ReplaceCandidate> stat_replace_candidates(Seq seq,
                                                             const MinedPatterns& patterns) {
  std::vector<ReplaceCandidate> out;
  for (std::size_t s = 0; s < patterns.xor_sets.size(); ++s) {
    const auto& set = patterns.xor_sets[s];
    for (std::size_t a = 0; a < set.alternatives.size(); ++a) {
      for (std::size_t site : find_pattern_sites(seq, set.d, set.alternatives[a].rho, set.e)) {
        out.push_back({site, s, a});
      }
    }
  }
  return out;
}

inline std::vector<ActivityId> splice(Seq seq, std::size_t pos, std::size_t remove_count,
                                      std::span<const ActivityId> insert) {
  std::vector<ActivityId> out;
  out.reserve(seq.size() - remove_count + insert.size());
  out.insert(out.end(), seq.begin(), seq.begin() + static_cast<std::ptrdiff_t>(pos));
  out.insert(out.end(), insert.begin(), insert.end());
  out.insert(out.end(), seq.begin() + static_cast<std::ptrdiff_t>(pos + remove_count), seq.end());
  return out;
}

}  // namespace detail

// Splices a mined intermediate sequence between an adjacent frequent
// follower pair. Site and rule are drawn uniformly over all (position, rule)
// combinations.
inline RewriteResult stat_insert(Seq seq, const MinedPatterns& patterns, Rng& rng) {
  const auto candidates = detail::stat_insert_candidates(seq, patterns);
  if (candidates.empty()) throw ContractError("stat_insert called on inapplicable sequence");
  const auto& choice = candidates[rng.index(candidates.size())];
  const auto& rule = patterns.insertion_rules[choice.rule_index];

  RewriteResult result;
  result.edit.kind = TransformKind::kStatInsert;
  result.edit.pos = choice.pos + 1;
  result.edit.inserted = rule.pi;
  result.sequence = detail::splice(seq, choice.pos + 1, 0, rule.pi);
  return result;
}

// Removes one mined intermediate sequence, shortening b,pi,c to the direct
// follower b,c.
inline RewriteResult stat_delete(Seq seq, const MinedPatterns& patterns, Rng& rng) {
  const auto candidates = detail::stat_delete_candidates(seq, patterns);
  if (candidates.empty()) throw ContractError("stat_delete called on inapplicable sequence");
  const auto& choice = candidates[rng.index(candidates.size())];
  const auto& rule = patterns.insertion_rules[choice.rule_index];

  RewriteResult result;
  result.edit.kind = TransformKind::kStatDelete;
  result.edit.pos = choice.pos + 1;
  result.edit.removed = rule.pi;
  result.sequence = detail::splice(seq, choice.pos + 1, rule.pi.size(), {});
  return result;
}

// Substitutes one XOR branch for a different alternative from the same
// replacement set.
inline RewriteResult stat_replace(Seq seq, const MinedPatterns& patterns, Rng& rng) {
  std::vector<detail::ReplaceCandidate> candidates;
  for (const auto& cand : detail::stat_replace_candidates(seq, patterns)) {
    if (patterns.xor_sets[cand.set_index].alternatives.size() >= 2) candidates.push_back(cand);
  }
  if (candidates.empty()) throw ContractError("stat_replace called on inapplicable sequence");
  const auto& choice = candidates[rng.index(candidates.size())];
  const auto& set = patterns.xor_sets[choice.set_index];

  // pick rho_j uniformly among the other alternatives
  std::size_t other = rng.index(set.alternatives.size() - 1);
  if (other >= choice.alt_index) ++other;
  const auto& rho_i = set.alternatives[choice.alt_index].rho;
  const auto& rho_j = set.alternatives[other].rho;

  RewriteResult result;
  result.edit.kind = TransformKind::kStatReplace;
  result.edit.pos = choice.pos + 1;
  result.edit.removed = rho_i;
  result.edit.inserted = rho_j;
  result.sequence = detail::splice(seq, choice.pos + 1, rho_i.size(), rho_j);
  return result;
}

// Structure-agnostic fallbacks.

inline RewriteResult rand_insert(Seq seq, const ActivityVocab& vocab, Rng& rng) {
  if (vocab.real_count() == 0) throw ContractError("rand_insert needs a non-empty vocabulary");
  const std::size_t pos = rng.index(seq.size() + 1);
  const ActivityId act =
      static_cast<ActivityId>(kReservedIds + rng.index(vocab.real_count()));

  RewriteResult result;
  result.edit.kind = TransformKind::kRandInsert;
  result.edit.pos = pos;
  result.edit.inserted = {act};
  result.sequence = detail::splice(seq, pos, 0, result.edit.inserted);
  return result;
}

inline RewriteResult rand_delete(Seq seq, Rng& rng) {
  if (seq.size() < 2) throw ContractError("rand_delete needs at least 2 events");
  const std::size_t pos = rng.index(seq.size());

  RewriteResult result;
  result.edit.kind = TransformKind::kRandDelete;
  result.edit.pos = pos;
  result.edit.removed = {seq[pos]};
  result.sequence = detail::splice(seq, pos, 1, {});
  return result;
}

inline RewriteResult rand_replace(Seq seq, const ActivityVocab& vocab, Rng& rng) {
  if (vocab.real_count() < 2) throw ContractError("rand_replace needs >= 2 real activities");
  if (seq.empty()) throw ContractError("rand_replace on empty sequence");
  const std::size_t pos = rng.index(seq.size());
  const ActivityId current = seq[pos];
  // uniform over the vocabulary minus the current activity
  ActivityId act;
  if (vocab.is_real(current)) {
    act = static_cast<ActivityId>(kReservedIds + rng.index(vocab.real_count() - 1));
    if (act >= current) ++act;
  } else {
    act = static_cast<ActivityId>(kReservedIds + rng.index(vocab.real_count()));
  }

  RewriteResult result;
  result.edit.kind = TransformKind::kRandReplace;
  result.edit.pos = pos;
  result.edit.removed = {current};
  result.edit.inserted = {act};
  result.sequence = detail::splice(seq, pos, 1, result.edit.inserted);
  return result;
}

inline bool applicable(const Transformation& t, Seq seq, const ActivityVocab& vocab) {
  switch (t.kind) {
    case TransformKind::kStatInsert:
      return !detail::stat_insert_candidates(seq, *t.patterns).empty();
    case TransformKind::kStatDelete:
      return !detail::stat_delete_candidates(seq, *t.patterns).empty();
    case TransformKind::kStatReplace: {
      for (const auto& cand : detail::stat_replace_candidates(seq, *t.patterns)) {
        if (t.patterns->xor_sets[cand.set_index].alternatives.size() >= 2) return true;
      }
      return false;
    }
    case TransformKind::kRandInsert:
      return vocab.real_count() >= 1;
    case TransformKind::kRandDelete:
      return seq.size() >= 2;
    case TransformKind::kRandReplace:
      return vocab.real_count() >= 2 && !seq.empty();
  }
  return false;
}

inline RewriteResult apply_transform(const Transformation& t, Seq seq, const ActivityVocab& vocab,
                                     Rng& rng) {
  switch (t.kind) {
    case TransformKind::kStatInsert: return stat_insert(seq, *t.patterns, rng);
    case TransformKind::kStatDelete: return stat_delete(seq, *t.patterns, rng);
    case TransformKind::kStatReplace: return stat_replace(seq, *t.patterns, rng);
    case TransformKind::kRandInsert: return rand_insert(seq, vocab, rng);
    case TransformKind::kRandDelete: return rand_delete(seq, rng);
    case TransformKind::kRandReplace: return rand_replace(seq, vocab, rng);
  }
  throw ContractError("unknown transform kind");
}

}  // namespace siamaug
