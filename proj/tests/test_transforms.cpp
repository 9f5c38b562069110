#include <catch2/catch.hpp>
#include <map>

#include "siamaug/pattern_miner.hpp"
#include "siamaug/transforms.hpp"
#include "support/builders.hpp"

using namespace siamaug;

namespace {

// Hand-built patterns over the vocabulary of `log`, finalized for lookup.
MinedPatterns patterns_with(const EventLog& log, std::vector<InsertionRule> rules,
                            std::vector<XorReplacementSet> sets) {
  MinedPatterns p;
  p.config.lambda_max = 4;
  for (const auto& r : rules) p.followers.push_back({r.b, r.c, 1, 1.0});
  p.insertion_rules = std::move(rules);
  p.xor_sets = std::move(sets);
  p.source_fingerprint = fingerprint(log);
  p.finalize();
  return p;
}

std::vector<ActivityId> ids(const EventLog& log, const std::vector<std::string>& names) {
  std::vector<ActivityId> out;
  for (const auto& n : names) out.push_back(log.vocab.id_of(n));
  return out;
}

// Checks the documented edit relation: output = prefix + inserted + suffix.
void check_edit_relation(const std::vector<ActivityId>& input, const RewriteResult& result) {
  std::vector<ActivityId> rebuilt(input.begin(),
                                  input.begin() + static_cast<std::ptrdiff_t>(result.edit.pos));
  rebuilt.insert(rebuilt.end(), result.edit.inserted.begin(), result.edit.inserted.end());
  rebuilt.insert(rebuilt.end(),
                 input.begin() + static_cast<std::ptrdiff_t>(result.edit.pos +
                                                             result.edit.removed.size()),
                 input.end());
  REQUIRE(rebuilt == result.sequence);
  // removed tokens really were at pos
  const std::vector<ActivityId> removed(
      input.begin() + static_cast<std::ptrdiff_t>(result.edit.pos),
      input.begin() + static_cast<std::ptrdiff_t>(result.edit.pos + result.edit.removed.size()));
  REQUIRE(removed == result.edit.removed);
}

}  // namespace

TEST_CASE("applicability predicates") {
  const auto log = testing::log_from_sequences({{"A", "X", "B"}});
  const auto patterns =
      patterns_with(log, {{log.vocab.id_of("A"), log.vocab.id_of("B"), ids(log, {"X"}), 0.5}}, {});

  const auto stat_ins = Transformation::statistical(TransformKind::kStatInsert, patterns);
  const auto stat_del = Transformation::statistical(TransformKind::kStatDelete, patterns);
  const auto rand_del = Transformation::random(TransformKind::kRandDelete);

  const auto adjacent = ids(log, {"A", "B"});
  REQUIRE(applicable(stat_ins, adjacent, log.vocab));
  REQUIRE_FALSE(applicable(stat_del, adjacent, log.vocab));

  const auto with_pi = ids(log, {"A", "X", "B"});
  REQUIRE(applicable(stat_del, with_pi, log.vocab));
  REQUIRE_FALSE(applicable(stat_ins, with_pi, log.vocab));

  const auto singleton = ids(log, {"A"});
  REQUIRE_FALSE(applicable(rand_del, singleton, log.vocab));
  REQUIRE(applicable(Transformation::random(TransformKind::kRandInsert), singleton, log.vocab));
}

TEST_CASE("stat_insert splices the intermediate sequence") {
  const auto log = testing::log_from_sequences({{"A", "X", "B"}});
  const auto patterns =
      patterns_with(log, {{log.vocab.id_of("A"), log.vocab.id_of("B"), ids(log, {"X"}), 0.5}}, {});
  Rng rng(1);
  const auto input = ids(log, {"A", "B"});
  const auto result = stat_insert(input, patterns, rng);
  REQUIRE(result.sequence == ids(log, {"A", "X", "B"}));
  check_edit_relation(input, result);

  SECTION("inapplicable call is a contract violation") {
    Rng r2(1);
    const auto bad = ids(log, {"X"});
    REQUIRE_THROWS_AS(stat_insert(bad, patterns, r2), ContractError);
  }
}

TEST_CASE("stat_insert picks match sites uniformly") {
  const auto log = testing::log_from_sequences({{"A", "X", "B", "A", "B"}});
  const auto patterns =
      patterns_with(log, {{log.vocab.id_of("A"), log.vocab.id_of("B"), ids(log, {"X"}), 0.5}}, {});
  const auto input = ids(log, {"A", "B", "A", "B"});
  std::map<std::vector<ActivityId>, int> counts;
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    Rng rng(seed);
    ++counts[stat_insert(input, patterns, rng).sequence];
  }
  REQUIRE(counts.size() == 2);
  const auto first = ids(log, {"A", "X", "B", "A", "B"});
  const auto second = ids(log, {"A", "B", "A", "X", "B"});
  REQUIRE(counts.at(first) == Approx(500).margin(50));
  REQUIRE(counts.at(second) == Approx(500).margin(50));
}

TEST_CASE("stat_insert over several rules changes length accordingly") {
  const auto log = testing::log_from_sequences({{"A", "X", "B", "Y", "Z"}});
  const auto patterns = patterns_with(
      log, {{log.vocab.id_of("A"), log.vocab.id_of("B"), ids(log, {"X"}), 0.5},
            {log.vocab.id_of("A"), log.vocab.id_of("B"), ids(log, {"Y", "Z"}), 0.5}},
      {});
  const auto input = ids(log, {"A", "B"});
  std::set<std::size_t> lengths;
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    Rng rng(seed);
    lengths.insert(stat_insert(input, patterns, rng).sequence.size());
  }
  REQUIRE(lengths == std::set<std::size_t>{3, 4});
}

TEST_CASE("stat_delete removes the intermediate sequence") {
  const auto log = testing::log_from_sequences({{"A", "Y", "Z", "B"}});
  const auto patterns = patterns_with(
      log, {{log.vocab.id_of("A"), log.vocab.id_of("B"), ids(log, {"Y", "Z"}), 0.5}}, {});
  Rng rng(3);
  const auto input = ids(log, {"A", "Y", "Z", "B"});
  const auto result = stat_delete(input, patterns, rng);
  REQUIRE(result.sequence == ids(log, {"A", "B"}));
  check_edit_relation(input, result);
}

TEST_CASE("stat_delete inverts stat_insert on a unique match") {
  const auto log = testing::log_from_sequences({{"A", "X", "B"}});
  const auto patterns =
      patterns_with(log, {{log.vocab.id_of("A"), log.vocab.id_of("B"), ids(log, {"X"}), 0.5}}, {});
  Rng rng(5);
  const auto original = ids(log, {"A", "B"});
  const auto inserted = stat_insert(original, patterns, rng).sequence;
  const auto restored = stat_delete(inserted, patterns, rng).sequence;
  REQUIRE(restored == original);
}

TEST_CASE("stat_replace swaps XOR branches") {
  const auto log = testing::log_from_sequences({{"D", "P", "E", "Q", "R", "S"}});
  XorReplacementSet set;
  set.d = log.vocab.id_of("D");
  set.e = log.vocab.id_of("E");
  set.alternatives = {{ids(log, {"P"}), 0.5}, {ids(log, {"Q"}), 0.5}};
  const auto patterns = patterns_with(log, {}, {set});

  Rng rng(1);
  const auto input = ids(log, {"D", "P", "E"});
  const auto result = stat_replace(input, patterns, rng);
  REQUIRE(result.sequence == ids(log, {"D", "Q", "E"}));
  check_edit_relation(input, result);

  SECTION("never yields the input branch") {
    XorReplacementSet three;
    three.d = log.vocab.id_of("D");
    three.e = log.vocab.id_of("E");
    three.alternatives = {{ids(log, {"P"}), 0.4},
                          {ids(log, {"Q"}), 0.4},
                          {ids(log, {"R", "S"}), 0.4}};
    const auto p3 = patterns_with(log, {}, {three});
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Rng r(seed);
      const auto out = stat_replace(input, p3, r);
      REQUIRE(out.sequence != input);
      // length arithmetic: |seq| - |rho_i| + |rho_j|
      REQUIRE(out.sequence.size() == input.size() - out.edit.removed.size() +
                                         out.edit.inserted.size());
    }
  }
}

TEST_CASE("random rewriters") {
  const auto log = testing::log_from_sequences({{"A", "B"}});
  const auto a = log.vocab.id_of("A");
  const auto b = log.vocab.id_of("B");

  SECTION("rand_delete has two outcomes") {
    std::set<std::vector<ActivityId>> outcomes;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      Rng rng(seed);
      outcomes.insert(rand_delete(std::vector<ActivityId>{a, b}, rng).sequence);
    }
    REQUIRE(outcomes == std::set<std::vector<ActivityId>>{{a}, {b}});
  }

  SECTION("rand_replace never returns the input") {
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
      Rng rng(seed);
      const std::vector<ActivityId> input{a, b};
      REQUIRE(rand_replace(input, log.vocab, rng).sequence != input);
    }
  }

  SECTION("rand_insert outcome distribution matches exhaustive enumeration") {
    // positions {0,1} x activities {A,B}: AA arises twice, AB and BA once
    // each, so expect 1/2, 1/4, 1/4 over 10^4 draws.
    std::map<std::vector<ActivityId>, int> counts;
    const std::vector<ActivityId> input{a};
    const int draws = 10000;
    for (int seed = 0; seed < draws; ++seed) {
      Rng rng(static_cast<std::uint64_t>(seed));
      ++counts[rand_insert(input, log.vocab, rng).sequence];
    }
    REQUIRE(counts.size() == 3);
    double chi_square = 0.0;
    const std::map<std::vector<ActivityId>, double> expected{
        {{a, a}, draws / 2.0}, {{a, b}, draws / 4.0}, {{b, a}, draws / 4.0}};
    for (const auto& [outcome, expect] : expected) {
      const double observed = counts.at(outcome);
      chi_square += (observed - expect) * (observed - expect) / expect;
    }
    // 2 degrees of freedom; 13.8 is the 0.1% critical value
    REQUIRE(chi_square < 13.8);
  }
}

TEST_CASE("rewriters are pure functions of (sequence, patterns, rng state)") {
  const auto log = testing::make_xor_process_log(40, 8);
  MiningConfig config;
  config.beta = 0.01;
  const auto patterns = mine_all(log, config);
  const auto input = log.traces[0].activities();
  for (auto kind : {TransformKind::kStatInsert, TransformKind::kStatDelete,
                    TransformKind::kStatReplace, TransformKind::kRandInsert,
                    TransformKind::kRandDelete, TransformKind::kRandReplace}) {
    const Transformation t = is_statistical(kind) ? Transformation::statistical(kind, patterns)
                                                  : Transformation::random(kind);
    if (!applicable(t, input, log.vocab)) continue;
    Rng r1(42), r2(42);
    REQUIRE(apply_transform(t, input, log.vocab, r1).sequence ==
            apply_transform(t, input, log.vocab, r2).sequence);
  }
}

TEST_CASE("no rewriter emits PAD or EOS") {
  const auto log = testing::make_xor_process_log(60, 13);
  MiningConfig config;
  config.beta = 0.01;
  const auto patterns = mine_all(log, config);
  Rng rng(7);
  for (int i = 0; i < 500; ++i) {
    const auto& trace = log.traces[rng.index(log.size())];
    const auto input = trace.activities();
    for (auto kind : {TransformKind::kStatInsert, TransformKind::kStatDelete,
                      TransformKind::kStatReplace, TransformKind::kRandInsert,
                      TransformKind::kRandDelete, TransformKind::kRandReplace}) {
      const Transformation t = is_statistical(kind) ? Transformation::statistical(kind, patterns)
                                                    : Transformation::random(kind);
      if (!applicable(t, input, log.vocab)) continue;
      const auto result = apply_transform(t, input, log.vocab, rng);
      REQUIRE_FALSE(result.sequence.empty());
      REQUIRE(result.sequence != input);
      for (ActivityId id : result.sequence) {
        REQUIRE(id != kPadId);
        REQUIRE(id != kEosId);
        REQUIRE(log.vocab.is_real(id));
      }
    }
  }
}

TEST_CASE("non-overlapping match scan allows endpoint reuse") {
  const auto log = testing::log_from_sequences({{"A", "X", "A", "X", "A"}});
  const auto a = log.vocab.id_of("A");
  const auto x = log.vocab.id_of("X");
  const std::vector<ActivityId> pi{x};
  const std::vector<ActivityId> seq{a, x, a, x, a};
  const auto sites = find_pattern_sites(seq, a, pi, a);
  // interiors are disjoint; the closing A at index 2 opens the second match
  REQUIRE(sites == std::vector<std::size_t>{0, 2});
}
