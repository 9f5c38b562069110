#include <algorithm>
#include <catch2/catch.hpp>

#include "siamaug/pattern_miner.hpp"
#include "support/builders.hpp"
#include "support/oracle.hpp"

using namespace siamaug;

namespace {

// Mirrors a library log as the oracle's plain index sequences.
testing::oracle::Logs to_oracle(const EventLog& log) {
  testing::oracle::Logs out;
  for (const auto& t : log.traces) {
    testing::oracle::Sequence seq;
    for (ActivityId a : t.activities()) seq.push_back(a);
    out.push_back(std::move(seq));
  }
  return out;
}

// Canonical forms for comparing mined output against the oracle.
std::set<std::pair<int, int>> follower_set(const std::vector<FollowerPair>& followers) {
  std::set<std::pair<int, int>> out;
  for (const auto& f : followers) out.insert({f.b, f.c});
  return out;
}

std::set<std::vector<int>> rule_set(const std::vector<InsertionRule>& rules) {
  std::set<std::vector<int>> out;
  for (const auto& r : rules) {
    std::vector<int> window{r.b};
    window.insert(window.end(), r.pi.begin(), r.pi.end());
    window.push_back(r.c);
    out.insert(window);
  }
  return out;
}

std::map<std::pair<int, int>, std::set<std::vector<int>>> xor_map(
    const std::vector<XorReplacementSet>& sets) {
  std::map<std::pair<int, int>, std::set<std::vector<int>>> out;
  for (const auto& s : sets) {
    for (const auto& alt : s.alternatives) {
      out[{s.d, s.e}].insert(std::vector<int>(alt.rho.begin(), alt.rho.end()));
    }
  }
  return out;
}

std::set<std::pair<int, int>> oracle_follower_set(
    const std::map<std::pair<int, int>, std::size_t>& followers) {
  std::set<std::pair<int, int>> out;
  for (const auto& [pair, count] : followers) out.insert(pair);
  return out;
}

EventLog random_micro_log(Rng& rng) {
  const std::size_t n_traces = 1 + rng.index(8);
  const std::size_t n_activities = 1 + rng.index(5);
  std::vector<std::vector<std::string>> seqs;
  for (std::size_t t = 0; t < n_traces; ++t) {
    std::vector<std::string> seq;
    const std::size_t len = 1 + rng.index(6);
    for (std::size_t i = 0; i < len; ++i) {
      seq.push_back(std::string(1, static_cast<char>('a' + rng.index(n_activities))));
    }
    seqs.push_back(std::move(seq));
  }
  return testing::log_from_sequences(seqs);
}

}  // namespace

TEST_CASE("filter_log thresholds") {
  SECTION("alpha = 0 keeps everything") {
    const auto log = testing::make_xor_process_log(20, 5);
    REQUIRE(filter_log(log, 0.0).size() == log.size());
  }
  SECTION("rare activity drops its traces") {
    // X occurs in 1 of 10 cases; alpha 0.2 needs 2
    std::vector<std::vector<std::string>> seqs(9, {"A", "B"});
    seqs.push_back({"A", "X", "B"});
    const auto log = testing::log_from_sequences(seqs);
    const auto filtered = filter_log(log, 0.2);
    REQUIRE(filtered.size() == 9);
    const auto oracle = testing::oracle::filter_log(to_oracle(log), 0.2);
    REQUIRE(oracle.size() == 9);
  }
  SECTION("paper default is near-vacuous at small scale") {
    const auto log = testing::make_xor_process_log(200, 5);
    REQUIRE(filter_log(log, 1e-4).size() == log.size());
  }
}

TEST_CASE("direct follower mining") {
  SECTION("beta filters by transition share") {
    const auto log = testing::log_from_sequences({{"A", "B"}, {"A", "B"}, {"A", "B"}, {"A", "C"}});
    const auto followers = mine_direct_followers(log, 0.5);
    REQUIRE(followers.size() == 1);
    REQUIRE(followers[0].b == log.vocab.id_of("A"));
    REQUIRE(followers[0].c == log.vocab.id_of("B"));
    REQUIRE(followers[0].support == Approx(0.75));
  }
  SECTION("beta = 0 keeps all observed pairs") {
    const auto log = testing::log_from_sequences({{"A", "B", "C"}, {"C", "A"}});
    REQUIRE(mine_direct_followers(log, 0.0).size() == 3);
  }
  SECTION("single-event traces yield nothing") {
    const auto log = testing::log_from_sequences({{"A"}, {"B"}});
    REQUIRE(mine_direct_followers(log, 0.0).empty());
  }
}

TEST_CASE("intermediate sequence mining") {
  // transitions: A-X x2, X-B x2, A-B x2 -> total 6; (A,B) support 1/3
  const auto log = testing::log_from_sequences({{"A", "X", "B"}, {"A", "X", "B"}, {"A", "B"},
                                                {"A", "B"}});
  const auto followers = mine_direct_followers(log, 0.25);
  const auto rules = mine_intermediate_sequences(log, followers, 0.5, 4);
  REQUIRE(rules.size() == 1);
  REQUIRE(rules[0].b == log.vocab.id_of("A"));
  REQUIRE(rules[0].c == log.vocab.id_of("B"));
  REQUIRE(rules[0].pi == std::vector<ActivityId>{log.vocab.id_of("X")});
  REQUIRE(rules[0].trace_support == Approx(0.5));

  SECTION("unattainable gamma removes all rules") {
    REQUIRE(mine_intermediate_sequences(log, followers, 1.0, 4).empty());
  }
  SECTION("lambda_max caps the interior length") {
    const auto long_log = testing::log_from_sequences(
        {{"A", "P", "Q", "R", "B"}, {"A", "P", "Q", "R", "B"}, {"A", "B"}});
    const auto f = mine_direct_followers(long_log, 0.0);
    REQUIRE(rule_set(mine_intermediate_sequences(long_log, f, 0.5, 2)).count(
                {long_log.vocab.id_of("A"), long_log.vocab.id_of("P"), long_log.vocab.id_of("Q"),
                 long_log.vocab.id_of("R"), long_log.vocab.id_of("B")}) == 0);
    REQUIRE(rule_set(mine_intermediate_sequences(long_log, f, 0.5, 3)).count(
                {long_log.vocab.id_of("A"), long_log.vocab.id_of("P"), long_log.vocab.id_of("Q"),
                 long_log.vocab.id_of("R"), long_log.vocab.id_of("B")}) == 1);
  }
}

TEST_CASE("xor structure mining") {
  const auto log =
      testing::log_from_sequences({{"D", "P", "E"}, {"D", "P", "E"}, {"D", "Q", "E"},
                                   {"D", "Q", "E"}});
  SECTION("delta at the boundary keeps both alternatives (inclusive)") {
    const auto sets = mine_xor_structures(log, 0.5, 4);
    REQUIRE(sets.size() >= 1);
    const auto m = xor_map(sets);
    const auto key = std::make_pair<int, int>(log.vocab.id_of("D"), log.vocab.id_of("E"));
    REQUIRE(m.at(key) ==
            std::set<std::vector<int>>{{log.vocab.id_of("P")}, {log.vocab.id_of("Q")}});
  }
  SECTION("delta above the boundary drops them") {
    const auto sets = mine_xor_structures(log, 0.5 + 1e-9, 4);
    const auto m = xor_map(sets);
    REQUIRE(m.find(std::make_pair<int, int>(log.vocab.id_of("D"), log.vocab.id_of("E"))) ==
            m.end());
  }
  SECTION("a single variant yields no set") {
    const auto mono = testing::log_from_sequences({{"D", "P", "E"}, {"D", "P", "E"}});
    REQUIRE(mine_xor_structures(mono, 0.0, 4).empty());
  }
}

TEST_CASE("mine_all composition and fingerprint") {
  MiningConfig config;  // paper defaults: 1e-4 thresholds, lambda_max 4
  REQUIRE(config.alpha == 1e-4);
  REQUIRE(config.lambda_max == 4);

  SECTION("degenerate log mines empty pattern lists with a warning") {
    const auto log = testing::log_from_sequences({{"A"}, {"B"}, {"C"}});
    const auto patterns = mine_all(log, config);
    REQUIRE(patterns.insertion_rules.empty());
    REQUIRE(patterns.xor_sets.empty());
    REQUIRE_FALSE(patterns.warnings.empty());
  }
  SECTION("fingerprint pins the source log") {
    const auto log = testing::make_xor_process_log(30, 1);
    auto mutated = log;
    mutated.traces[0].events[0].activity = mutated.vocab.id_of("B");
    REQUIRE(mine_all(log, config).source_fingerprint !=
            mine_all(mutated, config).source_fingerprint);
  }
  SECTION("consistency: every rule endpoint pair is a retained follower") {
    const auto log = testing::make_xor_process_log(100, 2);
    const auto patterns = mine_all(log, config);
    REQUIRE_FALSE(patterns.insertion_rules.empty());
    for (const auto& r : patterns.insertion_rules) {
      REQUIRE(patterns.has_follower(r.b, r.c));
      REQUIRE(r.pi.size() >= 1);
      REQUIRE(r.pi.size() <= static_cast<std::size_t>(config.lambda_max));
    }
    for (const auto& s : patterns.xor_sets) {
      REQUIRE(s.alternatives.size() >= 2);
      for (const auto& alt : s.alternatives) {
        REQUIRE(alt.rho.size() >= 1);
        REQUIRE(alt.rho.size() <= static_cast<std::size_t>(config.lambda_max));
      }
    }
  }
}

TEST_CASE("mining is deterministic and independent of trace order") {
  const auto log = testing::make_xor_process_log(60, 9);
  auto shuffled = log;
  Rng rng(4);
  for (std::size_t i = shuffled.traces.size(); i > 1; --i) {
    std::swap(shuffled.traces[i - 1], shuffled.traces[rng.index(i)]);
  }
  MiningConfig config;
  config.beta = 0.01;
  config.gamma = 0.05;
  config.delta = 0.05;
  const auto a = mine_all(log, config);
  const auto b = mine_all(shuffled, config);
  REQUIRE(follower_set(a.followers) == follower_set(b.followers));
  REQUIRE(rule_set(a.insertion_rules) == rule_set(b.insertion_rules));
  REQUIRE(xor_map(a.xor_sets) == xor_map(b.xor_sets));
}

TEST_CASE("oracle equivalence on random micro-logs") {
  Rng rng(2024);
  for (int i = 0; i < 40; ++i) {
    const auto log = random_micro_log(rng);
    MiningConfig config;
    config.alpha = rng.real01() * 0.6;
    config.beta = rng.real01() * 0.4;
    config.gamma = rng.real01() * 0.6;
    config.delta = rng.real01() * 0.6;
    config.lambda_max = 1 + static_cast<int>(rng.index(4));

    const auto patterns = mine_all(log, config);

    const auto oracle_filtered = testing::oracle::filter_log(to_oracle(log), config.alpha);
    const auto oracle_followers = testing::oracle::direct_followers(oracle_filtered, config.beta);
    const auto oracle_rules = testing::oracle::insertion_rules(oracle_filtered, config.beta,
                                                               config.gamma, config.lambda_max);
    const auto oracle_xor =
        testing::oracle::xor_sets(oracle_filtered, config.delta, config.lambda_max);

    REQUIRE(follower_set(patterns.followers) == oracle_follower_set(oracle_followers));
    REQUIRE(rule_set(patterns.insertion_rules) == oracle_rules);
    REQUIRE(xor_map(patterns.xor_sets) == oracle_xor);
  }
}

// Monotonicity holds for beta/gamma/delta over a fixed filtered log. It does
// not hold for alpha: dropping traces shrinks the support denominators, which
// can promote surviving patterns past the other thresholds.
TEST_CASE("monotonicity: raising beta, gamma or delta never adds a pattern") {
  Rng rng(77);
  for (int i = 0; i < 20; ++i) {
    const auto log = random_micro_log(rng);
    MiningConfig lo;
    lo.alpha = rng.real01() * 0.3;
    lo.beta = rng.real01() * 0.2;
    lo.gamma = rng.real01() * 0.3;
    lo.delta = rng.real01() * 0.3;
    lo.lambda_max = 3;
    MiningConfig hi = lo;
    switch (rng.index(3)) {
      case 0: hi.beta += 0.2; break;
      case 1: hi.gamma += 0.3; break;
      default: hi.delta += 0.3; break;
    }
    const auto loose = mine_all(log, lo);
    const auto tight = mine_all(log, hi);
    const auto loose_followers = follower_set(loose.followers);
    for (const auto& f : follower_set(tight.followers)) {
      REQUIRE(loose_followers.count(f) == 1);
    }
    const auto loose_rules = rule_set(loose.insertion_rules);
    for (const auto& r : rule_set(tight.insertion_rules)) {
      REQUIRE(loose_rules.count(r) == 1);
    }
    const auto loose_xor = xor_map(loose.xor_sets);
    for (const auto& [pair, alts] : xor_map(tight.xor_sets)) {
      for (const auto& alt : alts) REQUIRE(loose_xor.at(pair).count(alt) == 1);
    }
  }
}

TEST_CASE("patterns JSON round trip") {
  const auto log = testing::make_xor_process_log(80, 3);
  MiningConfig config;
  config.beta = 0.01;
  const auto patterns = mine_all(log, config);
  REQUIRE_FALSE(patterns.empty());

  const auto j = patterns_to_json(patterns, log.vocab);
  const auto loaded = patterns_from_json(j, log.vocab);
  REQUIRE(follower_set(loaded.followers) == follower_set(patterns.followers));
  REQUIRE(rule_set(loaded.insertion_rules) == rule_set(patterns.insertion_rules));
  REQUIRE(xor_map(loaded.xor_sets) == xor_map(patterns.xor_sets));
  REQUIRE(loaded.source_fingerprint == patterns.source_fingerprint);
  REQUIRE(loaded.config.lambda_max == patterns.config.lambda_max);

  SECTION("unknown activity names fail fast") {
    const auto other = testing::log_from_sequences({{"Z1", "Z2"}});
    REQUIRE_THROWS_AS(patterns_from_json(j, other.vocab), ConfigError);
  }
  SECTION("wrong format is rejected") {
    REQUIRE_THROWS_AS(patterns_from_json(nlohmann::json{{"format", "nope"}}, log.vocab),
                      ParseError);
  }
}
