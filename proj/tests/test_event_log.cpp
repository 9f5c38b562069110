#include <catch2/catch.hpp>

#include "siamaug/csv.hpp"
#include "siamaug/event_log.hpp"
#include "support/builders.hpp"

using namespace siamaug;

namespace {
const std::string kFixtures = SIAMAUG_FIXTURE_DIR;
}

TEST_CASE("vocab assigns dense sorted ids after the reserved tokens") {
  auto vocab = ActivityVocab::from_names({"B", "A", "C", "A"});
  REQUIRE(vocab.size() == 5);
  REQUIRE(vocab.real_count() == 3);
  REQUIRE(vocab.id_of("A") == 2);
  REQUIRE(vocab.id_of("B") == 3);
  REQUIRE(vocab.id_of("C") == 4);
  REQUIRE(vocab.name_of(kPadId) == ActivityVocab::kPadName);
  REQUIRE(vocab.name_of(kEosId) == ActivityVocab::kEosName);
  REQUIRE_FALSE(vocab.is_real(kPadId));
  REQUIRE_FALSE(vocab.is_real(kEosId));
  // real ids form a contiguous range
  const auto ids = vocab.real_ids();
  for (std::size_t i = 0; i < ids.size(); ++i) {
    REQUIRE(ids[i] == static_cast<ActivityId>(kReservedIds + i));
  }
}

TEST_CASE("vocab rejects reserved names") {
  REQUIRE_THROWS_AS(ActivityVocab::from_names({"<PAD>"}), ConfigError);
}

TEST_CASE("temporal split follows the floor rule") {
  SECTION("20 cases -> 13/3/4") {
    std::vector<std::vector<std::string>> seqs(20, {"A", "B"});
    const auto log = testing::log_from_sequences(seqs);
    const auto split = temporal_split(log);
    REQUIRE(split.train.size() == 13);
    REQUIRE(split.validation.size() == 3);
    REQUIRE(split.test.size() == 4);
  }
  SECTION("100 cases -> 65/15/20") {
    std::vector<std::vector<std::string>> seqs(100, {"A"});
    const auto log = testing::log_from_sequences(seqs);
    const auto split = temporal_split(log);
    REQUIRE(split.train.size() == 65);
    REQUIRE(split.validation.size() == 15);
    REQUIRE(split.test.size() == 20);
  }
}

TEST_CASE("temporal split orders by first timestamp then case id") {
  auto log = testing::log_from_sequences({{"A"}, {"A"}, {"A"}, {"A"}});
  // earliest case last in the vector
  log.traces[3].events[0].timestamp_ms = 1;
  const auto split = temporal_split(log, {0.5, 0.25, 0.25});
  REQUIRE(split.train == std::vector<std::string>{"case0004", "case0001"});
  REQUIRE(split.validation == std::vector<std::string>{"case0002"});
  REQUIRE(split.test == std::vector<std::string>{"case0003"});

  SECTION("all-equal timestamps fall back to case id order") {
    auto tied = testing::log_from_sequences({{"A"}, {"B"}, {"C"}, {"D"}});
    for (auto& t : tied.traces) t.events[0].timestamp_ms = 42;
    const auto s = temporal_split(tied, {0.5, 0.25, 0.25});
    REQUIRE(s.train == std::vector<std::string>{"case0001", "case0002"});
    REQUIRE(s.validation == std::vector<std::string>{"case0003"});
    REQUIRE(s.test == std::vector<std::string>{"case0004"});
  }
}

TEST_CASE("temporal split boundary property") {
  const auto log = testing::make_xor_process_log(50, 11);
  const auto split = temporal_split(log);
  const auto train = select_cases(log, split.train);
  const auto test = select_cases(log, split.test);
  std::int64_t max_train = std::numeric_limits<std::int64_t>::min();
  for (const auto& t : train.traces) max_train = std::max(max_train, *t.first_timestamp());
  std::int64_t min_test = std::numeric_limits<std::int64_t>::max();
  for (const auto& t : test.traces) min_test = std::min(min_test, *t.first_timestamp());
  REQUIRE(max_train <= min_test);
}

TEST_CASE("temporal split rejects tiny logs") {
  const auto log = testing::log_from_sequences({{"A"}, {"B"}});
  REQUIRE_THROWS_AS(temporal_split(log), ConfigError);
}

TEST_CASE("next-activity prefixes unroll the definition") {
  const auto log = testing::log_from_sequences({{"A", "B", "C"}});
  const auto examples = generate_prefixes(log.traces[0], PredictionTask::kNextActivity);
  REQUIRE(examples.size() == 3);
  const ActivityId a = log.vocab.id_of("A");
  const ActivityId b = log.vocab.id_of("B");
  const ActivityId c = log.vocab.id_of("C");
  REQUIRE(examples[0].prefix.activities == std::vector<ActivityId>{a});
  REQUIRE(examples[0].target == b);
  REQUIRE(examples[1].prefix.activities == std::vector<ActivityId>{a, b});
  REQUIRE(examples[1].target == c);
  REQUIRE(examples[2].prefix.activities == std::vector<ActivityId>{a, b, c});
  REQUIRE(examples[2].target == kEosId);
}

TEST_CASE("single-event trace predicts EOS") {
  const auto log = testing::log_from_sequences({{"A"}});
  const auto examples = generate_prefixes(log.traces[0], PredictionTask::kNextActivity);
  REQUIRE(examples.size() == 1);
  REQUIRE(examples[0].target == kEosId);
}

TEST_CASE("outcome prefixes drop the final prefix and share the label") {
  const auto log = testing::log_from_sequences({{"A", "B", "C"}});
  const auto examples = generate_prefixes(log.traces[0], PredictionTask::kOutcome, 1);
  REQUIRE(examples.size() == 2);
  for (const auto& ex : examples) REQUIRE(ex.target == 1);
}

TEST_CASE("prefix counts per trace") {
  const auto log = testing::make_xor_process_log(30, 3);
  for (const auto& t : log.traces) {
    REQUIRE(generate_prefixes(t, PredictionTask::kNextActivity).size() == t.events.size());
    REQUIRE(generate_prefixes(t, PredictionTask::kOutcome, 0).size() == t.events.size() - 1);
  }
}

TEST_CASE("outcome label extraction is membership") {
  const auto log = testing::log_from_sequences({{"A", "Release-B", "X"}, {"A", "X"}});
  const ActivityId target = log.vocab.id_of("Release-B");
  REQUIRE(extract_outcome_label(log.traces[0], {target}) == 1);
  REQUIRE(extract_outcome_label(log.traces[1], {target}) == 0);
  REQUIRE_THROWS_AS(extract_outcome_label(log.traces[0], {}), ContractError);
}

TEST_CASE("separate outcome targets give separate labels") {
  const auto log = testing::log_from_sequences({{"Start", "Approved"}, {"Start", "Declined"}});
  const ActivityId approved = log.vocab.id_of("Approved");
  const ActivityId declined = log.vocab.id_of("Declined");
  // one binary run per target
  REQUIRE(extract_outcome_label(log.traces[0], {approved}) == 1);
  REQUIRE(extract_outcome_label(log.traces[1], {approved}) == 0);
  REQUIRE(extract_outcome_label(log.traces[0], {declined}) == 0);
  REQUIRE(extract_outcome_label(log.traces[1], {declined}) == 1);
}

TEST_CASE("fingerprint changes on any trace mutation") {
  const auto base = testing::log_from_sequences({{"A", "B"}, {"A", "C"}});
  auto mutated = base;
  mutated.traces[1].events[1].activity = mutated.vocab.id_of("B");
  REQUIRE(fingerprint(base) != fingerprint(mutated));
  REQUIRE(fingerprint(base) == fingerprint(testing::log_from_sequences({{"A", "B"}, {"A", "C"}})));
}

TEST_CASE("select_cases preserves the requested order and shares the vocab") {
  const auto log = testing::log_from_sequences({{"A"}, {"B"}, {"C"}});
  const auto sub = select_cases(log, {"case0003", "case0001"});
  REQUIRE(sub.size() == 2);
  REQUIRE(sub.traces[0].case_id == "case0003");
  REQUIRE(sub.vocab == log.vocab);
  REQUIRE_THROWS_AS(select_cases(log, {"nope"}), ConfigError);
}
