#include <catch2/catch.hpp>

#include "siamaug/pipeline.hpp"
#include "support/builders.hpp"

using namespace siamaug;

TEST_CASE("pretraining prefixes cover every k") {
  const auto log = testing::log_from_sequences({{"A", "B", "C"}, {"A"}});
  const auto prefixes = pretraining_prefixes(log);
  REQUIRE(prefixes.size() == 4);
  REQUIRE(prefixes[0].size() == 1);
  REQUIRE(prefixes[2].size() == 3);
}

TEST_CASE("supervised examples match the task definitions") {
  const auto log = testing::make_xor_process_log(20, 71);
  const auto next = supervised_examples(log, PredictionTask::kNextActivity);
  std::size_t total_events = 0;
  for (const auto& t : log.traces) total_events += t.events.size();
  REQUIRE(next.size() == total_events);

  const std::set<ActivityId> outcome{log.vocab.id_of("F1")};
  const auto out = supervised_examples(log, PredictionTask::kOutcome, outcome);
  REQUIRE(out.size() == total_events - log.size());
  for (const auto& ex : out) {
    REQUIRE((ex.label == 0 || ex.label == 1));
  }
}

TEST_CASE("ablation harness runs all three strategies deterministically") {
  const auto log = testing::make_xor_process_log(60, 73);
  const auto split = temporal_split(log);
  const auto train = select_cases(log, split.train);
  const auto val = select_cases(log, split.validation);
  const auto test = select_cases(log, split.test);

  MiningConfig mining;
  mining.beta = 0.01;
  const auto patterns = mine_all(train, mining);

  AblationSetup setup;
  setup.encoder.vocab_size = log.vocab.size();
  setup.encoder.embed_dim = 8;
  setup.encoder.hidden_dim = 16;
  setup.encoder.max_len = 16;
  setup.pretrain_cfg.epochs = 2;
  setup.pretrain_cfg.batch_size = 32;
  setup.pretrain_cfg.seed = 100;
  setup.finetune_cfg.epochs = 3;
  setup.finetune_cfg.batch_size = 32;
  setup.finetune_cfg.seed = 500;
  setup.repetitions = 2;

  const auto result = run_ablation(train, val, test, patterns, setup);
  for (const auto* outcome :
       {&result.supervised, &result.random_pretrain, &result.statistical_pretrain}) {
    REQUIRE(outcome->accuracies.size() == 2);
    for (double acc : outcome->accuracies) {
      REQUIRE(acc >= 0.0);
      REQUIRE(acc <= 1.0);
    }
    REQUIRE(outcome->mean == Approx((outcome->accuracies[0] + outcome->accuracies[1]) / 2.0));
  }

  const auto again = run_ablation(train, val, test, patterns, setup);
  REQUIRE(again.supervised.accuracies == result.supervised.accuracies);
  REQUIRE(again.random_pretrain.accuracies == result.random_pretrain.accuracies);
  REQUIRE(again.statistical_pretrain.accuracies == result.statistical_pretrain.accuracies);
}
