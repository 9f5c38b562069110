#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "siamaug/augmentor.hpp"
#include "siamaug/common.hpp"
#include "siamaug/event_log.hpp"
#include "siamaug/pattern_miner.hpp"
#include "siamaug/siamese.hpp"

namespace siamaug {

// All prefixes of every trace, as bare activity sequences for the
// self-supervised stage.
inline std::vector<std::vector<ActivityId>> pretraining_prefixes(const EventLog& log) {
  std::vector<std::vector<ActivityId>> out;
  for (const auto& t : log.traces) {
    const auto acts = t.activities();
    for (std::size_t k = 1; k <= acts.size(); ++k) {
      out.emplace_back(acts.begin(), acts.begin() + static_cast<std::ptrdiff_t>(k));
    }
  }
  return out;
}

// Labeled prefix dataset for one task over one (sub-)log.
inline std::vector<SupervisedExample> supervised_examples(
    const EventLog& log, PredictionTask task,
    const std::set<ActivityId>& outcome_activities = {}) {
  std::vector<SupervisedExample> out;
  for (const auto& t : log.traces) {
    std::optional<int> label;
    if (task == PredictionTask::kOutcome) {
      label = extract_outcome_label(t, outcome_activities);
    }
    for (const auto& ex : generate_prefixes(t, task, label)) {
      out.push_back({ex.prefix.activities, static_cast<int>(ex.target)});
    }
  }
  return out;
}

inline std::size_t class_count(const EventLog& log, PredictionTask task) {
  return task == PredictionTask::kNextActivity ? log.vocab.size() : 2;
}

// Most frequent label's share; the floor any useful classifier must beat.
inline double majority_baseline(const std::vector<SupervisedExample>& examples) {
  if (examples.empty()) throw ContractError("majority_baseline on empty set");
  std::map<int, std::size_t> counts;
  for (const auto& ex : examples) ++counts[ex.label];
  std::size_t best = 0;
  for (const auto& [label, count] : counts) best = std::max(best, count);
  return static_cast<double>(best) / static_cast<double>(examples.size());
}

enum class TrainingStrategy { kSupervisedOnly, kRandomPretrain, kStatisticalPretrain };

inline const char* to_string(TrainingStrategy s) {
  switch (s) {
    case TrainingStrategy::kSupervisedOnly: return "supervised-only";
    case TrainingStrategy::kRandomPretrain: return "random-pretrain";
    case TrainingStrategy::kStatisticalPretrain: return "statistical-pretrain";
  }
  return "?";
}

struct StrategyOutcome {
  TrainingStrategy strategy;
  std::vector<double> accuracies;  // one per repetition
  double mean = 0.0;
  double stddev = 0.0;
};

struct AblationResult {
  StrategyOutcome supervised;
  StrategyOutcome random_pretrain;
  StrategyOutcome statistical_pretrain;
};

struct AblationSetup {
  EncoderConfig encoder;
  TrainConfig pretrain_cfg;
  TrainConfig finetune_cfg;
  std::size_t repetitions = 5;
  PredictionTask task = PredictionTask::kNextActivity;
  std::set<ActivityId> outcome_activities;
  // Fraction of labeled training examples the fine-tuning stage may see
  // (earliest first); pretraining always uses every prefix. Label-scarce
  // regimes are where self-supervised pretraining earns its keep.
  double label_fraction = 1.0;
};

namespace detail {

inline void summarize(StrategyOutcome& outcome) {
  double sum = 0.0;
  for (double a : outcome.accuracies) sum += a;
  outcome.mean = sum / static_cast<double>(outcome.accuracies.size());
  double var = 0.0;
  for (double a : outcome.accuracies) var += (a - outcome.mean) * (a - outcome.mean);
  outcome.stddev = std::sqrt(var / static_cast<double>(outcome.accuracies.size()));
}

}  // namespace detail

// Earliest `fraction` of the examples, at least one.
inline std::vector<SupervisedExample> label_subset(const std::vector<SupervisedExample>& examples,
                                                   double fraction) {
  if (fraction <= 0.0 || fraction > 1.0) {
    throw ConfigError("label fraction must lie in (0, 1]");
  }
  if (fraction == 1.0) return examples;
  const auto keep = std::max<std::size_t>(
      1, static_cast<std::size_t>(fraction * static_cast<double>(examples.size())));
  return {examples.begin(), examples.begin() + static_cast<std::ptrdiff_t>(keep)};
}

// Controlled three-way comparison. Repetition i uses seed base+i for every
// strategy, pretraining and fine-tuning alike, so the only difference between
// rows is the pretraining regime.
inline AblationResult run_ablation(const EventLog& train_log, const EventLog& validation_log,
                                   const EventLog& test_log, const MinedPatterns& patterns,
                                   const AblationSetup& setup) {
  const auto train_examples = label_subset(
      supervised_examples(train_log, setup.task, setup.outcome_activities), setup.label_fraction);
  const auto val_examples =
      supervised_examples(validation_log, setup.task, setup.outcome_activities);
  const auto test_examples = supervised_examples(test_log, setup.task, setup.outcome_activities);
  const std::size_t classes = class_count(train_log, setup.task);
  const auto prefixes = pretraining_prefixes(train_log);

  AblationResult result;
  result.supervised.strategy = TrainingStrategy::kSupervisedOnly;
  result.random_pretrain.strategy = TrainingStrategy::kRandomPretrain;
  result.statistical_pretrain.strategy = TrainingStrategy::kStatisticalPretrain;

  for (std::size_t rep = 0; rep < setup.repetitions; ++rep) {
    TrainConfig pre_cfg = setup.pretrain_cfg;
    pre_cfg.seed = setup.pretrain_cfg.seed + rep;
    TrainConfig ft_cfg = setup.finetune_cfg;
    ft_cfg.seed = setup.finetune_cfg.seed + rep;

    auto run_finetune = [&](const EncoderParams* init) {
      const FinetuneResult ft =
          finetune(init, classes, train_examples, val_examples, setup.encoder, ft_cfg);
      return evaluate_classifier(ft.params, test_examples);
    };

    result.supervised.accuracies.push_back(run_finetune(nullptr));

    const auto random_pool = AugmentationPool::random_only();
    const PretrainResult random_pre =
        pretrain(prefixes, random_pool, train_log.vocab, setup.encoder, pre_cfg);
    result.random_pretrain.accuracies.push_back(run_finetune(&random_pre.params.enc));

    const auto stat_pool = AugmentationPool::standard(patterns);
    const PretrainResult stat_pre =
        pretrain(prefixes, stat_pool, train_log.vocab, setup.encoder, pre_cfg);
    result.statistical_pretrain.accuracies.push_back(run_finetune(&stat_pre.params.enc));
  }

  detail::summarize(result.supervised);
  detail::summarize(result.random_pretrain);
  detail::summarize(result.statistical_pretrain);
  return result;
}

}  // namespace siamaug
