// siamaug command line driver: mine -> augment -> entropy -> pretrain ->
// finetune -> evaluate -> ablate over business-process event logs.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "siamaug/augmentor.hpp"
#include "siamaug/csv.hpp"
#include "siamaug/event_log.hpp"
#include "siamaug/metrics.hpp"
#include "siamaug/model_io.hpp"
#include "siamaug/pattern_miner.hpp"
#include "siamaug/pipeline.hpp"
#include "siamaug/siamese.hpp"
#include "siamaug/xes.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace siamaug;

namespace {

// Shortest representation that round-trips; used for all CSV report numbers
// so identical runs produce identical bytes.
std::string format_double(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, ptr);
}

struct RunConfig {
  std::string input;
  std::string format = "auto";  // auto | csv | xes
  CsvMapping csv_mapping;
  std::size_t max_events = 0;

  MiningConfig mining;  // paper defaults: 1e-4 thresholds, lambda_max 4

  double factor = 1.2;
  std::vector<double> factors;  // used by `augment` when non-empty
  std::string augment_scope = "full";  // full | train

  SplitFractions split;

  std::string task = "next-activity";
  std::vector<std::string> outcome_activities;

  EncoderConfig encoder;  // vocab_size filled after loading
  TrainConfig pretrain_cfg;
  TrainConfig finetune_cfg{.tau = 0.0, .learning_rate = 0.05, .batch_size = 64, .epochs = 15,
                           .seed = 7};

  std::uint64_t seed = 7;
  std::size_t repetitions = 5;
  double label_fraction = 1.0;
  std::string output_dir = "out";

  void apply_json(const json& j) {
    if (j.contains("input")) input = j.at("input").get<std::string>();
    if (j.contains("format")) format = j.at("format").get<std::string>();
    if (j.contains("csv")) {
      const auto& c = j.at("csv");
      if (c.contains("case_column")) csv_mapping.case_column = c.at("case_column");
      if (c.contains("activity_column")) csv_mapping.activity_column = c.at("activity_column");
      if (c.contains("timestamp_column")) csv_mapping.timestamp_column = c.at("timestamp_column");
    }
    if (j.contains("max_events")) max_events = j.at("max_events").get<std::size_t>();
    if (j.contains("mining")) {
      const auto& m = j.at("mining");
      if (m.contains("alpha")) mining.alpha = m.at("alpha").get<double>();
      if (m.contains("beta")) mining.beta = m.at("beta").get<double>();
      if (m.contains("gamma")) mining.gamma = m.at("gamma").get<double>();
      if (m.contains("delta")) mining.delta = m.at("delta").get<double>();
      if (m.contains("lambda_max")) mining.lambda_max = m.at("lambda_max").get<int>();
    }
    if (j.contains("augment")) {
      const auto& a = j.at("augment");
      if (a.contains("factor")) factor = a.at("factor").get<double>();
      if (a.contains("factors")) factors = a.at("factors").get<std::vector<double>>();
      if (a.contains("scope")) augment_scope = a.at("scope").get<std::string>();
    }
    if (j.contains("split")) {
      const auto s = j.at("split").get<std::vector<double>>();
      if (s.size() != 3) throw ConfigError("split must have three fractions");
      split = {s[0], s[1], s[2]};
    }
    if (j.contains("task")) {
      const auto& t = j.at("task");
      if (t.contains("type")) task = t.at("type").get<std::string>();
      if (t.contains("outcome_activities")) {
        outcome_activities = t.at("outcome_activities").get<std::vector<std::string>>();
      }
    }
    if (j.contains("encoder")) {
      const auto& e = j.at("encoder");
      if (e.contains("embed_dim")) encoder.embed_dim = e.at("embed_dim").get<std::size_t>();
      if (e.contains("hidden_dim")) encoder.hidden_dim = e.at("hidden_dim").get<std::size_t>();
      if (e.contains("max_len")) encoder.max_len = e.at("max_len").get<std::size_t>();
      if (e.contains("variant")) {
        encoder.variant = encoder_variant_from_string(e.at("variant").get<std::string>());
      }
    }
    auto read_train = [](const json& t, TrainConfig& cfg) {
      if (t.contains("tau")) cfg.tau = t.at("tau").get<double>();
      if (t.contains("learning_rate")) cfg.learning_rate = t.at("learning_rate").get<double>();
      if (t.contains("batch_size")) cfg.batch_size = t.at("batch_size").get<std::size_t>();
      if (t.contains("epochs")) cfg.epochs = t.at("epochs").get<std::size_t>();
    };
    if (j.contains("pretrain")) read_train(j.at("pretrain"), pretrain_cfg);
    if (j.contains("finetune")) {
      read_train(j.at("finetune"), finetune_cfg);
      if (j.at("finetune").contains("label_fraction")) {
        label_fraction = j.at("finetune").at("label_fraction").get<double>();
      }
    }
    if (j.contains("seed")) seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("repetitions")) repetitions = j.at("repetitions").get<std::size_t>();
    if (j.contains("output_dir")) output_dir = j.at("output_dir").get<std::string>();
  }

  PredictionTask task_kind() const {
    if (task == "next-activity") return PredictionTask::kNextActivity;
    if (task == "outcome") return PredictionTask::kOutcome;
    throw ConfigError("unknown task: " + task);
  }

  void validate() const {
    if (input.empty()) throw ConfigError("an input log is required (--input or config file)");
    if (format != "auto" && format != "csv" && format != "xes") {
      throw ConfigError("format must be auto, csv or xes");
    }
    mining.validate();
    split.validate();
    if (factor < 1.0) throw ConfigError("augmentation factor must be >= 1");
    for (double f : factors) {
      if (f < 1.0) throw ConfigError("augmentation factor must be >= 1");
    }
    if (augment_scope != "full" && augment_scope != "train") {
      throw ConfigError("augment scope must be full or train");
    }
    if (task_kind() == PredictionTask::kOutcome && outcome_activities.empty()) {
      throw ConfigError("outcome task requires task.outcome_activities");
    }
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (label_fraction <= 0.0 || label_fraction > 1.0) {
      throw ConfigError("label fraction must lie in (0, 1]");
    }
  }
};

EventLog load_log(const RunConfig& config) {
  CsvReadOptions options;
  options.mapping = config.csv_mapping;
  options.max_events = config.max_events;
  const fs::path path(config.input);
  if (config.format == "csv") return read_csv(path, options);
  if (config.format == "xes") return read_xes(path, config.max_events);
  return read_log_auto(path, options);
}

fs::path output_dir(const RunConfig& config) {
  // env var override wins over config/flags
  if (const char* env = std::getenv("SIAMAUG_OUTPUT_DIR"); env && *env) return fs::path(env);
  return fs::path(config.output_dir);
}

void write_text(const fs::path& path, const std::string& text) {
  fs::create_directories(path.parent_path().empty() ? "." : path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write file: " + path.string());
  out << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open file: " + path.string());
  json j;
  in >> j;
  return j;
}

// Repetitions are independent (distinct seeds, distinct output files), so
// the opt-in parallel mode changes wall time only, never the outputs.
template <typename Out, typename Fn>
std::vector<Out> run_repetitions(std::size_t count, bool parallel, Fn&& fn) {
  std::vector<Out> outputs(count);
  if (parallel && count > 1) {
    std::vector<std::future<Out>> futures;
    futures.reserve(count);
    for (std::size_t rep = 0; rep < count; ++rep) {
      futures.push_back(std::async(std::launch::async, fn, rep));
    }
    for (std::size_t rep = 0; rep < count; ++rep) outputs[rep] = futures[rep].get();
  } else {
    for (std::size_t rep = 0; rep < count; ++rep) outputs[rep] = fn(rep);
  }
  return outputs;
}

struct SplitLogs {
  EventLog train;
  EventLog validation;
  EventLog test;
};

SplitLogs split_logs(const EventLog& log, const RunConfig& config) {
  const auto split = temporal_split(log, config.split);
  return {select_cases(log, split.train), select_cases(log, split.validation),
          select_cases(log, split.test)};
}

// Patterns must have been mined from this log's train split; anything else is
// a leakage or stale-file bug.
void check_pattern_provenance(const MinedPatterns& patterns, const EventLog& train) {
  if (patterns.source_fingerprint != fingerprint(train)) {
    throw ConfigError(
        "patterns file fingerprint does not match the train split of this log; re-run mine");
  }
}

std::set<ActivityId> outcome_ids(const EventLog& log, const std::vector<std::string>& names) {
  std::set<ActivityId> out;
  for (const auto& n : names) out.insert(log.vocab.id_of(n));
  return out;
}

// --- subcommands -------------------------------------------------------------

int cmd_mine(const RunConfig& config) {
  const auto log = load_log(config);
  const auto logs = split_logs(log, config);
  const auto patterns = mine_all(logs.train, config.mining);
  for (const auto& w : patterns.warnings) std::cerr << "warning: " << w << "\n";

  const auto out = output_dir(config) / "patterns.json";
  write_json(out, patterns_to_json(patterns, log.vocab));
  std::cout << "mined " << patterns.followers.size() << " follower pairs, "
            << patterns.insertion_rules.size() << " insertion rules, " << patterns.xor_sets.size()
            << " xor sets from " << logs.train.size() << " training traces -> " << out.string()
            << "\n";
  return 0;
}

int cmd_augment(const RunConfig& config, const std::string& patterns_path) {
  const auto log = load_log(config);
  const auto logs = split_logs(log, config);
  const auto patterns = patterns_from_json(read_json_file(patterns_path), log.vocab);
  check_pattern_provenance(patterns, logs.train);

  const EventLog& base = config.augment_scope == "train" ? logs.train : log;
  std::vector<double> factors = config.factors.empty() ? std::vector<double>{config.factor}
                                                       : config.factors;
  for (double factor : factors) {
    Rng rng(config.seed);
    AugmentStats stats;
    const auto augmented = augment_log(base, patterns, factor, rng, &stats);
    if (augmented.size() == base.size() && factor > 1.0) {
      std::cerr << "warning: no trace was augmentable; output equals the input log\n";
    }

    std::string factor_label = format_double(factor);
    const auto csv_path = output_dir(config) / ("augmented_f" + factor_label + ".csv");
    write_text(csv_path, write_csv_string(augmented, config.csv_mapping));

    json sidecar;
    sidecar["factor"] = factor;
    sidecar["seed"] = config.seed;
    sidecar["scope"] = config.augment_scope;
    sidecar["pattern_fingerprint"] = patterns.source_fingerprint;
    sidecar["base_traces"] = base.size();
    sidecar["augmented_traces"] = augmented.size();
    json applied = json::object();
    for (const auto& [kind, count] : stats.applied) applied[to_string(kind)] = count;
    sidecar["applied"] = applied;
    sidecar["fallback_uses"] = stats.fallback_uses;
    write_json(fs::path(csv_path.string() + ".meta.json"), sidecar);
    std::cout << "factor " << factor_label << ": " << base.size() << " -> " << augmented.size()
              << " traces -> " << csv_path.string() << "\n";
  }
  return 0;
}

int cmd_entropy(const RunConfig& config, const std::string& base_path,
                const std::vector<std::string>& augmented_paths) {
  CsvReadOptions options;
  options.mapping = config.csv_mapping;
  const auto base = read_log_auto(base_path, options);

  json rows = json::array();
  std::string csv = "dataset,factor,trace_pct,prefix_pct\n";
  const std::string dataset = fs::path(base_path).stem().string();
  for (const auto& path : augmented_paths) {
    const auto augmented = read_log_auto(path, options);
    const auto report = relative_increase(base, augmented);

    std::string factor = "unknown";
    const fs::path sidecar(path + ".meta.json");
    if (fs::exists(sidecar)) {
      factor = format_double(read_json_file(sidecar).at("factor").get<double>());
    }
    json row = to_json(report);
    row["dataset"] = dataset;
    row["factor"] = factor;
    row["augmented_log"] = path;
    rows.push_back(row);
    csv += dataset + "," + factor + "," + format_double(report.relative_increase_trace) + "," +
           format_double(report.relative_increase_prefix) + "\n";
    std::cout << dataset << " factor " << factor
              << ": trace +" << format_double(report.relative_increase_trace) << "% prefix +"
              << format_double(report.relative_increase_prefix) << "%\n";
  }
  write_json(output_dir(config) / "entropy.json", rows);
  write_text(output_dir(config) / "entropy.csv", csv);
  return 0;
}

json pretrain_meta(const RunConfig& config, const MinedPatterns& patterns, std::uint64_t seed,
                   const std::string& strategy) {
  json meta;
  meta["pattern_fingerprint"] = patterns.source_fingerprint;
  meta["seed"] = seed;
  meta["strategy"] = strategy;
  meta["tau"] = config.pretrain_cfg.tau;
  return meta;
}

int cmd_pretrain(const RunConfig& config, const std::string& patterns_path, bool parallel) {
  const auto log = load_log(config);
  const auto logs = split_logs(log, config);
  const auto patterns = patterns_from_json(read_json_file(patterns_path), log.vocab);
  check_pattern_provenance(patterns, logs.train);

  EncoderConfig enc_cfg = config.encoder;
  enc_cfg.vocab_size = log.vocab.size();
  const auto prefixes = pretraining_prefixes(logs.train);
  const auto pool = AugmentationPool::standard(patterns);

  struct RepOutput {
    json model;
    std::string curve;
    std::string summary;
    std::vector<std::string> warnings;
  };
  auto run_rep = [&](std::size_t rep) {
    TrainConfig cfg = config.pretrain_cfg;
    cfg.seed = config.seed + rep;
    const auto result = pretrain(prefixes, pool, log.vocab, enc_cfg, cfg);

    RepOutput out;
    if (result.collapse_warning) {
      out.warnings.push_back("rep " + std::to_string(rep) + " collapse metric stayed below " +
                             format_double(cfg.collapse_floor));
    }
    if (result.skipped_examples > 0) {
      out.warnings.push_back("rep " + std::to_string(rep) + " skipped " +
                             std::to_string(result.skipped_examples) +
                             " prefixes with no applicable transformation");
    }
    out.model = network_to_json(result.params, enc_cfg,
                                pretrain_meta(config, patterns, cfg.seed, "statistical"));
    out.curve = "epoch,loss,collapse_metric\n";
    for (std::size_t e = 0; e < result.history.size(); ++e) {
      out.curve += std::to_string(e) + "," + format_double(result.history[e].mean_loss) + "," +
                   format_double(result.history[e].collapse_std) + "\n";
    }
    out.summary = "rep " + std::to_string(rep) + ": " + std::to_string(result.view_pairs) +
                  " view pairs, final loss " +
                  format_double(result.history.back().mean_loss);
    return out;
  };

  const auto outputs = run_repetitions<RepOutput>(config.repetitions, parallel, run_rep);
  for (std::size_t rep = 0; rep < outputs.size(); ++rep) {
    for (const auto& w : outputs[rep].warnings) std::cerr << "warning: " << w << "\n";
    const auto model_path = output_dir(config) / ("model_rep" + std::to_string(rep) + ".json");
    write_json(model_path, outputs[rep].model);
    write_text(output_dir(config) / ("pretrain_rep" + std::to_string(rep) + ".csv"),
               outputs[rep].curve);
    std::cout << outputs[rep].summary << " -> " << model_path.string() << "\n";
  }
  return 0;
}

struct EvalReport {
  std::vector<double> accuracies;
  double mean = 0.0;
  double stddev = 0.0;
};

json eval_report_json(const EvalReport& r) {
  return {{"accuracies", r.accuracies}, {"mean", r.mean}, {"std", r.stddev}};
}

void summarize(EvalReport& r) {
  double sum = 0.0;
  for (double a : r.accuracies) sum += a;
  r.mean = sum / static_cast<double>(r.accuracies.size());
  double var = 0.0;
  for (double a : r.accuracies) var += (a - r.mean) * (a - r.mean);
  r.stddev = std::sqrt(var / static_cast<double>(r.accuracies.size()));
}

int cmd_finetune(const RunConfig& config, const std::vector<std::string>& model_paths,
                 bool parallel) {
  const auto log = load_log(config);
  const auto logs = split_logs(log, config);

  struct TargetRun {
    std::string name;
    std::set<ActivityId> activities;
  };
  std::vector<TargetRun> targets;
  if (config.task_kind() == PredictionTask::kNextActivity) {
    targets.push_back({"next-activity", {}});
  } else {
    // one binary run per outcome target
    for (const auto& name : config.outcome_activities) {
      targets.push_back({name, {log.vocab.id_of(name)}});
    }
  }

  json report;
  report["task"] = config.task;
  json per_target = json::object();
  for (const auto& target : targets) {
    const auto train_ex = label_subset(
        supervised_examples(logs.train, config.task_kind(), target.activities),
        config.label_fraction);
    const auto val_ex =
        supervised_examples(logs.validation, config.task_kind(), target.activities);
    const auto test_ex = supervised_examples(logs.test, config.task_kind(), target.activities);
    const std::size_t classes = class_count(log, config.task_kind());

    struct RepOutput {
      double accuracy = 0.0;
      json classifier;
      std::string curve;
    };
    auto run_rep = [&](std::size_t rep) {
      TrainConfig cfg = config.finetune_cfg;
      cfg.seed = config.seed + rep;

      EncoderConfig enc_cfg = config.encoder;
      enc_cfg.vocab_size = log.vocab.size();
      const EncoderParams* init = nullptr;
      LoadedNetwork loaded;
      if (!model_paths.empty()) {
        const auto& path = model_paths[std::min(rep, model_paths.size() - 1)];
        loaded = network_from_json(read_json_file(path));
        if (loaded.config.vocab_size != log.vocab.size()) {
          throw ConfigError("model vocabulary size does not match the log: " + path);
        }
        enc_cfg = loaded.config;
        init = &loaded.params.enc;
      }
      const auto ft = finetune(init, classes, train_ex, val_ex, enc_cfg, cfg);

      RepOutput out;
      out.accuracy = evaluate_classifier(ft.params, test_ex);
      json meta;
      meta["task"] = config.task;
      meta["target"] = target.name;
      meta["num_classes"] = classes;
      meta["seed"] = cfg.seed;
      out.classifier = classifier_to_json(ft.params, enc_cfg, meta);
      out.curve = "epoch,loss,validation_accuracy\n";
      for (std::size_t e = 0; e < ft.epoch_loss.size(); ++e) {
        out.curve += std::to_string(e) + "," + format_double(ft.epoch_loss[e]) + ",";
        if (e < ft.validation_accuracy.size()) {
          out.curve += format_double(ft.validation_accuracy[e]);
        }
        out.curve += "\n";
      }
      return out;
    };

    const auto outputs = run_repetitions<RepOutput>(config.repetitions, parallel, run_rep);
    EvalReport eval;
    for (std::size_t rep = 0; rep < outputs.size(); ++rep) {
      eval.accuracies.push_back(outputs[rep].accuracy);
      const std::string suffix = target.name == "next-activity"
                                     ? "rep" + std::to_string(rep)
                                     : target.name + "_rep" + std::to_string(rep);
      write_json(output_dir(config) / ("finetuned_" + suffix + ".json"), outputs[rep].classifier);
      write_text(output_dir(config) / ("finetune_" + suffix + ".csv"), outputs[rep].curve);
    }
    summarize(eval);
    per_target[target.name] = eval_report_json(eval);
    std::cout << target.name << ": mean " << format_double(eval.mean) << " std "
              << format_double(eval.stddev) << " over " << config.repetitions << " repetitions\n";
  }
  report["results"] = per_target;
  write_json(output_dir(config) / ("finetune_report." + config.task + ".json"), report);

  std::string csv = "target,mean,std\n";
  for (const auto& [name, r] : per_target.items()) {
    csv += name + "," + format_double(r.at("mean").get<double>()) + "," +
           format_double(r.at("std").get<double>()) + "\n";
  }
  write_text(output_dir(config) / ("finetune_report." + config.task + ".csv"), csv);
  return 0;
}

int cmd_evaluate(const RunConfig& config, const std::string& classifier_path) {
  const auto log = load_log(config);
  const auto logs = split_logs(log, config);
  const auto loaded = classifier_from_json(read_json_file(classifier_path));

  std::set<ActivityId> outcome;
  PredictionTask task = config.task_kind();
  if (loaded.meta.contains("task")) {
    task = loaded.meta.at("task") == "outcome" ? PredictionTask::kOutcome
                                               : PredictionTask::kNextActivity;
  }
  if (task == PredictionTask::kOutcome) {
    if (loaded.meta.contains("target")) {
      outcome = {log.vocab.id_of(loaded.meta.at("target").get<std::string>())};
    } else {
      outcome = outcome_ids(log, config.outcome_activities);
    }
  }
  const auto test_ex = supervised_examples(logs.test, task, outcome);
  const double acc = evaluate_classifier(loaded.params, test_ex);

  json report;
  report["classifier"] = classifier_path;
  report["task"] = task == PredictionTask::kOutcome ? "outcome" : "next-activity";
  report["test_examples"] = test_ex.size();
  report["accuracy"] = acc;
  write_json(output_dir(config) / "evaluate_report.json", report);
  write_text(output_dir(config) / "evaluate_report.csv",
             "task,test_examples,accuracy\n" + report["task"].get<std::string>() + "," +
                 std::to_string(test_ex.size()) + "," + format_double(acc) + "\n");
  std::cout << "test accuracy " << format_double(acc) << " over " << test_ex.size()
            << " examples\n";
  return 0;
}

int cmd_ablate(const RunConfig& config) {
  const auto log = load_log(config);
  const auto logs = split_logs(log, config);
  const auto patterns = mine_all(logs.train, config.mining);

  AblationSetup setup;
  setup.encoder = config.encoder;
  setup.encoder.vocab_size = log.vocab.size();
  setup.pretrain_cfg = config.pretrain_cfg;
  setup.pretrain_cfg.seed = config.seed;
  setup.finetune_cfg = config.finetune_cfg;
  setup.finetune_cfg.seed = config.seed;
  setup.repetitions = config.repetitions;
  setup.label_fraction = config.label_fraction;
  setup.task = config.task_kind();
  if (setup.task == PredictionTask::kOutcome) {
    setup.outcome_activities = outcome_ids(log, config.outcome_activities);
  }

  const auto result = run_ablation(logs.train, logs.validation, logs.test, patterns, setup);

  json rows = json::array();
  std::string csv = "strategy,mean,std\n";
  for (const auto* outcome :
       {&result.supervised, &result.random_pretrain, &result.statistical_pretrain}) {
    json row;
    row["strategy"] = to_string(outcome->strategy);
    row["accuracies"] = outcome->accuracies;
    row["mean"] = outcome->mean;
    row["std"] = outcome->stddev;
    rows.push_back(row);
    csv += std::string(to_string(outcome->strategy)) + "," + format_double(outcome->mean) + "," +
           format_double(outcome->stddev) + "\n";
    std::cout << to_string(outcome->strategy) << ": mean " << format_double(outcome->mean)
              << " std " << format_double(outcome->stddev) << "\n";
  }
  write_json(output_dir(config) / "ablation.json", rows);
  write_text(output_dir(config) / "ablation.csv", csv);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"statistical trace augmentation and Siamese pretraining for event logs"};
  app.require_subcommand(1);

  std::string config_path;
  RunConfig config;
  app.add_option("--config", config_path, "JSON config file; flags override its values");

  // shared overrides
  std::optional<std::string> input, format, out_dir, task;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> repetitions, max_events;
  std::optional<double> alpha, beta, gamma, delta, factor, tau, pre_lr, ft_lr;
  std::optional<int> lambda_max;
  std::optional<std::size_t> pre_epochs, ft_epochs, batch_size, embed_dim, hidden_dim, max_len;
  std::optional<std::string> variant, scope;
  std::vector<std::string> outcome_names;
  std::vector<double> factor_list;

  app.add_option("--input", input, "event log file (.csv or .xes)");
  app.add_option("--format", format, "auto|csv|xes");
  app.add_option("--out", out_dir, "output directory (env SIAMAUG_OUTPUT_DIR overrides)");
  app.add_option("--seed", seed, "master seed");
  app.add_option("--repetitions", repetitions, "independent repetitions");
  bool parallel = false;
  app.add_flag("--parallel", parallel, "run repetitions concurrently (outputs unchanged)");
  std::optional<double> label_fraction;
  app.add_option("--label-fraction", label_fraction,
                 "fraction of labeled training examples used by fine-tuning");
  app.add_option("--max-events", max_events, "truncate the log after this many raw events");
  std::optional<std::string> case_col, activity_col, timestamp_col;
  app.add_option("--case-column", case_col, "CSV column holding the case id");
  app.add_option("--activity-column", activity_col, "CSV column holding the activity name");
  app.add_option("--timestamp-column", timestamp_col, "CSV column holding the timestamp");
  app.add_option("--alpha", alpha, "activity filter threshold");
  app.add_option("--beta", beta, "direct follower threshold");
  app.add_option("--gamma", gamma, "insertion rule threshold");
  app.add_option("--delta", delta, "replacement threshold");
  app.add_option("--lambda-max", lambda_max, "max intermediate sequence length");
  app.add_option("--factor", factor, "augmentation factor");
  app.add_option("--factors", factor_list, "augmentation factor sweep");
  app.add_option("--scope", scope, "augment scope: full|train");
  app.add_option("--task", task, "next-activity|outcome");
  app.add_option("--outcome-activity", outcome_names, "outcome target activity (repeatable)");
  app.add_option("--tau", tau, "EMA momentum");
  app.add_option("--pretrain-lr", pre_lr, "pretraining learning rate");
  app.add_option("--pretrain-epochs", pre_epochs, "pretraining epochs");
  app.add_option("--finetune-lr", ft_lr, "fine-tuning learning rate");
  app.add_option("--finetune-epochs", ft_epochs, "fine-tuning epochs");
  app.add_option("--batch-size", batch_size, "batch size for both stages");
  app.add_option("--embed-dim", embed_dim, "encoder embedding dimension");
  app.add_option("--hidden-dim", hidden_dim, "encoder hidden dimension");
  app.add_option("--max-len", max_len, "maximum padded sequence length");
  app.add_option("--encoder-variant", variant, "embed-pool-mlp|single-attention-block");

  std::string patterns_path = "out/patterns.json";
  std::string base_log_path;
  std::vector<std::string> augmented_paths;
  std::vector<std::string> model_paths;
  std::string classifier_path;

  auto* mine = app.add_subcommand("mine", "mine patterns from the train split");
  auto* augment = app.add_subcommand("augment", "write augmented logs at the given factors");
  augment->add_option("--patterns", patterns_path, "patterns file from mine");
  auto* entropy = app.add_subcommand("entropy", "relative entropy increase of augmented logs");
  entropy->add_option("--base", base_log_path, "original log")->required();
  entropy->add_option("--augmented", augmented_paths, "augmented logs")->required();
  auto* pretrain_cmd = app.add_subcommand("pretrain", "Siamese pretraining on train prefixes");
  pretrain_cmd->add_option("--patterns", patterns_path, "patterns file from mine");
  auto* finetune_cmd = app.add_subcommand("finetune", "fine-tune and evaluate on the test split");
  finetune_cmd->add_option("--model", model_paths, "pretrained model files (one per repetition)");
  auto* evaluate_cmd = app.add_subcommand("evaluate", "evaluate a fine-tuned classifier");
  evaluate_cmd->add_option("--classifier", classifier_path, "classifier file")->required();
  auto* ablate = app.add_subcommand("ablate", "supervised vs random vs statistical pretraining");

  // let shared options appear after the subcommand name
  for (auto* sub : {mine, augment, entropy, pretrain_cmd, finetune_cmd, evaluate_cmd, ablate}) {
    sub->fallthrough();
  }

  CLI11_PARSE(app, argc, argv);

  try {
    if (!config_path.empty()) config.apply_json(read_json_file(config_path));
    if (input) config.input = *input;
    if (format) config.format = *format;
    if (out_dir) config.output_dir = *out_dir;
    if (seed) config.seed = *seed;
    if (repetitions) config.repetitions = *repetitions;
    if (max_events) config.max_events = *max_events;
    if (case_col) config.csv_mapping.case_column = *case_col;
    if (activity_col) config.csv_mapping.activity_column = *activity_col;
    if (timestamp_col) config.csv_mapping.timestamp_column = *timestamp_col;
    if (alpha) config.mining.alpha = *alpha;
    if (beta) config.mining.beta = *beta;
    if (gamma) config.mining.gamma = *gamma;
    if (delta) config.mining.delta = *delta;
    if (lambda_max) config.mining.lambda_max = *lambda_max;
    if (factor) config.factor = *factor;
    if (!factor_list.empty()) config.factors = factor_list;
    if (scope) config.augment_scope = *scope;
    if (task) config.task = *task;
    if (!outcome_names.empty()) config.outcome_activities = outcome_names;
    if (tau) config.pretrain_cfg.tau = *tau;
    if (pre_lr) config.pretrain_cfg.learning_rate = *pre_lr;
    if (pre_epochs) config.pretrain_cfg.epochs = *pre_epochs;
    if (ft_lr) config.finetune_cfg.learning_rate = *ft_lr;
    if (ft_epochs) config.finetune_cfg.epochs = *ft_epochs;
    if (batch_size) {
      config.pretrain_cfg.batch_size = *batch_size;
      config.finetune_cfg.batch_size = *batch_size;
    }
    if (label_fraction) config.label_fraction = *label_fraction;
    if (embed_dim) config.encoder.embed_dim = *embed_dim;
    if (hidden_dim) config.encoder.hidden_dim = *hidden_dim;
    if (max_len) config.encoder.max_len = *max_len;
    if (variant) config.encoder.variant = encoder_variant_from_string(*variant);

    config.validate();
    config.pretrain_cfg.seed = config.seed;
    config.finetune_cfg.seed = config.seed;

    if (*mine) return cmd_mine(config);
    if (*augment) return cmd_augment(config, patterns_path);
    if (*entropy) return cmd_entropy(config, base_log_path, augmented_paths);
    if (*pretrain_cmd) return cmd_pretrain(config, patterns_path, parallel);
    if (*finetune_cmd) return cmd_finetune(config, model_paths, parallel);
    if (*evaluate_cmd) return cmd_evaluate(config, classifier_path);
    if (*ablate) return cmd_ablate(config);
    throw ConfigError("no subcommand selected");
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const ContractError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
