#include "dage/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <mutex>
#include <thread>

namespace dage {

std::pair<LabeledDataset, LabeledDataset> load_experiment_data(const ExperimentConfig& cfg) {
  if (cfg.synthetic.has_value()) {
    return generate(*cfg.synthetic);
  }
  if (cfg.source_csv.empty() || cfg.target_csv.empty()) {
    throw Error(ErrorCode::InvalidConfig,
                "config needs either a synthetic spec or source/target CSV paths");
  }
  return {load_feature_csv(cfg.source_csv), load_feature_csv(cfg.target_csv)};
}

SplitManifest manifest_for(const ExperimentConfig& cfg, const LabeledDataset& source,
                           const LabeledDataset& target) {
  if (cfg.run_seeds.empty()) {
    throw Error(ErrorCode::InvalidConfig, "run_seeds must not be empty");
  }
  if (cfg.protocol == "rectified") {
    return build_manifest(source, target, cfg.params, cfg.run_seeds);
  }
  if (cfg.protocol == "traditional") {
    return build_traditional_manifest(source, target, cfg.params, cfg.run_seeds);
  }
  throw Error(ErrorCode::InvalidConfig,
              "protocol must be 'rectified' or 'traditional', got '" + cfg.protocol + "'");
}

SeedResult run_seed(const ExperimentConfig& cfg, const LabeledDataset& source,
                    const LabeledDataset& target, const SplitManifest& manifest,
                    const RunRecord& run) {
  const LabeledDataset train_source = select_columns(source, run.train_source);
  const LabeledDataset train_target = select_columns(target, run.train_target);
  const LabeledDataset validation = select_columns(target, run.validation);

  TrainConfig train_cfg = cfg.train;
  train_cfg.loss_kind = loss_kind_from_string(cfg.method);
  train_cfg.seed = run.seed;

  SeedResult result;
  result.seed = run.seed;

  // Model selection: highest validation accuracy, earliest epoch on ties.
  JointModel best;
  bool have_best = false;
  const auto observer = [&](int epoch, const JointModel& model) {
    const double acc = evaluate(model, validation).accuracy;
    result.val_curve.push_back(acc);
    if (!have_best || acc > result.best_validation_accuracy) {
      have_best = true;
      result.best_validation_accuracy = acc;
      result.best_epoch = epoch;
      best = model;
    }
  };
  JointModel final_model =
      train_joint(train_source, train_target, run.pairs, train_cfg, observer);
  if (!have_best) best = std::move(final_model);  // epochs == 0
  result.model = std::move(best);

  // The one and only look at held-out data. Under the traditional protocol
  // the "test" columns are the validation columns themselves (the leak).
  const std::vector<int>& test_cols =
      manifest.protocol == "rectified" ? manifest.test : run.validation;
  const LabeledDataset test = select_columns(target, test_cols);
  result.test_accuracy = evaluate(result.model, test).accuracy;
  result.test_evaluations += 1;

  if (cfg.baseline) {
    result.baseline_ncm = ncm_baseline(train_source, test).accuracy;
  }
  return result;
}

RunSummary run_experiment(const ExperimentConfig& cfg, const LabeledDataset& source,
                          const LabeledDataset& target, const SplitManifest& manifest) {
  RunSummary summary;
  summary.method = cfg.method;
  summary.protocol = manifest.protocol;
  summary.manifest_hash = manifest_hash(manifest);
  summary.seeds.resize(manifest.runs.size());

  const int jobs = std::max(1, cfg.jobs);
  if (jobs == 1 || manifest.runs.size() < 2) {
    for (std::size_t i = 0; i < manifest.runs.size(); ++i) {
      summary.seeds[i] = run_seed(cfg, source, target, manifest, manifest.runs[i]);
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    const auto worker = [&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= manifest.runs.size()) return;
        try {
          summary.seeds[i] = run_seed(cfg, source, target, manifest, manifest.runs[i]);
        } catch (...) {
          std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          return;
        }
      }
    };
    std::vector<std::thread> threads;
    const int count = static_cast<int>(
        std::min(static_cast<std::size_t>(jobs), manifest.runs.size()));
    threads.reserve(static_cast<std::size_t>(count));
    for (int t = 0; t < count; ++t) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (failure) std::rethrow_exception(failure);
  }

  double mean = 0.0;
  for (const auto& s : summary.seeds) mean += s.test_accuracy;
  mean /= static_cast<double>(summary.seeds.size());
  double var = 0.0;
  for (const auto& s : summary.seeds) {
    var += (s.test_accuracy - mean) * (s.test_accuracy - mean);
  }
  var /= static_cast<double>(summary.seeds.size());
  summary.mean_test_accuracy = mean;
  summary.std_test_accuracy = std::sqrt(var);

  if (cfg.baseline) {
    double base = 0.0;
    for (const auto& s : summary.seeds) base += s.baseline_ncm.value_or(0.0);
    summary.baseline_mean = base / static_cast<double>(summary.seeds.size());
  }
  return summary;
}

std::string format_mean_std(double mean, double std) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f ± %.2f", 100.0 * mean, 100.0 * std);
  return buf;
}

}  // namespace dage
