#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dage/protocol.hpp"
#include "dage/synthetic.hpp"
#include "dage/trainer.hpp"

namespace dage {

// One experiment: a data source, a split recipe, and a training recipe.
struct ExperimentConfig {
  std::string method = "dage-lda";
  std::optional<ShiftSpec> synthetic;
  std::string source_csv;
  std::string target_csv;
  ProtocolParams params;
  std::vector<std::uint64_t> run_seeds;
  TrainConfig train;
  std::string out_dir = "out";
  std::string protocol = "rectified";  // or "traditional" (deprecated, leaks)
  int jobs = 1;
  bool baseline = false;
};

struct SeedResult {
  std::uint64_t seed = 0;
  std::vector<double> val_curve;  // validation accuracy per epoch
  int best_epoch = 0;             // earliest epoch attaining the max
  double best_validation_accuracy = 0.0;
  double test_accuracy = 0.0;
  int test_evaluations = 0;  // exactly 1 under the rectified protocol
  std::optional<double> baseline_ncm;
  JointModel model;
};

struct RunSummary {
  std::string method;
  std::string protocol;
  std::string manifest_hash;
  std::vector<SeedResult> seeds;
  double mean_test_accuracy = 0.0;
  double std_test_accuracy = 0.0;  // population standard deviation across seeds
  std::optional<double> baseline_mean;
};

// Materializes the configured data (synthetic generation or CSV load);
// returned datasets are the full source and target domains.
std::pair<LabeledDataset, LabeledDataset> load_experiment_data(const ExperimentConfig& cfg);

SplitManifest manifest_for(const ExperimentConfig& cfg, const LabeledDataset& source,
                           const LabeledDataset& target);

// Trains one seed's run record: per-epoch validation accuracy for model
// selection (max accuracy, earliest epoch wins ties), then exactly one test
// evaluation of the selected model. Under the traditional protocol the
// validation set doubles as the test set — the leak the rectified protocol
// removes — and the selected model's validation score is simply re-reported.
SeedResult run_seed(const ExperimentConfig& cfg, const LabeledDataset& source,
                    const LabeledDataset& target, const SplitManifest& manifest,
                    const RunRecord& run);

// Full experiment over all seeds, optionally in parallel (cfg.jobs threads);
// results are independent of the thread count.
RunSummary run_experiment(const ExperimentConfig& cfg, const LabeledDataset& source,
                          const LabeledDataset& target, const SplitManifest& manifest);

// "57.33 ± 2.10" with accuracies scaled to percentage points.
std::string format_mean_std(double mean, double std);

}  // namespace dage
