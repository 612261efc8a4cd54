#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "dage/losses.hpp"
#include "dage/protocol.hpp"
#include "dage/spectral.hpp"

namespace dage {

enum class LossKind { DageLda, Ccsa, Dsne, Nem };

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

struct TrainConfig {
  LossKind loss_kind = LossKind::DageLda;
  int d = 2;
  double learning_rate = 0.01;
  double momentum = 0.9;  // in [0, 1)
  int epochs = 10;
  int batch_pairs = 8;  // pairs per mini-batch, >= 1
  double beta = 1.0;    // source cross-entropy weight
  double gamma = 1.0;   // target cross-entropy weight
  double epsilon = 1.0; // contrastive margin (ccsa / nem)
  double nu = 0.1;      // neighbourhood strength (nem)
  int k = 2;            // neighbours per target (nem)
  double sigma = 0.0;   // affinity bandwidth (nem); <= 0 picks the median heuristic
  std::uint64_t seed = 0;
  double l2 = 0.0;      // weight decay
};

// Linear embedding plus softmax classifier, trained jointly. The training
// history rides along so the model file is self-describing.
struct JointModel {
  EmbeddingModel embedding;       // Linear kind, D x d
  Eigen::MatrixXd classifier_w;   // d x C
  Eigen::VectorXd classifier_b;   // C
  TrainConfig config;
  int final_epoch = 0;
  std::vector<double> loss_curve;  // epoch-mean total loss
};

struct EvalReport {
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;  // classes with no samples report 0
  Eigen::MatrixXi confusion;               // rows = true class, cols = predicted
};

// Called after every completed epoch (0-based) with the current model; used
// for validation-based model selection.
using EpochObserver = std::function<void(int epoch, const JointModel& model)>;

// Minimize  domain_loss + beta * CE(source) + gamma * CE(target) + l2 * ||params||^2
// by momentum SGD over mini-batches of pairs. Both pair members pass through
// the same projection (shared weights). The domain term is the graph-ratio
// loss on graphs rebuilt from each batch at its current embedding, with the
// builder chosen by loss_kind.
JointModel train_joint(const LabeledDataset& train_source, const LabeledDataset& train_target,
                       const PairSet& pairs, const TrainConfig& cfg,
                       const EpochObserver& observer = {});

// Mean softmax cross-entropy over columns and its gradient w.r.t. logits,
// log-sum-exp stabilized.
std::pair<double, Eigen::MatrixXd> ce_loss_and_grad(const Eigen::MatrixXd& logits,
                                                    const std::vector<int>& labels);

EvalReport evaluate(const JointModel& model, const LabeledDataset& ds);

// Nearest class mean in the raw feature space; the source-only baseline.
EvalReport ncm_baseline(const LabeledDataset& train, const LabeledDataset& test);

}  // namespace dage
