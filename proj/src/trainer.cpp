#include "dage/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "dage/rng.hpp"

namespace dage {
namespace {

struct BatchGraphs {
  LaplacianMatrix intrinsic;
  LaplacianMatrix penalty;
};

// Everything the domain term needs that is constant across batches.
struct DomainContext {
  double sigma = 0.0;                           // nem bandwidth, resolved
  std::vector<std::vector<int>> neighbours;     // nem: per train-target column, in input space
};

BatchGraphs batch_graphs(const TrainConfig& cfg, const DomainContext& ctx,
                         const Eigen::MatrixXd& phi, const Eigen::MatrixXd& x,
                         const std::vector<int>& labels,
                         const std::vector<DomainTag>& domains,
                         const std::vector<int>& target_local) {
  GraphPair gp;
  switch (cfg.loss_kind) {
    case LossKind::DageLda:
      gp = dage_lda_graphs(labels);
      break;
    case LossKind::Ccsa:
      gp = ccsa_graphs(phi, labels, domains, cfg.epsilon);
      break;
    case LossKind::Dsne:
      // Lenient: a mini-batch may lack a same/different-class source for some
      // target; that edge is dropped rather than aborting the run.
      gp = dsne_graphs(phi, labels, domains, /*require_sources=*/false);
      break;
    case LossKind::Nem: {
      // Neighbour lists are fixed in input space over the whole training
      // target set; restrict them to columns present in this batch. A
      // duplicated target resolves to its first batch column.
      const Eigen::Index n = phi.cols();
      std::vector<int> first_col(ctx.neighbours.size(), -1);
      for (Eigen::Index c = 0; c < n; ++c) {
        const int t = target_local[static_cast<std::size_t>(c)];
        if (t >= 0 && first_col[static_cast<std::size_t>(t)] < 0) {
          first_col[static_cast<std::size_t>(t)] = static_cast<int>(c);
        }
      }
      std::vector<std::vector<int>> batch_neighbours(static_cast<std::size_t>(n));
      for (Eigen::Index c = 0; c < n; ++c) {
        const int t = target_local[static_cast<std::size_t>(c)];
        if (t < 0) continue;
        for (const int nb : ctx.neighbours[static_cast<std::size_t>(t)]) {
          const int col = first_col[static_cast<std::size_t>(nb)];
          if (col >= 0 && col != static_cast<int>(c)) {
            batch_neighbours[static_cast<std::size_t>(c)].push_back(col);
          }
        }
      }
      gp.intrinsic =
          nem_intrinsic(phi, x, batch_neighbours, labels, domains, cfg.nu, ctx.sigma);
      gp.penalty = ccsa_graphs(phi, labels, domains, cfg.epsilon).penalty;
      break;
    }
  }
  return {laplacian(gp.intrinsic), laplacian(gp.penalty)};
}

EvalReport report_from_predictions(const std::vector<int>& predicted,
                                   const std::vector<int>& truth, int class_count) {
  EvalReport report;
  report.confusion = Eigen::MatrixXi::Zero(class_count, class_count);
  for (std::size_t i = 0; i < truth.size(); ++i) {
    report.confusion(truth[i], predicted[i]) += 1;
  }
  report.per_class_accuracy.assign(static_cast<std::size_t>(class_count), 0.0);
  for (int c = 0; c < class_count; ++c) {
    const int row_total = report.confusion.row(c).sum();
    if (row_total > 0) {
      report.per_class_accuracy[static_cast<std::size_t>(c)] =
          static_cast<double>(report.confusion(c, c)) / row_total;
    }
  }
  if (!truth.empty()) {
    report.accuracy =
        static_cast<double>(report.confusion.trace()) / static_cast<double>(truth.size());
  }
  return report;
}

}  // namespace

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::DageLda: return "dage-lda";
    case LossKind::Ccsa: return "ccsa";
    case LossKind::Dsne: return "dsne";
    case LossKind::Nem: return "nem";
  }
  return "unknown";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "dage-lda") return LossKind::DageLda;
  if (name == "ccsa") return LossKind::Ccsa;
  if (name == "dsne") return LossKind::Dsne;
  if (name == "nem") return LossKind::Nem;
  throw Error(ErrorCode::InvalidConfig,
              "unknown method '" + name + "' (expected dage-lda, ccsa, dsne or nem)");
}

std::pair<double, Eigen::MatrixXd> ce_loss_and_grad(const Eigen::MatrixXd& logits,
                                                    const std::vector<int>& labels) {
  const Eigen::Index n = logits.cols();
  if (labels.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::DimensionMismatch, "one label per logit column required");
  }
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(logits.rows(), n);
  if (n == 0) return {0.0, grad};
  double loss = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const int y = labels[static_cast<std::size_t>(i)];
    if (y < 0 || y >= logits.rows()) {
      throw Error(ErrorCode::InvalidLabel,
                  "label " + std::to_string(y) + " outside logit range");
    }
    const double m = logits.col(i).maxCoeff();
    const Eigen::VectorXd shifted = logits.col(i).array() - m;
    const double lse = std::log(shifted.array().exp().sum());
    loss += lse - shifted(y);
    grad.col(i) = (shifted.array() - lse).exp();
    grad(y, i) -= 1.0;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  return {loss * inv_n, grad * inv_n};
}

JointModel train_joint(const LabeledDataset& train_source, const LabeledDataset& train_target,
                       const PairSet& pairs, const TrainConfig& cfg,
                       const EpochObserver& observer) {
  if (pairs.pairs.empty()) {
    throw Error(ErrorCode::EmptyPairSet, "cannot train on an empty pair set");
  }
  if (train_source.dim() != train_target.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "source/target feature dims differ");
  }
  if (cfg.batch_pairs < 1 || cfg.d < 1 || cfg.epochs < 0 ||
      !(cfg.momentum >= 0.0 && cfg.momentum < 1.0) || cfg.beta < 0.0 || cfg.gamma < 0.0 ||
      cfg.l2 < 0.0) {
    throw Error(ErrorCode::InvalidConfig, "training configuration out of range");
  }
  const std::set<int> source_classes(train_source.labels.begin(), train_source.labels.end());
  const std::set<int> target_classes(train_target.labels.begin(), train_target.labels.end());
  if (source_classes != target_classes) {
    throw Error(ErrorCode::MissingClass,
                "source and target training sets must cover the same classes");
  }
  for (const auto& p : pairs.pairs) {
    if (p.source < 0 || p.source >= static_cast<int>(train_source.size()) || p.target < 0 ||
        p.target >= static_cast<int>(train_target.size())) {
      throw Error(ErrorCode::DimensionMismatch, "pair index outside the training sets");
    }
  }

  const Eigen::Index dim = train_source.dim();
  const int classes = std::max(train_source.class_count, train_target.class_count);

  DomainContext ctx;
  if (cfg.loss_kind == LossKind::Nem) {
    ctx.sigma =
        cfg.sigma > 0.0 ? cfg.sigma : median_pairwise_distance(train_target.features);
    ctx.neighbours = knn_in_input_space(train_target.features, cfg.k);
  }

  JointModel model;
  model.config = cfg;
  model.embedding.kind = EmbeddingModel::Kind::Linear;
  model.embedding.solver = SolverKind::RatioTrace;
  model.embedding.reg = 0.0;
  model.classifier_w = Eigen::MatrixXd::Zero(cfg.d, classes);
  model.classifier_b = Eigen::VectorXd::Zero(classes);

  Rng rng(cfg.seed);
  // Xavier-uniform, filled column by column from the seeded stream.
  const double limit = std::sqrt(6.0 / static_cast<double>(dim + cfg.d));
  model.embedding.projection.resize(dim, cfg.d);
  for (int j = 0; j < cfg.d; ++j) {
    for (Eigen::Index i = 0; i < dim; ++i) {
      model.embedding.projection(i, j) = rng.next_uniform(-limit, limit);
    }
  }

  Eigen::MatrixXd vel_v = Eigen::MatrixXd::Zero(dim, cfg.d);
  Eigen::MatrixXd vel_w = Eigen::MatrixXd::Zero(cfg.d, classes);
  Eigen::VectorXd vel_b = Eigen::VectorXd::Zero(classes);

  std::vector<int> order(pairs.pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    int batches = 0;
    for (std::size_t begin = 0; begin < order.size(); begin += cfg.batch_pairs, ++batches) {
      const std::size_t end = std::min(order.size(), begin + cfg.batch_pairs);
      const int p = static_cast<int>(end - begin);
      const int n = 2 * p;

      // Batch columns: the source member of every pair, then the target
      // member of every pair (duplicates allowed; the pairing is what the
      // losses consume).
      Eigen::MatrixXd x(dim, n);
      std::vector<int> labels(static_cast<std::size_t>(n));
      std::vector<DomainTag> domains(static_cast<std::size_t>(n));
      std::vector<int> target_local(static_cast<std::size_t>(n), -1);
      for (int b = 0; b < p; ++b) {
        const auto& pr = pairs.pairs[static_cast<std::size_t>(order[begin + b])];
        x.col(b) = train_source.features.col(pr.source);
        labels[static_cast<std::size_t>(b)] =
            train_source.labels[static_cast<std::size_t>(pr.source)];
        domains[static_cast<std::size_t>(b)] = DomainTag::Source;
        x.col(p + b) = train_target.features.col(pr.target);
        labels[static_cast<std::size_t>(p + b)] =
            train_target.labels[static_cast<std::size_t>(pr.target)];
        domains[static_cast<std::size_t>(p + b)] = DomainTag::Target;
        target_local[static_cast<std::size_t>(p + b)] = pr.target;
      }

      const Eigen::MatrixXd& v = model.embedding.projection;
      const Eigen::MatrixXd phi = v.transpose() * x;

      const BatchGraphs graphs =
          batch_graphs(cfg, ctx, phi, x, labels, domains, target_local);
      const LossValue domain = dage_loss(phi, graphs.intrinsic, graphs.penalty);
      // A batch whose penalty graph is empty has a floored, constant domain
      // term; its gradient is zero rather than an abort.
      Eigen::MatrixXd dphi =
          domain.degenerate_denominator
              ? Eigen::MatrixXd::Zero(cfg.d, n)
              : dage_grad(phi, graphs.intrinsic, graphs.penalty);

      const Eigen::MatrixXd logits =
          (model.classifier_w.transpose() * phi).colwise() + model.classifier_b;
      Eigen::MatrixXd dlogits = Eigen::MatrixXd::Zero(classes, n);
      double ce_source = 0.0;
      double ce_target = 0.0;
      {
        std::vector<int> src_labels(labels.begin(), labels.begin() + p);
        const auto [ls, gs] = ce_loss_and_grad(logits.leftCols(p), src_labels);
        ce_source = ls;
        dlogits.leftCols(p) += cfg.beta * gs;
        std::vector<int> tgt_labels(labels.begin() + p, labels.end());
        const auto [lt, gt] = ce_loss_and_grad(logits.rightCols(p), tgt_labels);
        ce_target = lt;
        dlogits.rightCols(p) += cfg.gamma * gt;
      }

      const double l2_term =
          cfg.l2 * (v.squaredNorm() + model.classifier_w.squaredNorm() +
                    model.classifier_b.squaredNorm());
      const double total =
          domain.value + cfg.beta * ce_source + cfg.gamma * ce_target + l2_term;
      if (!std::isfinite(total)) {
        throw Error(ErrorCode::NonFiniteLoss,
                    "total loss diverged at epoch " + std::to_string(epoch) + ", batch " +
                        std::to_string(batches));
      }
      epoch_loss += total;

      dphi += model.classifier_w * dlogits;
      const Eigen::MatrixXd grad_v = x * dphi.transpose() + 2.0 * cfg.l2 * v;
      const Eigen::MatrixXd grad_w =
          phi * dlogits.transpose() + 2.0 * cfg.l2 * model.classifier_w;
      const Eigen::VectorXd grad_b =
          dlogits.rowwise().sum() + 2.0 * cfg.l2 * model.classifier_b;

      vel_v = cfg.momentum * vel_v - cfg.learning_rate * grad_v;
      vel_w = cfg.momentum * vel_w - cfg.learning_rate * grad_w;
      vel_b = cfg.momentum * vel_b - cfg.learning_rate * grad_b;
      model.embedding.projection += vel_v;
      model.classifier_w += vel_w;
      model.classifier_b += vel_b;
    }
    model.loss_curve.push_back(batches > 0 ? epoch_loss / batches : 0.0);
    model.final_epoch = epoch + 1;
    if (observer) observer(epoch, model);
  }
  return model;
}

EvalReport evaluate(const JointModel& model, const LabeledDataset& ds) {
  const Eigen::MatrixXd embedded = transform(model.embedding, ds.features);
  const Eigen::MatrixXd logits =
      (model.classifier_w.transpose() * embedded).colwise() + model.classifier_b;
  const int classes =
      std::max(static_cast<int>(model.classifier_b.size()), ds.class_count);
  std::vector<int> predicted(static_cast<std::size_t>(ds.size()));
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    Eigen::Index best = 0;
    for (Eigen::Index c = 1; c < logits.rows(); ++c) {
      if (logits(c, i) > logits(best, i)) best = c;  // ties keep the lowest id
    }
    predicted[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return report_from_predictions(predicted, ds.labels, classes);
}

EvalReport ncm_baseline(const LabeledDataset& train, const LabeledDataset& test) {
  if (train.dim() != test.dim()) {
    throw Error(ErrorCode::DimensionMismatch, "train/test feature dims differ");
  }
  const int classes = std::max(train.class_count, test.class_count);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(train.dim(), classes);
  std::vector<int> counts(static_cast<std::size_t>(classes), 0);
  for (Eigen::Index i = 0; i < train.size(); ++i) {
    const int c = train.labels[static_cast<std::size_t>(i)];
    means.col(c) += train.features.col(i);
    counts[static_cast<std::size_t>(c)] += 1;
  }
  for (int c = 0; c < classes; ++c) {
    if (counts[static_cast<std::size_t>(c)] == 0) {
      throw Error(ErrorCode::MissingClass,
                  "class " + std::to_string(c) + " has no training samples");
    }
    means.col(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  std::vector<int> predicted(static_cast<std::size_t>(test.size()));
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int c = 0; c < classes; ++c) {
      const double d = (test.features.col(i) - means.col(c)).squaredNorm();
      if (d < best_d) {  // strict: ties keep the lowest class id
        best_d = d;
        best = c;
      }
    }
    predicted[static_cast<std::size_t>(i)] = best;
  }
  return report_from_predictions(predicted, test.labels, classes);
}

}  // namespace dage
