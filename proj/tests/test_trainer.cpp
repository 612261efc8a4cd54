#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "dage/error.hpp"
#include "dage/graphs.hpp"
#include "dage/rng.hpp"
#include "dage/synthetic.hpp"
#include "dage/trainer.hpp"

using namespace dage;

namespace {

struct Fixture {
  LabeledDataset train_source;
  LabeledDataset train_target;
  PairSet pairs;
};

// Shifted two-domain problem with 12 source and 3 target samples per class.
Fixture small_problem() {
  ShiftSpec spec;
  spec.class_count = 3;
  spec.dim = 4;
  spec.per_class = 12;
  spec.separation = 4.0;
  spec.within_std = 1.0;
  spec.rotation_deg = 30.0;
  spec.translation = {1.0};
  spec.seed = 9;
  auto [source, target] = generate(spec);

  std::vector<int> target_cols;
  for (int c = 0; c < 3; ++c) {
    for (int i = 0; i < 3; ++i) target_cols.push_back(c * 12 + i);
  }
  Fixture f;
  f.train_source = std::move(source);
  f.train_target = select_columns(target, target_cols);
  f.pairs = cartesian_pairs(f.train_source, f.train_target, 1, 3, 7);
  return f;
}

TrainConfig base_config() {
  TrainConfig cfg;
  cfg.loss_kind = LossKind::DageLda;
  cfg.d = 2;
  cfg.learning_rate = 0.02;
  cfg.momentum = 0.9;
  cfg.epochs = 20;
  cfg.batch_pairs = 16;
  cfg.beta = 0.0;
  cfg.gamma = 0.0;
  cfg.seed = 3;
  return cfg;
}

// Mean same-class over mean different-class cross-domain distance for the
// fixture's pair set under a given projection.
double contrast_ratio(const Fixture& f, const Eigen::MatrixXd& v) {
  const Eigen::MatrixXd src = v.transpose() * f.train_source.features;
  const Eigen::MatrixXd tgt = v.transpose() * f.train_target.features;
  double same = 0.0, diff = 0.0;
  int n_same = 0, n_diff = 0;
  for (const auto& p : f.pairs.pairs) {
    const double d = (src.col(p.source) - tgt.col(p.target)).norm();
    if (p.same_class) {
      same += d;
      ++n_same;
    } else {
      diff += d;
      ++n_diff;
    }
  }
  return (same / n_same) / (diff / n_diff);
}

}  // namespace

TEST_CASE("zero learning rate leaves the seeded initialization untouched") {
  const Fixture f = small_problem();
  TrainConfig cfg = base_config();
  cfg.learning_rate = 0.0;
  cfg.epochs = 3;
  const JointModel model = train_joint(f.train_source, f.train_target, f.pairs, cfg);

  Rng rng(cfg.seed);
  const double limit = std::sqrt(6.0 / static_cast<double>(f.train_source.dim() + cfg.d));
  Eigen::MatrixXd expected(f.train_source.dim(), cfg.d);
  for (int j = 0; j < cfg.d; ++j) {
    for (Eigen::Index i = 0; i < expected.rows(); ++i) {
      expected(i, j) = rng.next_uniform(-limit, limit);
    }
  }
  CHECK(model.embedding.projection == expected);
  CHECK(model.classifier_w.cwiseAbs().maxCoeff() == 0.0);
  CHECK(model.classifier_b.cwiseAbs().maxCoeff() == 0.0);

  // epochs = 0 exposes the same initialization without any updates
  TrainConfig idle = base_config();
  idle.epochs = 0;
  const JointModel init = train_joint(f.train_source, f.train_target, f.pairs, idle);
  CHECK(init.embedding.projection == expected);
  CHECK(init.loss_curve.empty());
  CHECK(init.final_epoch == 0);
}

TEST_CASE("training is bit-reproducible for a fixed seed") {
  const Fixture f = small_problem();
  const TrainConfig cfg = base_config();
  const JointModel a = train_joint(f.train_source, f.train_target, f.pairs, cfg);
  const JointModel b = train_joint(f.train_source, f.train_target, f.pairs, cfg);
  CHECK(a.embedding.projection == b.embedding.projection);
  CHECK(a.classifier_w == b.classifier_w);
  CHECK(a.classifier_b == b.classifier_b);
  REQUIRE(a.loss_curve.size() == b.loss_curve.size());
  for (std::size_t i = 0; i < a.loss_curve.size(); ++i) {
    CHECK(a.loss_curve[i] == b.loss_curve[i]);
  }

  TrainConfig reseeded = cfg;
  reseeded.seed = 4;
  const JointModel c = train_joint(f.train_source, f.train_target, f.pairs, reseeded);
  CHECK(c.embedding.projection != a.embedding.projection);
}

TEST_CASE("the graph term tightens same-class pairs relative to different ones") {
  const Fixture f = small_problem();
  TrainConfig idle = base_config();
  idle.epochs = 0;
  const JointModel before = train_joint(f.train_source, f.train_target, f.pairs, idle);
  const JointModel after =
      train_joint(f.train_source, f.train_target, f.pairs, base_config());

  const double ratio_before = contrast_ratio(f, before.embedding.projection);
  const double ratio_after = contrast_ratio(f, after.embedding.projection);
  CHECK(ratio_after < ratio_before);
  CHECK(after.loss_curve.back() < after.loss_curve.front());
}

TEST_CASE("full-batch descent with a tiny step never increases the loss") {
  const Fixture f = small_problem();
  TrainConfig cfg = base_config();
  cfg.learning_rate = 1e-4;
  cfg.momentum = 0.0;
  cfg.epochs = 5;
  cfg.batch_pairs = static_cast<int>(f.pairs.pairs.size());
  cfg.beta = 1.0;
  cfg.gamma = 1.0;
  const JointModel model = train_joint(f.train_source, f.train_target, f.pairs, cfg);
  REQUIRE(model.loss_curve.size() == 5);
  for (std::size_t i = 0; i + 1 < model.loss_curve.size(); ++i) {
    CHECK(model.loss_curve[i + 1] <= model.loss_curve[i] + 1e-9);
  }
}

TEST_CASE("one projection serves both domains and the classifier head") {
  const Fixture f = small_problem();
  TrainConfig cfg = base_config();
  cfg.beta = 1.0;
  cfg.gamma = 1.0;
  cfg.epochs = 10;
  const JointModel model = train_joint(f.train_source, f.train_target, f.pairs, cfg);
  CHECK(model.embedding.kind == EmbeddingModel::Kind::Linear);
  CHECK(model.embedding.projection.rows() == 4);
  CHECK(model.embedding.projection.cols() == 2);
  CHECK(model.final_epoch == 10);

  // evaluate() must agree with the explicit pipeline W^T (V^T x) + b
  const LabeledDataset& ds = f.train_target;
  const Eigen::MatrixXd logits =
      (model.classifier_w.transpose() * (model.embedding.projection.transpose() * ds.features))
          .colwise() +
      model.classifier_b;
  int hits = 0;
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    Eigen::Index best = 0;
    logits.col(i).maxCoeff(&best);
    if (static_cast<int>(best) == ds.labels[static_cast<std::size_t>(i)]) ++hits;
  }
  const EvalReport report = evaluate(model, ds);
  CHECK(report.accuracy ==
        doctest::Approx(static_cast<double>(hits) / ds.size()).epsilon(1e-12));
}

TEST_CASE("the observer sees every epoch in order") {
  const Fixture f = small_problem();
  TrainConfig cfg = base_config();
  cfg.epochs = 4;
  std::vector<int> seen;
  std::vector<std::size_t> curve_sizes;
  train_joint(f.train_source, f.train_target, f.pairs, cfg,
              [&](int epoch, const JointModel& m) {
                seen.push_back(epoch);
                curve_sizes.push_back(m.loss_curve.size());
              });
  CHECK(seen == std::vector<int>{0, 1, 2, 3});
  CHECK(curve_sizes == std::vector<std::size_t>{1, 2, 3, 4});
}

TEST_CASE("every loss kind trains end to end") {
  const Fixture f = small_problem();
  for (const LossKind kind :
       {LossKind::DageLda, LossKind::Ccsa, LossKind::Dsne, LossKind::Nem}) {
    CAPTURE(to_string(kind));
    TrainConfig cfg = base_config();
    cfg.loss_kind = kind;
    cfg.epochs = 5;
    cfg.beta = 1.0;
    cfg.gamma = 1.0;
    cfg.epsilon = 1.0;
    cfg.nu = 0.1;
    cfg.k = 2;
    cfg.sigma = 0.0;  // below zero or zero selects the median heuristic
    const JointModel model = train_joint(f.train_source, f.train_target, f.pairs, cfg);
    CHECK(model.loss_curve.size() == 5);
    for (const double l : model.loss_curve) CHECK(std::isfinite(l));
    const EvalReport report = evaluate(model, f.train_source);
    CHECK(report.accuracy >= 0.0);
    CHECK(report.accuracy <= 1.0);
  }
}

TEST_CASE("the neighbourhood bandwidth heuristic is the median distance") {
  const Fixture f = small_problem();
  TrainConfig cfg = base_config();
  cfg.loss_kind = LossKind::Nem;
  cfg.epochs = 3;
  cfg.k = 2;
  cfg.sigma = 0.0;
  const JointModel heuristic = train_joint(f.train_source, f.train_target, f.pairs, cfg);

  cfg.sigma = median_pairwise_distance(f.train_target.features);
  const JointModel spelled = train_joint(f.train_source, f.train_target, f.pairs, cfg);
  REQUIRE(heuristic.loss_curve.size() == spelled.loss_curve.size());
  for (std::size_t i = 0; i < heuristic.loss_curve.size(); ++i) {
    CHECK(heuristic.loss_curve[i] == spelled.loss_curve[i]);
  }
  CHECK(heuristic.embedding.projection == spelled.embedding.projection);
}

TEST_CASE("softmax cross-entropy matches its closed forms") {
  // uniform logits over two classes
  const Eigen::MatrixXd uniform = Eigen::MatrixXd::Zero(2, 5);
  const auto [loss_u, grad_u] = ce_loss_and_grad(uniform, {0, 1, 0, 1, 0});
  CHECK(loss_u == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  // gradient rows: softmax(0.5) minus one-hot, averaged over columns
  CHECK(grad_u(0, 0) == doctest::Approx((0.5 - 1.0) / 5.0));
  CHECK(grad_u(1, 0) == doctest::Approx(0.5 / 5.0));

  // a decisive margin drives the loss to zero
  Eigen::MatrixXd confident = Eigen::MatrixXd::Zero(3, 4);
  const std::vector<int> labels = {2, 0, 1, 2};
  for (int i = 0; i < 4; ++i) confident(labels[static_cast<std::size_t>(i)], i) = 50.0;
  CHECK(ce_loss_and_grad(confident, labels).first == doctest::Approx(0.0).epsilon(1e-12));

  // gradient against central differences
  Rng rng(17);
  Eigen::MatrixXd logits(4, 6);
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 6; ++j) logits(i, j) = rng.next_gaussian();
  }
  const std::vector<int> ys = {0, 3, 1, 2, 2, 0};
  const Eigen::MatrixXd analytic = ce_loss_and_grad(logits, ys).second;
  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 6; ++j) {
      Eigen::MatrixXd probe = logits;
      probe(i, j) += h;
      const double up = ce_loss_and_grad(probe, ys).first;
      probe(i, j) -= 2 * h;
      const double down = ce_loss_and_grad(probe, ys).first;
      CHECK(analytic(i, j) == doctest::Approx((up - down) / (2 * h)).epsilon(1e-5));
    }
  }

  CHECK_THROWS_AS(ce_loss_and_grad(uniform, {0, 1, 0}), Error);
  try {
    ce_loss_and_grad(uniform, {0, 5, 0, 1, 0});
    FAIL("expected InvalidLabel");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidLabel);
  }
}

TEST_CASE("evaluation counts exactly what the confusion matrix says") {
  JointModel model;
  model.embedding.kind = EmbeddingModel::Kind::Linear;
  model.embedding.projection = Eigen::MatrixXd::Identity(2, 2);
  model.classifier_w = Eigen::MatrixXd::Identity(2, 2);
  model.classifier_b = Eigen::VectorXd::Zero(2);

  LabeledDataset ds;
  ds.features = Eigen::MatrixXd(2, 4);
  ds.features << 5.0, -5.0, 5.0, -5.0,
                 -5.0, 5.0, -5.0, 5.0;
  ds.labels = {0, 1, 0, 1};
  ds.domains.assign(4, DomainTag::Target);
  ds.class_count = 2;
  const EvalReport perfect = evaluate(model, ds);
  CHECK(perfect.accuracy == 1.0);
  CHECK(perfect.per_class_accuracy == std::vector<double>{1.0, 1.0});
  CHECK(perfect.confusion.trace() == 4);

  // constant logits: ties resolve to class 0
  model.classifier_w.setZero();
  const EvalReport tied = evaluate(model, ds);
  CHECK(tied.accuracy == 0.5);
  CHECK(tied.confusion(0, 0) == 2);
  CHECK(tied.confusion(1, 0) == 2);
  CHECK(tied.accuracy ==
        doctest::Approx(static_cast<double>(tied.confusion.trace()) / 4.0));
}

TEST_CASE("the mean classifier recovers exact class centroids") {
  LabeledDataset train;
  train.features = Eigen::MatrixXd(2, 4);
  train.features << 0.0, 2.0, 10.0, 12.0,
                    0.0, 0.0, 0.0, 0.0;
  train.labels = {0, 0, 1, 1};
  train.domains.assign(4, DomainTag::Source);
  train.class_count = 2;

  LabeledDataset test;
  test.features = Eigen::MatrixXd(2, 3);
  test.features << 1.5, 10.5, 6.0,
                   0.0, 0.0, 0.0;
  test.labels = {0, 1, 0};  // 6.0 sits at the midpoint: tie goes to class 0
  test.domains.assign(3, DomainTag::Target);
  test.class_count = 2;

  const EvalReport report = ncm_baseline(train, test);
  CHECK(report.accuracy == 1.0);
  CHECK(report.confusion(0, 0) == 2);
  CHECK(report.confusion(1, 1) == 1);

  LabeledDataset missing = train;
  missing.class_count = 3;  // class 2 never observed
  try {
    ncm_baseline(missing, test);
    FAIL("expected MissingClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingClass);
  }
}

TEST_CASE("impossible training inputs raise typed errors") {
  const Fixture f = small_problem();

  PairSet empty;
  try {
    train_joint(f.train_source, f.train_target, empty, base_config());
    FAIL("expected EmptyPairSet");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EmptyPairSet);
  }

  TrainConfig bad = base_config();
  bad.momentum = 1.0;
  CHECK_THROWS_AS(train_joint(f.train_source, f.train_target, f.pairs, bad), Error);
  bad = base_config();
  bad.batch_pairs = 0;
  CHECK_THROWS_AS(train_joint(f.train_source, f.train_target, f.pairs, bad), Error);
  bad = base_config();
  bad.beta = -0.5;
  CHECK_THROWS_AS(train_joint(f.train_source, f.train_target, f.pairs, bad), Error);

  // a class present in source but absent from the target training set
  const LabeledDataset clipped = select_columns(f.train_target, {0, 1, 2, 3, 4, 5});
  try {
    train_joint(f.train_source, clipped, f.pairs, base_config());
    FAIL("expected MissingClass");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingClass);
  }

  PairSet out_of_range = f.pairs;
  out_of_range.pairs[0].target = 999;
  CHECK_THROWS_AS(
      train_joint(f.train_source, f.train_target, out_of_range, base_config()), Error);

  const double huge = 1e18;
  TrainConfig diverging = base_config();
  diverging.learning_rate = huge;
  diverging.beta = 1.0;
  diverging.gamma = 1.0;
  try {
    train_joint(f.train_source, f.train_target, f.pairs, diverging);
    FAIL("expected NonFiniteLoss");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteLoss);
  }
}
