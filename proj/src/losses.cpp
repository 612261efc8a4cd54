#include "dage/losses.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dage {
namespace {

double graph_trace(const Eigen::MatrixXd& phi, const Eigen::MatrixXd& l) {
  if (phi.cols() != l.rows() || l.rows() != l.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "graph size " + std::to_string(l.rows()) + " does not match " +
                    std::to_string(phi.cols()) + " embedded columns");
  }
  return (phi * l).cwiseProduct(phi).sum();  // tr(Phi L Phi^T)
}

std::vector<int> columns_of(const Batch& batch, DomainTag tag) {
  std::vector<int> cols;
  for (std::size_t i = 0; i < batch.domains.size(); ++i) {
    if (batch.domains[i] == tag) cols.push_back(static_cast<int>(i));
  }
  return cols;
}

}  // namespace

std::optional<Violation> validate(const Batch& b) {
  const std::size_t n = static_cast<std::size_t>(b.embedded.cols());
  if (b.labels.size() != n || b.domains.size() != n) {
    return Violation{"labels/domains must have one entry per embedded column"};
  }
  if (b.original_features.size() > 0 &&
      b.original_features.cols() != b.embedded.cols()) {
    return Violation{"original features must cover the same columns as the embedding"};
  }
  if (!b.embedded.allFinite()) {
    return Violation{"embedded values must be finite"};
  }
  bool has_source = false;
  bool has_target = false;
  for (const DomainTag tag : b.domains) {
    (tag == DomainTag::Source ? has_source : has_target) = true;
  }
  if (!has_source || !has_target) {
    return Violation{"batch needs at least one source and one target column"};
  }
  return std::nullopt;
}

LossValue dage_loss(const Eigen::MatrixXd& phi, const LaplacianMatrix& l,
                    const LaplacianMatrix& b, double denom_floor) {
  const double num = graph_trace(phi, l.entries);
  const double den = graph_trace(phi, b.entries);
  const double floor = denom_floor * std::max(1.0, num);
  LossValue out;
  out.degenerate_denominator = den < floor;
  out.value = num / std::max(den, floor);
  return out;
}

Eigen::MatrixXd dage_grad(const Eigen::MatrixXd& phi, const LaplacianMatrix& l,
                          const LaplacianMatrix& b, double denom_floor) {
  const double num = graph_trace(phi, l.entries);
  const double den = graph_trace(phi, b.entries);
  if (den < denom_floor * std::max(1.0, num)) {
    throw Error(ErrorCode::DegenerateDenominator,
                "penalty energy " + std::to_string(den) + " below floor; gradient undefined");
  }
  const Eigen::MatrixXd dnum = phi * (l.entries + l.entries.transpose());
  const Eigen::MatrixXd dden = phi * (b.entries + b.entries.transpose());
  return (dnum * den - num * dden) / (den * den);
}

LossValue ccsa_loss(const Batch& batch, double margin) {
  if (!(margin > 0.0)) {
    throw Error(ErrorCode::NonPositiveMargin,
                "contrastive margin must be positive, got " + std::to_string(margin));
  }
  const std::vector<int> sources = columns_of(batch, DomainTag::Source);
  const std::vector<int> targets = columns_of(batch, DomainTag::Target);
  LossValue out;
  // Similarity term first, then dissimilarity, both source-major so the
  // contribution list is deterministic.
  for (const int i : sources) {
    for (const int j : targets) {
      if (batch.labels[static_cast<std::size_t>(i)] !=
          batch.labels[static_cast<std::size_t>(j)])
        continue;
      const double d2 = (batch.embedded.col(i) - batch.embedded.col(j)).squaredNorm();
      out.contributions.push_back({i, j, 0.5 * d2});
      out.value += 0.5 * d2;
    }
  }
  for (const int i : sources) {
    for (const int j : targets) {
      if (batch.labels[static_cast<std::size_t>(i)] ==
          batch.labels[static_cast<std::size_t>(j)])
        continue;
      const double dist = (batch.embedded.col(i) - batch.embedded.col(j)).norm();
      const double gap = std::max(0.0, margin - dist);
      out.contributions.push_back({i, j, 0.5 * gap * gap});
      out.value += 0.5 * gap * gap;
    }
  }
  return out;
}

LossValue dsne_loss(const Batch& batch) {
  const std::vector<int> sources = columns_of(batch, DomainTag::Source);
  const std::vector<int> targets = columns_of(batch, DomainTag::Target);
  LossValue out;
  for (const int j : targets) {
    int farthest_same = -1;
    int nearest_diff = -1;
    double max_same = -1.0;
    double min_diff = std::numeric_limits<double>::infinity();
    for (const int i : sources) {
      const double d2 = (batch.embedded.col(i) - batch.embedded.col(j)).squaredNorm();
      if (batch.labels[static_cast<std::size_t>(i)] ==
          batch.labels[static_cast<std::size_t>(j)]) {
        if (d2 > max_same) {
          max_same = d2;
          farthest_same = i;
        }
      } else if (d2 < min_diff) {
        min_diff = d2;
        nearest_diff = i;
      }
    }
    if (farthest_same < 0) {
      throw Error(ErrorCode::MissingSameClassSource,
                  "target column " + std::to_string(j) + " has no same-class source");
    }
    if (nearest_diff < 0) {
      throw Error(ErrorCode::MissingDifferentClassSource,
                  "target column " + std::to_string(j) + " has no different-class source");
    }
    out.contributions.push_back({farthest_same, j, max_same});
    out.contributions.push_back({nearest_diff, j, -min_diff});
    out.value += max_same - min_diff;
  }
  return out;
}

LossValue nem_loss(const Batch& batch, double margin, double nu, int k, double sigma) {
  if (batch.original_features.cols() != batch.embedded.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "neighbourhood loss needs original features for every batch column");
  }
  LossValue out = ccsa_loss(batch, margin);

  const std::vector<int> targets = columns_of(batch, DomainTag::Target);
  if (static_cast<int>(targets.size()) <= k) {
    throw Error(ErrorCode::KTooLarge,
                "batch has " + std::to_string(targets.size()) +
                    " target columns, need more than k = " + std::to_string(k));
  }
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::NonPositiveSigma,
                "affinity bandwidth must be positive, got " + std::to_string(sigma));
  }
  Eigen::MatrixXd target_features(batch.original_features.rows(),
                                  static_cast<Eigen::Index>(targets.size()));
  for (std::size_t c = 0; c < targets.size(); ++c) {
    target_features.col(static_cast<Eigen::Index>(c)) =
        batch.original_features.col(targets[c]);
  }
  const auto neighbours = knn_in_input_space(target_features, k);

  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (std::size_t a = 0; a < targets.size(); ++a) {
    const int i = targets[a];
    for (const int nb : neighbours[a]) {
      const int j = targets[static_cast<std::size_t>(nb)];
      const double affinity =
          std::exp(-(batch.original_features.col(i) - batch.original_features.col(j))
                        .squaredNorm() *
                   inv);
      const double dist = (batch.embedded.col(i) - batch.embedded.col(j)).norm();
      out.contributions.push_back({i, j, nu * dist * affinity});
      out.value += nu * dist * affinity;
    }
  }
  return out;
}

Eigen::MatrixXd finite_difference_grad(const LossFn& loss_fn, const Eigen::MatrixXd& phi,
                                       double h) {
  const double step = h > 0.0 ? h : default_fd_step(phi);
  Eigen::MatrixXd grad(phi.rows(), phi.cols());
  Eigen::MatrixXd probe = phi;
  for (Eigen::Index j = 0; j < phi.cols(); ++j) {
    for (Eigen::Index i = 0; i < phi.rows(); ++i) {
      probe(i, j) = phi(i, j) + step;
      const double up = loss_fn(probe);
      probe(i, j) = phi(i, j) - step;
      const double down = loss_fn(probe);
      probe(i, j) = phi(i, j);
      if (!std::isfinite(up) || !std::isfinite(down)) {
        throw Error(ErrorCode::NonFiniteProbe,
                    "loss not finite near entry (" + std::to_string(i) + ", " +
                        std::to_string(j) + ")");
      }
      grad(i, j) = (up - down) / (2.0 * step);
    }
  }
  return grad;
}

}  // namespace dage
