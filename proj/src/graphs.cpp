#include "dage/graphs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace dage {
namespace {

void check_batch_shape(Eigen::Index n, const std::vector<int>& labels,
                       const std::vector<DomainTag>& domains) {
  if (labels.size() != static_cast<std::size_t>(n) ||
      domains.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::DimensionMismatch,
                "labels/domains must have one entry per embedded column");
  }
}

Eigen::MatrixXd pairwise_distances(const Eigen::MatrixXd& x) {
  const Eigen::Index n = x.cols();
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (x.col(i) - x.col(j)).norm();
      d(i, j) = dist;
      d(j, i) = dist;
    }
  }
  return d;
}

}  // namespace

void check_weights(const WeightMatrix& w) {
  const Eigen::Index n = w.entries.rows();
  if (w.entries.cols() != n) {
    throw Error(ErrorCode::DimensionMismatch, "weight matrix must be square");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (w.entries(i, i) != 0.0) {
      throw Error(ErrorCode::NonZeroDiagonal,
                  "weight matrix has non-zero diagonal at " + std::to_string(i));
    }
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!(w.entries(i, j) >= 0.0)) {
        throw Error(ErrorCode::NegativeWeight,
                    "weight (" + std::to_string(i) + ", " + std::to_string(j) +
                        ") is negative or NaN");
      }
    }
  }
}

LaplacianMatrix laplacian(const WeightMatrix& w) {
  check_weights(w);
  const Eigen::MatrixXd s = 0.5 * (w.entries + w.entries.transpose());
  LaplacianMatrix l;
  l.entries = Eigen::MatrixXd(s.rowwise().sum().asDiagonal());
  l.entries -= s;
  return l;
}

GraphPair dage_lda_graphs(const std::vector<int>& labels) {
  const Eigen::Index n = static_cast<Eigen::Index>(labels.size());
  GraphPair gp;
  gp.intrinsic.entries = Eigen::MatrixXd::Zero(n, n);
  gp.penalty.entries = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
        gp.intrinsic.entries(i, j) = 1.0;
      } else {
        gp.penalty.entries(i, j) = 1.0;
      }
    }
  }
  return gp;
}

GraphPair ccsa_graphs(const Eigen::MatrixXd& embedded, const std::vector<int>& labels,
                      const std::vector<DomainTag>& domains, double margin,
                      double dist_floor) {
  const Eigen::Index n = embedded.cols();
  check_batch_shape(n, labels, domains);
  if (!(margin > 0.0)) {
    throw Error(ErrorCode::NonPositiveMargin,
                "contrastive margin must be positive, got " + std::to_string(margin));
  }
  const double floor = dist_floor > 0.0 ? dist_floor : 1e-9 * margin;

  GraphPair gp;
  gp.intrinsic.entries = Eigen::MatrixXd::Zero(n, n);
  gp.penalty.entries = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (domains[static_cast<std::size_t>(i)] != DomainTag::Source) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (domains[static_cast<std::size_t>(j)] != DomainTag::Target) continue;
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
        gp.intrinsic.entries(i, j) = 0.5;
      } else {
        const double dist = std::max((embedded.col(i) - embedded.col(j)).norm(), floor);
        if (dist < margin) {
          const double gap = margin - dist;
          gp.penalty.entries(i, j) = gap * gap / (2.0 * dist * dist);
        }
      }
    }
  }
  return gp;
}

GraphPair dsne_graphs(const Eigen::MatrixXd& embedded, const std::vector<int>& labels,
                      const std::vector<DomainTag>& domains, bool require_sources) {
  const Eigen::Index n = embedded.cols();
  check_batch_shape(n, labels, domains);

  GraphPair gp;
  gp.intrinsic.entries = Eigen::MatrixXd::Zero(n, n);
  gp.penalty.entries = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    if (domains[static_cast<std::size_t>(j)] != DomainTag::Target) continue;
    Eigen::Index farthest_same = -1;
    Eigen::Index nearest_diff = -1;
    double max_same = -1.0;
    double min_diff = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i) {
      if (domains[static_cast<std::size_t>(i)] != DomainTag::Source) continue;
      const double dist = (embedded.col(i) - embedded.col(j)).norm();
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
        if (dist > max_same) {
          max_same = dist;
          farthest_same = i;
        }
      } else if (dist < min_diff) {
        min_diff = dist;
        nearest_diff = i;
      }
    }
    if (farthest_same >= 0) {
      gp.intrinsic.entries(farthest_same, j) = 1.0;
    } else if (require_sources) {
      throw Error(ErrorCode::MissingSameClassSource,
                  "target column " + std::to_string(j) + " has no same-class source");
    }
    if (nearest_diff >= 0) {
      gp.penalty.entries(nearest_diff, j) = 1.0;
    } else if (require_sources) {
      throw Error(ErrorCode::MissingDifferentClassSource,
                  "target column " + std::to_string(j) + " has no different-class source");
    }
  }
  return gp;
}

std::vector<std::vector<int>> knn_in_input_space(const Eigen::MatrixXd& features, int k) {
  const Eigen::Index n = features.cols();
  if (k < 1 || k > n - 1) {
    throw Error(ErrorCode::KTooLarge, "k = " + std::to_string(k) + " not in [1, " +
                                          std::to_string(n - 1) + "]");
  }
  const Eigen::MatrixXd dist = pairwise_distances(features);
  std::vector<std::vector<int>> neighbours(static_cast<std::size_t>(n));
  std::vector<int> order(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    order.clear();
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j != i) order.push_back(static_cast<int>(j));
    }
    // Ties resolve toward the lower column index; stable sort on distance
    // keeps the pre-sorted index order for equal keys.
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return dist(i, a) < dist(i, b);
    });
    neighbours[static_cast<std::size_t>(i)].assign(order.begin(), order.begin() + k);
  }
  return neighbours;
}

WeightMatrix nem_neighbour_weights(const Eigen::MatrixXd& embedded,
                                   const Eigen::MatrixXd& original_features,
                                   const std::vector<std::vector<int>>& neighbours,
                                   const std::vector<DomainTag>& domains, double nu,
                                   double sigma, double dist_floor) {
  const Eigen::Index n = embedded.cols();
  if (original_features.cols() != n ||
      neighbours.size() != static_cast<std::size_t>(n) ||
      domains.size() != static_cast<std::size_t>(n)) {
    throw Error(ErrorCode::DimensionMismatch,
                "embedded, original features, neighbours and domains must agree in size");
  }
  if (!(sigma > 0.0)) {
    throw Error(ErrorCode::NonPositiveSigma,
                "affinity bandwidth must be positive, got " + std::to_string(sigma));
  }
  if (!(nu >= 0.0)) {
    throw Error(ErrorCode::NegativeWeight,
                "neighbourhood strength must be non-negative, got " + std::to_string(nu));
  }
  WeightMatrix w;
  w.entries = Eigen::MatrixXd::Zero(n, n);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (domains[static_cast<std::size_t>(i)] != DomainTag::Target) continue;
    for (const int j : neighbours[static_cast<std::size_t>(i)]) {
      if (j == static_cast<int>(i)) continue;
      if (domains[static_cast<std::size_t>(j)] != DomainTag::Target) continue;
      const double affinity =
          std::exp(-(original_features.col(i) - original_features.col(j)).squaredNorm() * inv);
      const double dist = std::max((embedded.col(i) - embedded.col(j)).norm(), dist_floor);
      w.entries(i, j) = nu * affinity / dist;
    }
  }
  return w;
}

WeightMatrix nem_intrinsic(const Eigen::MatrixXd& embedded,
                           const Eigen::MatrixXd& original_features,
                           const std::vector<std::vector<int>>& neighbours,
                           const std::vector<int>& labels,
                           const std::vector<DomainTag>& domains, double nu, double sigma,
                           double dist_floor) {
  const Eigen::Index n = embedded.cols();
  check_batch_shape(n, labels, domains);
  WeightMatrix w = nem_neighbour_weights(embedded, original_features, neighbours, domains, nu,
                                         sigma, dist_floor);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (domains[static_cast<std::size_t>(i)] != DomainTag::Source) continue;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (domains[static_cast<std::size_t>(j)] != DomainTag::Target) continue;
      if (labels[static_cast<std::size_t>(i)] == labels[static_cast<std::size_t>(j)]) {
        w.entries(i, j) += 0.5;
      }
    }
  }
  return w;
}

double median_pairwise_distance(const Eigen::MatrixXd& features) {
  const Eigen::Index n = features.cols();
  if (n < 2) {
    throw Error(ErrorCode::NonPositiveSigma,
                "median pairwise distance needs at least two columns");
  }
  std::vector<double> dists;
  dists.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      dists.push_back((features.col(i) - features.col(j)).norm());
    }
  }
  std::sort(dists.begin(), dists.end());
  const std::size_t m = dists.size();
  const double median =
      m % 2 == 1 ? dists[m / 2] : 0.5 * (dists[m / 2 - 1] + dists[m / 2]);
  return median;
}

}  // namespace dage
