#pragma once

#include <Eigen/Core>
#include <vector>

#include "dage/dataset.hpp"

namespace dage {

// Pairwise edge weights over the columns of a batch. Entries are
// non-negative with an exactly zero diagonal; asymmetry is allowed because
// several builders emit one-sided source-row / target-column edges, and
// laplacian() symmetrizes.
struct WeightMatrix {
  Eigen::MatrixXd entries;

  Eigen::Index size() const { return entries.rows(); }
};

// Intrinsic graph pulls its edges together; penalty graph pushes them apart.
struct GraphPair {
  WeightMatrix intrinsic;
  WeightMatrix penalty;
};

// L = D - S with S = (W + W^T)/2 and D = diag(S * 1). Symmetric, positive
// semi-definite, zero row sums. With this convention,
//   sum_{i != j} W_ij ||phi_i - phi_j||^2 = 2 * tr(Phi L Phi^T).
struct LaplacianMatrix {
  Eigen::MatrixXd entries;

  Eigen::Index size() const { return entries.rows(); }
};

// Throws NegativeWeight / NonZeroDiagonal if the matrix breaks its contract.
void check_weights(const WeightMatrix& w);

LaplacianMatrix laplacian(const WeightMatrix& w);

// Label-only graphs: intrinsic connects every same-class pair with weight 1,
// penalty every different-class pair. Both symmetric; domain is ignored.
GraphPair dage_lda_graphs(const std::vector<int>& labels);

// Contrastive graphs on the current embedding (d x n, one column per sample).
// Intrinsic: weight 1/2 on every cross-domain same-class (source, target)
// pair, stored one-sided at (source row, target column). Penalty: for
// cross-domain different-class pairs closer than the margin, weight
// (margin - dist)^2 / (2 dist^2), with dist clamped below at dist_floor
// (default 1e-9 * margin when the argument is not positive). The penalty
// weight is chosen so the graph energy reproduces the hinge term
// (1/2) max(0, margin - dist)^2 exactly.
GraphPair ccsa_graphs(const Eigen::MatrixXd& embedded, const std::vector<int>& labels,
                      const std::vector<DomainTag>& domains, double margin,
                      double dist_floor = 0.0);

// Extreme-pair graphs: for every target column, one intrinsic edge to the
// farthest same-class source and one penalty edge to the nearest
// different-class source (weight 1, one-sided, ties resolved toward the
// lowest source column). With require_sources, a target lacking a same-class
// (resp. different-class) source raises MissingSameClassSource
// (MissingDifferentClassSource); otherwise that edge is simply omitted, which
// is what mini-batch training needs.
GraphPair dsne_graphs(const Eigen::MatrixXd& embedded, const std::vector<int>& labels,
                      const std::vector<DomainTag>& domains, bool require_sources = true);

// k nearest neighbours per column by Euclidean distance on the given
// features, self excluded, ties toward the lower index. Requires
// 1 <= k <= n - 1.
std::vector<std::vector<int>> knn_in_input_space(const Eigen::MatrixXd& features, int k);

// Neighbourhood part of the NEM intrinsic graph: for target columns i and
// target neighbours j in neighbours[i], add
//   nu * exp(-||x_i - x_j||^2 / (2 sigma^2)) / max(dist_ij, dist_floor)
// where the Gaussian affinity is computed on the original features and
// dist_ij on the current embedding. Weight placed at (i, j) as given.
WeightMatrix nem_neighbour_weights(const Eigen::MatrixXd& embedded,
                                   const Eigen::MatrixXd& original_features,
                                   const std::vector<std::vector<int>>& neighbours,
                                   const std::vector<DomainTag>& domains, double nu,
                                   double sigma, double dist_floor = 1e-9);

// Full NEM intrinsic graph: contrastive same-class edges plus the
// neighbourhood weights above.
WeightMatrix nem_intrinsic(const Eigen::MatrixXd& embedded,
                           const Eigen::MatrixXd& original_features,
                           const std::vector<std::vector<int>>& neighbours,
                           const std::vector<int>& labels,
                           const std::vector<DomainTag>& domains, double nu, double sigma,
                           double dist_floor = 1e-9);

// Median Euclidean distance over unordered column pairs (average of the two
// central order statistics for even counts). Used as the default bandwidth.
double median_pairwise_distance(const Eigen::MatrixXd& features);

}  // namespace dage
