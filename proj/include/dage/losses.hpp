#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "dage/graphs.hpp"

namespace dage {

// One mini-batch in embedded space. original_features is only consulted by
// the neighbourhood loss (affinities live in input space) and may be empty
// otherwise.
struct Batch {
  Eigen::MatrixXd embedded;  // d x n
  std::vector<int> labels;
  std::vector<DomainTag> domains;
  Eigen::MatrixXd original_features;  // D x n or 0 x 0
};

std::optional<Violation> validate(const Batch& b);

// One pair's share of a loss, in deterministic enumeration order
// (source-major, then target index).
struct PairContribution {
  int source = 0;
  int target = 0;
  double value = 0.0;
};

struct LossValue {
  double value = 0.0;
  bool degenerate_denominator = false;
  std::vector<PairContribution> contributions;
};

inline constexpr double kDenomFloorCoeff = 1e-12;

// tr(Phi L Phi^T) / max(tr(Phi B Phi^T), floor) with
// floor = denom_floor * max(1, tr(Phi L Phi^T)). The floor only engages on
// batches whose penalty graph is empty; that is flagged, never silent.
LossValue dage_loss(const Eigen::MatrixXd& phi, const LaplacianMatrix& l,
                    const LaplacianMatrix& b, double denom_floor = kDenomFloorCoeff);

// Quotient-rule gradient of dage_loss w.r.t. Phi:
//   [Phi (L + L^T) tr(Phi B Phi^T) - tr(Phi L Phi^T) Phi (B + B^T)] / tr(Phi B Phi^T)^2
Eigen::MatrixXd dage_grad(const Eigen::MatrixXd& phi, const LaplacianMatrix& l,
                          const LaplacianMatrix& b, double denom_floor = kDenomFloorCoeff);

// Contrastive loss over cross-domain pairs, each unordered pair counted once:
//   sum_same (1/2) d^2 + sum_diff (1/2) max(0, margin - d)^2.
LossValue ccsa_loss(const Batch& batch, double margin);

// For every target column: farthest same-class source squared distance minus
// nearest different-class source squared distance.
LossValue dsne_loss(const Batch& batch);

// ccsa_loss plus the neighbourhood term
//   nu * sum_{i in targets, j in N(i)} ||phi_i - phi_j|| * k_rbf(x_i, x_j),
// with N(i) the k nearest target neighbours on the original features.
LossValue nem_loss(const Batch& batch, double margin, double nu, int k, double sigma);

using LossFn = std::function<double(const Eigen::MatrixXd&)>;

inline double default_fd_step(const Eigen::MatrixXd& phi) {
  const double scale = phi.size() > 0 ? phi.cwiseAbs().maxCoeff() : 0.0;
  return 1e-5 * (1.0 + scale);
}

// Central differences per entry: [f(Phi + h E_ij) - f(Phi - h E_ij)] / 2h.
// h <= 0 selects default_fd_step(phi).
Eigen::MatrixXd finite_difference_grad(const LossFn& loss_fn, const Eigen::MatrixXd& phi,
                                       double h = 0.0);

}  // namespace dage
