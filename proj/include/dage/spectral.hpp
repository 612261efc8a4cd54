#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

#include "dage/graphs.hpp"

namespace dage {

inline constexpr double kDefaultReg = 1e-6;
inline constexpr double kTraceRatioTol = 1e-10;
inline constexpr int kTraceRatioMaxIter = 200;
// Dense eigendecomposition is O(m^3); refuse sizes that silently take hours.
inline constexpr int kMaxEigenDim = 4096;

enum class KernelType { Linear, Rbf };

struct Kernel {
  KernelType type = KernelType::Linear;
  double sigma = 1.0;  // RBF bandwidth, ignored for Linear
};

enum class SolverKind { RatioTrace, TraceRatio };

// Numerator plays the compactness role (intrinsic side), denominator the
// separation role (penalty side). Both symmetric PSD of equal size.
struct ScatterPencil {
  Eigen::MatrixXd numerator;
  Eigen::MatrixXd denominator;

  Eigen::Index dim() const { return numerator.rows(); }
};

std::optional<Violation> validate(const ScatterPencil& p);

struct EmbeddingModel {
  enum class Kind { Linear, Kernel };

  Kind kind = Kind::Linear;
  // m x d: projection acts on features (Linear) or on kernel evaluations
  // against the reference data (Kernel).
  Eigen::MatrixXd projection;
  Eigen::MatrixXd reference;  // D x N, Kernel models only
  Kernel kernel;              // Kernel models only
  double reg = 0.0;
  SolverKind solver = SolverKind::RatioTrace;
  std::optional<double> lambda;  // final trace ratio, TraceRatio fits only

  Eigen::Index output_dim() const { return projection.cols(); }
};

struct TraceRatioResult {
  EmbeddingModel model;
  double lambda = 0.0;
  int iterations = 0;
  std::vector<double> lambda_history;  // starts at lambda_0, monotone non-increasing
  bool converged = false;
};

// X L X^T + reg * (tr(X L X^T) / D) * I, symmetrized to kill round-off
// asymmetry. The solvers below regularize internally, so fits pass reg = 0
// here and apply the ridge exactly once, inside the solver.
Eigen::MatrixXd scatter(const Eigen::MatrixXd& x, const LaplacianMatrix& l, double reg);

// Actual ridge the solvers add to the numerator: reg scaled by tr/m so reg is
// dimensionless. A zero-trace numerator (possible in penalty-only pencils)
// falls back to the denominator's scale, then to 1, so the pencil stays
// solvable.
double ridge_amount(const ScatterPencil& p, double reg);

// Eigenvectors of the pencil (denominator, numerator + ridge) for the d
// largest eigenvalues: maximal separation per unit compactness. Columns are
// orthonormal in the regularized-numerator metric; sign fixed so each
// column's largest-magnitude entry is positive.
EmbeddingModel solve_ratio_trace(const ScatterPencil& p, int d, double reg = kDefaultReg);

// Dinkelbach-style iteration on the exact trace-ratio objective
//   lambda_{t+1} = tr(V^T A V) / tr(V^T B V),  A = numerator + ridge,
// with V_t the orthonormal eigenvectors of (A - lambda_t B) for the d
// smallest eigenvalues. lambda_0 is the trace ratio attained by the
// ratio-trace subspace, which bounds the optimum from above, so the history
// is monotone non-increasing. Non-convergence is flagged, not thrown.
TraceRatioResult solve_trace_ratio(const ScatterPencil& p, int d, double tol = kTraceRatioTol,
                                   int max_iter = kTraceRatioMaxIter,
                                   double reg = kDefaultReg);

Eigen::MatrixXd gram(const Eigen::MatrixXd& x, const Kernel& kernel);
Eigen::MatrixXd gram_cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Kernel& kernel);

// Builds the scatter pencil from laplacian(gp.intrinsic) / laplacian(gp.penalty)
// and delegates to the chosen solver.
EmbeddingModel fit_linear_dage(const Eigen::MatrixXd& x, const GraphPair& gp, int d,
                               double reg = kDefaultReg,
                               SolverKind solver = SolverKind::RatioTrace);

// Kernelized variant: pencil (K B K, K L K) over the Gram matrix; the model
// keeps the reference data and kernel for out-of-sample mapping.
EmbeddingModel fit_kernel_dage(const Eigen::MatrixXd& x, const GraphPair& gp,
                               const Kernel& kernel, int d, double reg = kDefaultReg,
                               SolverKind solver = SolverKind::RatioTrace);

// Linear: V^T X_new. Kernel: A^T gram_cross(reference, X_new).
Eigen::MatrixXd transform(const EmbeddingModel& model, const Eigen::MatrixXd& x_new);

}  // namespace dage
