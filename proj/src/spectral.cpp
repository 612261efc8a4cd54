#include "dage/spectral.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace dage {
namespace {

void check_solver_dims(const ScatterPencil& p, int d) {
  const Eigen::Index m = p.numerator.rows();
  if (p.numerator.cols() != m || p.denominator.rows() != m || p.denominator.cols() != m) {
    throw Error(ErrorCode::DimensionMismatch,
                "pencil matrices must be square and of equal size");
  }
  if (m > kMaxEigenDim) {
    throw Error(ErrorCode::DimensionTooLarge,
                "pencil size " + std::to_string(m) + " exceeds the dense-solver cap of " +
                    std::to_string(kMaxEigenDim));
  }
  if (d < 1 || d > m) {
    throw Error(ErrorCode::DimensionTooLarge,
                "target dimension " + std::to_string(d) + " not in [1, " + std::to_string(m) +
                    "]");
  }
}

// Flip columns so the largest-magnitude entry of each is positive; ties go to
// the lowest row so repeated runs agree bit for bit.
void fix_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index c = 0; c < v.cols(); ++c) {
    Eigen::Index arg = 0;
    double best = -1.0;
    for (Eigen::Index r = 0; r < v.rows(); ++r) {
      const double mag = std::abs(v(r, c));
      if (mag > best) {
        best = mag;
        arg = r;
      }
    }
    if (v(arg, c) < 0.0) v.col(c) = -v.col(c);
  }
}

Eigen::MatrixXd symmetrized(const Eigen::MatrixXd& m) {
  return 0.5 * (m + m.transpose());
}

}  // namespace

std::optional<Violation> validate(const ScatterPencil& p) {
  const Eigen::Index m = p.numerator.rows();
  if (p.numerator.cols() != m || p.denominator.rows() != m || p.denominator.cols() != m) {
    return Violation{"pencil matrices must be square and of equal size"};
  }
  for (const auto* mat : {&p.numerator, &p.denominator}) {
    const double scale = std::max(1.0, mat->cwiseAbs().maxCoeff());
    if (((*mat) - mat->transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale) {
      return Violation{"pencil matrix is asymmetric beyond tolerance"};
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(symmetrized(*mat),
                                                      Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-9 * scale) {
      return Violation{"pencil matrix is not positive semi-definite"};
    }
  }
  return std::nullopt;
}

Eigen::MatrixXd scatter(const Eigen::MatrixXd& x, const LaplacianMatrix& l, double reg) {
  if (x.cols() != l.entries.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "data has " + std::to_string(x.cols()) + " columns but graph has " +
                    std::to_string(l.entries.rows()) + " vertices");
  }
  Eigen::MatrixXd m = symmetrized(x * l.entries * x.transpose());
  if (reg > 0.0 && x.rows() > 0) {
    m.diagonal().array() += reg * (m.trace() / static_cast<double>(x.rows()));
  }
  return m;
}

double ridge_amount(const ScatterPencil& p, double reg) {
  const double m = static_cast<double>(p.numerator.rows());
  double scale = p.numerator.trace() / m;
  if (!(scale > 0.0)) scale = p.denominator.trace() / m;
  if (!(scale > 0.0)) scale = 1.0;
  return reg * scale;
}

EmbeddingModel solve_ratio_trace(const ScatterPencil& p, int d, double reg) {
  check_solver_dims(p, d);
  const Eigen::Index m = p.numerator.rows();

  Eigen::MatrixXd a = symmetrized(p.numerator);
  a.diagonal().array() += ridge_amount(p, reg);
  const Eigen::MatrixXd b = symmetrized(p.denominator);

  // Reduce the symmetric-definite pencil (B, A) to a standard symmetric
  // problem via the Cholesky factor of A: eigenpairs of C = Linv B Linv^T
  // map back through v = L^-T u, which also makes V A-orthonormal.
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularNumerator,
                "numerator-role matrix is not positive definite after regularization");
  }
  const Eigen::MatrixXd t = llt.matrixL().solve(b);
  const Eigen::MatrixXd c = symmetrized(llt.matrixL().solve(t.transpose()).transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorCode::SingularNumerator, "eigendecomposition failed to converge");
  }

  // Eigen sorts ascending; take the top d, largest first.
  Eigen::MatrixXd u(m, d);
  for (int k = 0; k < d; ++k) {
    u.col(k) = es.eigenvectors().col(m - 1 - k);
  }
  Eigen::MatrixXd v = llt.matrixU().solve(u);
  fix_signs(v);

  EmbeddingModel model;
  model.kind = EmbeddingModel::Kind::Linear;
  model.projection = std::move(v);
  model.reg = reg;
  model.solver = SolverKind::RatioTrace;
  return model;
}

TraceRatioResult solve_trace_ratio(const ScatterPencil& p, int d, double tol, int max_iter,
                                   double reg) {
  check_solver_dims(p, d);

  Eigen::MatrixXd a = symmetrized(p.numerator);
  a.diagonal().array() += ridge_amount(p, reg);
  const Eigen::MatrixXd b = symmetrized(p.denominator);

  const auto ratio_at = [&](const Eigen::MatrixXd& v) {
    const double num = (v.transpose() * a * v).trace();
    const double den = (v.transpose() * b * v).trace();
    return std::pair<double, bool>{den > 0.0 ? num / den : 0.0, den > 0.0};
  };

  // Start from the trace ratio attained by the ratio-trace subspace; as the
  // objective evaluated at a feasible (orthonormal) point it upper-bounds the
  // optimum, so every later iterate can only move down.
  const EmbeddingModel warm = solve_ratio_trace(p, d, reg);
  Eigen::MatrixXd v = Eigen::HouseholderQR<Eigen::MatrixXd>(warm.projection)
                          .householderQ() *
                      Eigen::MatrixXd::Identity(p.dim(), d);

  TraceRatioResult result;
  auto [lambda, ok] = ratio_at(v);
  result.lambda_history.push_back(lambda);
  if (ok) {
    for (int it = 1; it <= max_iter; ++it) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a - lambda * b);
      if (es.info() != Eigen::Success) break;
      v = es.eigenvectors().leftCols(d);  // d smallest eigenvalues
      const auto [next, fine] = ratio_at(v);
      if (!fine) break;
      result.lambda_history.push_back(next);
      result.iterations = it;
      const bool done = std::abs(next - lambda) <= tol * std::max(1.0, std::abs(lambda));
      lambda = next;
      if (done) {
        result.converged = true;
        break;
      }
    }
  }

  fix_signs(v);
  result.lambda = lambda;
  result.model.kind = EmbeddingModel::Kind::Linear;
  result.model.projection = std::move(v);
  result.model.reg = reg;
  result.model.solver = SolverKind::TraceRatio;
  result.model.lambda = lambda;
  return result;
}

Eigen::MatrixXd gram_cross(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                           const Kernel& kernel) {
  if (a.rows() != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "kernel arguments have feature dims " + std::to_string(a.rows()) + " and " +
                    std::to_string(b.rows()));
  }
  if (kernel.type == KernelType::Linear) {
    return a.transpose() * b;
  }
  if (!(kernel.sigma > 0.0)) {
    throw Error(ErrorCode::NonPositiveSigma,
                "RBF bandwidth must be positive, got " + std::to_string(kernel.sigma));
  }
  const double inv = 1.0 / (2.0 * kernel.sigma * kernel.sigma);
  Eigen::MatrixXd k(a.cols(), b.cols());
  for (Eigen::Index i = 0; i < a.cols(); ++i) {
    for (Eigen::Index j = 0; j < b.cols(); ++j) {
      k(i, j) = std::exp(-(a.col(i) - b.col(j)).squaredNorm() * inv);
    }
  }
  return k;
}

Eigen::MatrixXd gram(const Eigen::MatrixXd& x, const Kernel& kernel) {
  Eigen::MatrixXd k = gram_cross(x, x, kernel);
  if (kernel.type == KernelType::Rbf) {
    k.diagonal().setOnes();  // exact unit self-affinity
  }
  return symmetrized(k);
}

EmbeddingModel fit_linear_dage(const Eigen::MatrixXd& x, const GraphPair& gp, int d,
                               double reg, SolverKind solver) {
  ScatterPencil p;
  p.numerator = scatter(x, laplacian(gp.intrinsic), 0.0);
  p.denominator = scatter(x, laplacian(gp.penalty), 0.0);
  if (solver == SolverKind::RatioTrace) {
    return solve_ratio_trace(p, d, reg);
  }
  return solve_trace_ratio(p, d, kTraceRatioTol, kTraceRatioMaxIter, reg).model;
}

EmbeddingModel fit_kernel_dage(const Eigen::MatrixXd& x, const GraphPair& gp,
                               const Kernel& kernel, int d, double reg, SolverKind solver) {
  const Eigen::MatrixXd k = gram(x, kernel);
  ScatterPencil p;
  p.numerator = symmetrized(k * laplacian(gp.intrinsic).entries * k);
  p.denominator = symmetrized(k * laplacian(gp.penalty).entries * k);
  EmbeddingModel model = solver == SolverKind::RatioTrace
                             ? solve_ratio_trace(p, d, reg)
                             : solve_trace_ratio(p, d, kTraceRatioTol, kTraceRatioMaxIter, reg)
                                   .model;
  model.kind = EmbeddingModel::Kind::Kernel;
  model.reference = x;
  model.kernel = kernel;
  return model;
}

Eigen::MatrixXd transform(const EmbeddingModel& model, const Eigen::MatrixXd& x_new) {
  if (model.kind == EmbeddingModel::Kind::Linear) {
    if (x_new.rows() != model.projection.rows()) {
      throw Error(ErrorCode::DimensionMismatch,
                  "model expects " + std::to_string(model.projection.rows()) +
                      " features, got " + std::to_string(x_new.rows()));
    }
    return model.projection.transpose() * x_new;
  }
  if (x_new.rows() != model.reference.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "model expects " + std::to_string(model.reference.rows()) + " features, got " +
                    std::to_string(x_new.rows()));
  }
  return model.projection.transpose() * gram_cross(model.reference, x_new, model.kernel);
}

}  // namespace dage
