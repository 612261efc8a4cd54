#include "dage/synthetic.hpp"

#include <Eigen/QR>
#include <cmath>
#include <numbers>

#include "dage/rng.hpp"

namespace dage {
namespace {

void check_spec(const ShiftSpec& spec) {
  if (spec.class_count < 2 || spec.dim < 2) {
    throw Error(ErrorCode::InvalidConfig, "need class_count >= 2 and dim >= 2");
  }
  if (spec.class_count > spec.dim) {
    throw Error(ErrorCode::InvalidConfig,
                "class means sit on axis vertices, so class_count (" +
                    std::to_string(spec.class_count) + ") must not exceed dim (" +
                    std::to_string(spec.dim) + ")");
  }
  if (!(spec.within_std > 0.0)) {
    throw Error(ErrorCode::InvalidConfig, "within_std must be positive");
  }
  if (spec.per_class < 1) {
    throw Error(ErrorCode::InvalidConfig, "per_class must be at least 1");
  }
  for (const auto* v : {&spec.translation, &spec.scale}) {
    if (!v->empty() && v->size() != 1 && v->size() != static_cast<std::size_t>(spec.dim)) {
      throw Error(ErrorCode::InvalidConfig,
                  "translation/scale must be empty, scalar, or one entry per dimension");
    }
  }
  if (!spec.scale.empty()) {
    for (const double s : spec.scale) {
      if (!(s != 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "scale entries must be non-zero");
      }
    }
  }
}

Eigen::VectorXd broadcast(const std::vector<double>& v, int dim, double fallback) {
  if (v.empty()) return Eigen::VectorXd::Constant(dim, fallback);
  if (v.size() == 1) return Eigen::VectorXd::Constant(dim, v[0]);
  return Eigen::Map<const Eigen::VectorXd>(v.data(), dim);
}

// Seeded orthonormal basis: QR of a Gaussian matrix with the sign of each
// column fixed by the factor's diagonal, so the result is a deterministic
// function of the draws.
Eigen::MatrixXd random_rotation(int dim, Rng& rng) {
  Eigen::MatrixXd g(dim, dim);
  for (int i = 0; i < dim; ++i) {
    for (int j = 0; j < dim; ++j) {
      g(i, j) = rng.next_gaussian();
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
  const Eigen::MatrixXd r = qr.matrixQR();
  for (int k = 0; k < dim; ++k) {
    if (r(k, k) < 0.0) q.col(k) = -q.col(k);
  }
  return q;
}

void rotate_first_two(Eigen::MatrixXd& x, double angle_rad) {
  const double c = std::cos(angle_rad);
  const double s = std::sin(angle_rad);
  for (Eigen::Index i = 0; i < x.cols(); ++i) {
    const double a = x(0, i);
    const double b = x(1, i);
    x(0, i) = c * a - s * b;
    x(1, i) = s * a + c * b;
  }
}

}  // namespace

std::pair<LabeledDataset, LabeledDataset> generate(const ShiftSpec& spec) {
  check_spec(spec);
  const int d = spec.dim;
  const int n = spec.class_count * spec.per_class;
  Rng rng(spec.seed);

  // Class means: scaled axis vertices (an equidistant simplex), centered,
  // then rotated by a seeded basis so no feature axis is privileged.
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(d, spec.class_count);
  for (int c = 0; c < spec.class_count; ++c) {
    means(c, c) = spec.separation;
  }
  means.colwise() -= means.rowwise().mean().eval();
  means = random_rotation(d, rng) * means;

  const auto draw_domain = [&](DomainTag tag) {
    LabeledDataset ds;
    ds.features.resize(d, n);
    ds.labels.reserve(static_cast<std::size_t>(n));
    ds.domains.assign(static_cast<std::size_t>(n), tag);
    ds.class_count = spec.class_count;
    Eigen::Index col = 0;
    for (int c = 0; c < spec.class_count; ++c) {
      for (int i = 0; i < spec.per_class; ++i, ++col) {
        for (int j = 0; j < d; ++j) {
          ds.features(j, col) = means(j, c) + spec.within_std * rng.next_gaussian();
        }
        ds.labels.push_back(c);
      }
    }
    return ds;
  };

  LabeledDataset source = draw_domain(DomainTag::Source);
  LabeledDataset target = draw_domain(DomainTag::Target);

  rotate_first_two(target.features, spec.rotation_deg * std::numbers::pi / 180.0);
  const Eigen::VectorXd scale = broadcast(spec.scale, d, 1.0);
  const Eigen::VectorXd translation = broadcast(spec.translation, d, 0.0);
  target.features = scale.asDiagonal() * target.features;
  target.features.colwise() += translation;
  return {std::move(source), std::move(target)};
}

Eigen::MatrixXd inverse_transform(const ShiftSpec& spec,
                                  const Eigen::MatrixXd& target_features) {
  check_spec(spec);
  if (target_features.rows() != spec.dim) {
    throw Error(ErrorCode::DimensionMismatch,
                "expected " + std::to_string(spec.dim) + " feature rows");
  }
  const Eigen::VectorXd scale = broadcast(spec.scale, spec.dim, 1.0);
  const Eigen::VectorXd translation = broadcast(spec.translation, spec.dim, 0.0);
  Eigen::MatrixXd x = target_features;
  x.colwise() -= translation;
  x = scale.cwiseInverse().asDiagonal() * x;
  rotate_first_two(x, -spec.rotation_deg * std::numbers::pi / 180.0);
  return x;
}

}  // namespace dage
