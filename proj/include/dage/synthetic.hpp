#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <vector>

#include "dage/dataset.hpp"

namespace dage {

// Recipe for a pair of domains with a controlled covariate shift: isotropic
// Gaussian classes at simplex vertices, with the target domain rotated in the
// first two dimensions, scaled per dimension, and translated.
struct ShiftSpec {
  int class_count = 3;
  int dim = 2;
  int per_class = 50;       // samples per class per domain
  double separation = 4.0;  // distance scale between class means
  double within_std = 1.0;
  double rotation_deg = 0.0;
  std::vector<double> translation;  // empty = none; size 1 broadcasts; else size dim
  std::vector<double> scale;        // empty = none; size 1 broadcasts; else size dim
  std::uint64_t seed = 0;
};

// Draws both domains from the same class-conditionals (one seeded stream:
// rotation basis, then source samples, then target samples, class-major) and
// applies the domain transform — rotate, then scale, then translate — to the
// target draws only. Bit-identical for a fixed spec.
std::pair<LabeledDataset, LabeledDataset> generate(const ShiftSpec& spec);

// Undo the domain transform: (y - t) unscaled, then rotated back. Mapping
// target features through this recovers draws from the source distribution.
Eigen::MatrixXd inverse_transform(const ShiftSpec& spec, const Eigen::MatrixXd& target_features);

}  // namespace dage
