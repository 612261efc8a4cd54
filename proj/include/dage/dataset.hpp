#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dage/error.hpp"

namespace dage {

enum class DomainTag : std::uint8_t { Source, Target };

inline const char* to_string(DomainTag tag) {
  return tag == DomainTag::Source ? "source" : "target";
}

// Feature matrix is D x N with one sample per column, matching the
// column-vector convention used by the graph and spectral modules.
struct LabeledDataset {
  Eigen::MatrixXd features;
  std::vector<int> labels;
  std::vector<DomainTag> domains;
  int class_count = 0;

  Eigen::Index dim() const { return features.rows(); }
  Eigen::Index size() const { return features.cols(); }
};

struct Violation {
  std::string message;
};

// Structural consistency check; returns the first problem found, if any.
std::optional<Violation> validate(const LabeledDataset& ds);

// Column indices grouped per (domain, class), each list in column order.
// Lists may be empty for classes absent from a domain.
struct ClassIndex {
  std::vector<std::vector<int>> source;
  std::vector<std::vector<int>> target;

  const std::vector<std::vector<int>>& lists(DomainTag tag) const {
    return tag == DomainTag::Source ? source : target;
  }
};

ClassIndex build_class_index(const LabeledDataset& ds);

// CSV layout: header "domain,label,f0,...,f{D-1}", one sample per row.
// Numbers are written with the shortest representation that round-trips, so
// write followed by load reproduces the matrix bit for bit.
LabeledDataset parse_feature_csv(std::string_view text);
LabeledDataset load_feature_csv(const std::filesystem::path& path);
std::string to_feature_csv(const LabeledDataset& ds);
void write_feature_csv(const LabeledDataset& ds, const std::filesystem::path& path);

// Subset by global column indices; labels/domains follow, class_count kept.
LabeledDataset select_columns(const LabeledDataset& ds, const std::vector<int>& columns);

// Column-wise concatenation; class_count is the max of the two inputs.
LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);

// Shortest decimal form of a double that parses back to the same bits.
std::string format_double(double value);

}  // namespace dage
