#include "dage/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dage {
namespace {

std::vector<std::string_view> split_line(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
  return fields;
}

double parse_feature(std::string_view field, std::size_t row) {
  double value = 0.0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end) {
    throw Error(ErrorCode::RaggedRow,
                "row " + std::to_string(row) + ": unparsable feature value '" +
                    std::string(field) + "'");
  }
  if (!std::isfinite(value)) {
    throw Error(ErrorCode::NonFiniteValue,
                "row " + std::to_string(row) + ": feature value is not finite");
  }
  return value;
}

int parse_label(std::string_view field, std::size_t row) {
  int value = 0;
  const char* begin = field.data();
  const char* end = begin + field.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || value < 0) {
    throw Error(ErrorCode::InvalidLabel,
                "row " + std::to_string(row) + ": label must be a non-negative integer, got '" +
                    std::string(field) + "'");
  }
  return value;
}

DomainTag parse_domain(std::string_view field, std::size_t row) {
  if (field == "source") return DomainTag::Source;
  if (field == "target") return DomainTag::Target;
  throw Error(ErrorCode::UnknownDomainTag,
              "row " + std::to_string(row) + ": domain must be 'source' or 'target', got '" +
                  std::string(field) + "'");
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, ptr);
}

LabeledDataset parse_feature_csv(std::string_view text) {
  // Split into lines on LF; tolerate a trailing CR so files written on other
  // systems still load, and ignore one trailing empty line.
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) {
    throw Error(ErrorCode::MalformedHeader, "empty file");
  }

  const auto header = split_line(lines[0]);
  if (header.size() < 3 || header[0] != "domain" || header[1] != "label") {
    throw Error(ErrorCode::MalformedHeader,
                "expected header 'domain,label,f0,...', got '" + std::string(lines[0]) + "'");
  }
  const std::size_t dim = header.size() - 2;
  for (std::size_t j = 0; j < dim; ++j) {
    const std::string expected = "f" + std::to_string(j);
    if (header[j + 2] != expected) {
      throw Error(ErrorCode::MalformedHeader,
                  "feature column " + std::to_string(j) + " must be named '" + expected +
                      "', got '" + std::string(header[j + 2]) + "'");
    }
  }

  const std::size_t n = lines.size() - 1;
  LabeledDataset ds;
  ds.features.resize(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(n));
  ds.labels.reserve(n);
  ds.domains.reserve(n);

  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t row = i + 2;  // 1-based line number for messages
    const auto fields = split_line(lines[i + 1]);
    if (fields.size() != dim + 2) {
      throw Error(ErrorCode::RaggedRow,
                  "row " + std::to_string(row) + ": expected " + std::to_string(dim + 2) +
                      " fields, got " + std::to_string(fields.size()));
    }
    ds.domains.push_back(parse_domain(fields[0], row));
    ds.labels.push_back(parse_label(fields[1], row));
    for (std::size_t j = 0; j < dim; ++j) {
      ds.features(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) =
          parse_feature(fields[j + 2], row);
    }
  }

  int max_label = -1;
  for (const int label : ds.labels) max_label = std::max(max_label, label);
  ds.class_count = max_label + 1;
  return ds;
}

LabeledDataset load_feature_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorCode::MissingFile, "cannot open '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return parse_feature_csv(buffer.str());
  } catch (Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

std::string to_feature_csv(const LabeledDataset& ds) {
  std::string out = "domain,label";
  for (Eigen::Index j = 0; j < ds.dim(); ++j) {
    out += ",f" + std::to_string(j);
  }
  out += '\n';
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    out += to_string(ds.domains[static_cast<std::size_t>(i)]);
    out += ',';
    out += std::to_string(ds.labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < ds.dim(); ++j) {
      out += ',';
      out += format_double(ds.features(j, i));
    }
    out += '\n';
  }
  return out;
}

void write_feature_csv(const LabeledDataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorCode::MissingFile, "cannot write '" + path.string() + "'");
  }
  out << to_feature_csv(ds);
}

std::optional<Violation> validate(const LabeledDataset& ds) {
  const std::size_t n = static_cast<std::size_t>(ds.size());
  if (ds.labels.size() != n) {
    return Violation{"label count " + std::to_string(ds.labels.size()) +
                     " does not match " + std::to_string(n) + " columns"};
  }
  if (ds.domains.size() != n) {
    return Violation{"domain count " + std::to_string(ds.domains.size()) +
                     " does not match " + std::to_string(n) + " columns"};
  }
  for (std::size_t i = 0; i < n; ++i) {
    const int label = ds.labels[i];
    if (label < 0 || label >= ds.class_count) {
      return Violation{"sample " + std::to_string(i) + ": label " + std::to_string(label) +
                       " outside [0, " + std::to_string(ds.class_count) + ")"};
    }
  }
  for (Eigen::Index i = 0; i < ds.features.cols(); ++i) {
    for (Eigen::Index j = 0; j < ds.features.rows(); ++j) {
      if (!std::isfinite(ds.features(j, i))) {
        return Violation{"sample " + std::to_string(i) + ": feature " + std::to_string(j) +
                         " is not finite"};
      }
    }
  }
  return std::nullopt;
}

ClassIndex build_class_index(const LabeledDataset& ds) {
  ClassIndex index;
  index.source.resize(static_cast<std::size_t>(ds.class_count));
  index.target.resize(static_cast<std::size_t>(ds.class_count));
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    const std::size_t c = static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)]);
    auto& lists = ds.domains[static_cast<std::size_t>(i)] == DomainTag::Source ? index.source
                                                                               : index.target;
    lists[c].push_back(static_cast<int>(i));
  }
  return index;
}

LabeledDataset select_columns(const LabeledDataset& ds, const std::vector<int>& columns) {
  LabeledDataset out;
  out.features.resize(ds.dim(), static_cast<Eigen::Index>(columns.size()));
  out.labels.reserve(columns.size());
  out.domains.reserve(columns.size());
  out.class_count = ds.class_count;
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const int c = columns[i];
    out.features.col(static_cast<Eigen::Index>(i)) = ds.features.col(c);
    out.labels.push_back(ds.labels[static_cast<std::size_t>(c)]);
    out.domains.push_back(ds.domains[static_cast<std::size_t>(c)]);
  }
  return out;
}

LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.size() == 0) return b;
  if (b.size() == 0) return a;
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "cannot concatenate feature dims " + std::to_string(a.dim()) + " and " +
                    std::to_string(b.dim()));
  }
  LabeledDataset out;
  out.features.resize(a.dim(), a.size() + b.size());
  out.features.leftCols(a.size()) = a.features;
  out.features.rightCols(b.size()) = b.features;
  out.labels = a.labels;
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  out.domains = a.domains;
  out.domains.insert(out.domains.end(), b.domains.begin(), b.domains.end());
  out.class_count = std::max(a.class_count, b.class_count);
  return out;
}

}  // namespace dage
