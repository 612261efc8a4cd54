#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dage/dataset.hpp"
#include "dage/rng.hpp"

namespace dage {

// Training pairs between a materialized source set and target set. Indices
// are positions within those sets (which the manifest stores as sorted global
// column lists), not global dataset columns.
struct PairSet {
  struct Pair {
    int source = 0;
    int target = 0;
    bool same_class = false;
  };

  std::vector<Pair> pairs;  // all same-class pairs first, then sampled diff-class
  int ratio_same = 1;
  int ratio_diff = 1;
  std::int64_t n_same = 0;
  std::int64_t n_diff = 0;
  // What the ratio asked for; larger than n_diff when the pool ran short.
  std::int64_t n_diff_requested = 0;
};

struct ProtocolParams {
  double test_fraction = 0.3;
  int n_source_per_class = 0;
  int n_target_per_class = 0;
  int ratio_same = 1;
  int ratio_diff = 3;
  std::uint64_t test_seed = 0;
};

struct RunRecord {
  std::uint64_t seed = 0;
  std::vector<int> train_target;  // global target columns, sorted ascending
  std::vector<int> validation;
  std::vector<int> train_source;  // global source columns, sorted ascending
  PairSet pairs;
};

struct SplitManifest {
  std::string protocol = "rectified";
  std::string dataset_fingerprint;
  ProtocolParams params;
  std::vector<int> test;  // global target columns, sorted ascending; empty for traditional
  std::vector<RunRecord> runs;
};

// Stratified fixed test split: per class (ascending ids, one shared seeded
// stream), floor(fraction * n_c + 0.5) samples, at least 1. Returns (test,
// pool), both sorted ascending.
std::pair<std::vector<int>, std::vector<int>> fixed_test_split(const LabeledDataset& target,
                                                               double fraction,
                                                               std::uint64_t test_seed);

// Per-run split of the pool: n_target_per_class columns per class into the
// training set, the rest into validation. Validation is never empty per
// class. Returns (train_target, validation), sorted ascending.
std::pair<std::vector<int>, std::vector<int>> run_split(const LabeledDataset& target,
                                                        const std::vector<int>& pool,
                                                        int n_target_per_class,
                                                        std::uint64_t run_seed);

// Seeded stratified sample of source columns, sorted ascending.
std::vector<int> sample_source(const LabeledDataset& source, int n_source_per_class,
                               std::uint64_t run_seed);

// Cartesian product of the two training sets: every same-class pair is kept
// (source-major order); different-class pairs are subsampled without
// replacement to min(floor(n_same * diff / same), available), listed in
// draw order.
PairSet cartesian_pairs(const LabeledDataset& train_source,
                        const LabeledDataset& train_target, int ratio_same, int ratio_diff,
                        std::uint64_t pair_seed);

// Fixed test split once, then one run record per seed (the same seed feeds
// run_split, sample_source and cartesian_pairs, each through its own
// generator). The fingerprint ties the manifest to the exact CSV bytes.
SplitManifest build_manifest(const LabeledDataset& source, const LabeledDataset& target,
                             const ProtocolParams& params,
                             const std::vector<std::uint64_t>& run_seeds);

// The leakage-prone legacy protocol, kept only for comparison: per run seed,
// n_target_per_class columns per class train, ALL remaining target columns
// double as validation and test. Deprecated; the run command labels its
// output accordingly.
SplitManifest build_traditional_manifest(const LabeledDataset& source,
                                         const LabeledDataset& target,
                                         const ProtocolParams& params,
                                         const std::vector<std::uint64_t>& run_seeds);

// First structural violation (overlaps, unsorted lists, bad counts), if any.
std::optional<Violation> validate(const SplitManifest& m, const LabeledDataset& source,
                                  const LabeledDataset& target);

// SHA-256 of the manifest's canonical JSON (sorted keys, no whitespace,
// hash field excluded), lowercase hex. Implemented in serialize.cpp.
std::string manifest_hash(const SplitManifest& m);

std::string sha256_hex(std::string_view bytes);

std::string dataset_fingerprint(const LabeledDataset& source, const LabeledDataset& target);

}  // namespace dage
