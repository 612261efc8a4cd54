#include "dage/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace dage {
namespace {

// Per-class target column lists, erroring when a class has fewer entries
// than the caller needs.
std::vector<std::vector<int>> class_lists(const LabeledDataset& ds, DomainTag tag) {
  std::vector<std::vector<int>> lists(static_cast<std::size_t>(ds.class_count));
  for (Eigen::Index i = 0; i < ds.size(); ++i) {
    if (ds.domains[static_cast<std::size_t>(i)] != tag) continue;
    lists[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(
        static_cast<int>(i));
  }
  return lists;
}

std::vector<std::vector<int>> pool_class_lists(const LabeledDataset& ds,
                                               const std::vector<int>& pool) {
  std::vector<std::vector<int>> lists(static_cast<std::size_t>(ds.class_count));
  for (const int i : pool) {
    lists[static_cast<std::size_t>(ds.labels[static_cast<std::size_t>(i)])].push_back(i);
  }
  return lists;
}

bool sorted_ascending(const std::vector<int>& v) {
  return std::is_sorted(v.begin(), v.end()) &&
         std::adjacent_find(v.begin(), v.end()) == v.end();
}

}  // namespace

std::pair<std::vector<int>, std::vector<int>> fixed_test_split(const LabeledDataset& target,
                                                               double fraction,
                                                               std::uint64_t test_seed) {
  if (!(fraction > 0.0 && fraction < 1.0)) {
    throw Error(ErrorCode::InvalidConfig,
                "test fraction must lie in (0, 1), got " + std::to_string(fraction));
  }
  const auto lists = class_lists(target, DomainTag::Target);
  Rng rng(test_seed);
  std::vector<int> test;
  std::vector<int> pool;
  for (std::size_t c = 0; c < lists.size(); ++c) {
    const auto& cols = lists[c];
    if (cols.size() < 2) {
      throw Error(ErrorCode::ClassTooSmall,
                  "class " + std::to_string(c) + " has " + std::to_string(cols.size()) +
                      " target samples, need at least 2");
    }
    const int n_c = static_cast<int>(cols.size());
    const int take =
        std::max(1, static_cast<int>(std::floor(fraction * n_c + 0.5)));
    const std::vector<int> picks = rng.sample_without_replacement(n_c, take);
    std::vector<bool> picked(cols.size(), false);
    for (const int p : picks) picked[static_cast<std::size_t>(p)] = true;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      (picked[i] ? test : pool).push_back(cols[i]);
    }
  }
  std::sort(test.begin(), test.end());
  std::sort(pool.begin(), pool.end());
  return {std::move(test), std::move(pool)};
}

std::pair<std::vector<int>, std::vector<int>> run_split(const LabeledDataset& target,
                                                        const std::vector<int>& pool,
                                                        int n_target_per_class,
                                                        std::uint64_t run_seed) {
  if (n_target_per_class < 0) {
    throw Error(ErrorCode::InvalidConfig, "n_target_per_class must be non-negative");
  }
  const auto lists = pool_class_lists(target, pool);
  Rng rng(run_seed);
  std::vector<int> train;
  std::vector<int> validation;
  for (std::size_t c = 0; c < lists.size(); ++c) {
    const auto& cols = lists[c];
    // strictly more than n so validation keeps at least one sample per class
    if (static_cast<int>(cols.size()) <= n_target_per_class) {
      throw Error(ErrorCode::InsufficientPool,
                  "class " + std::to_string(c) + " pool has " + std::to_string(cols.size()) +
                      " samples, need more than " + std::to_string(n_target_per_class));
    }
    const std::vector<int> picks =
        rng.sample_without_replacement(static_cast<int>(cols.size()), n_target_per_class);
    std::vector<bool> picked(cols.size(), false);
    for (const int p : picks) picked[static_cast<std::size_t>(p)] = true;
    for (std::size_t i = 0; i < cols.size(); ++i) {
      (picked[i] ? train : validation).push_back(cols[i]);
    }
  }
  std::sort(train.begin(), train.end());
  std::sort(validation.begin(), validation.end());
  return {std::move(train), std::move(validation)};
}

std::vector<int> sample_source(const LabeledDataset& source, int n_source_per_class,
                               std::uint64_t run_seed) {
  if (n_source_per_class < 0) {
    throw Error(ErrorCode::InvalidConfig, "n_source_per_class must be non-negative");
  }
  const auto lists = class_lists(source, DomainTag::Source);
  Rng rng(run_seed);
  std::vector<int> train;
  for (std::size_t c = 0; c < lists.size(); ++c) {
    const auto& cols = lists[c];
    if (static_cast<int>(cols.size()) < n_source_per_class) {
      throw Error(ErrorCode::InsufficientSource,
                  "class " + std::to_string(c) + " has " + std::to_string(cols.size()) +
                      " source samples, need " + std::to_string(n_source_per_class));
    }
    for (const int p :
         rng.sample_without_replacement(static_cast<int>(cols.size()), n_source_per_class)) {
      train.push_back(cols[static_cast<std::size_t>(p)]);
    }
  }
  std::sort(train.begin(), train.end());
  return train;
}

PairSet cartesian_pairs(const LabeledDataset& train_source,
                        const LabeledDataset& train_target, int ratio_same, int ratio_diff,
                        std::uint64_t pair_seed) {
  if (ratio_same < 1 || ratio_diff < 1) {
    throw Error(ErrorCode::InvalidConfig, "pair ratio components must be >= 1");
  }
  PairSet ps;
  ps.ratio_same = ratio_same;
  ps.ratio_diff = ratio_diff;

  std::vector<PairSet::Pair> diff;
  for (int s = 0; s < static_cast<int>(train_source.size()); ++s) {
    for (int t = 0; t < static_cast<int>(train_target.size()); ++t) {
      const bool same = train_source.labels[static_cast<std::size_t>(s)] ==
                        train_target.labels[static_cast<std::size_t>(t)];
      if (same) {
        ps.pairs.push_back({s, t, true});
      } else {
        diff.push_back({s, t, false});
      }
    }
  }
  ps.n_same = static_cast<std::int64_t>(ps.pairs.size());
  if (ps.n_same == 0) {
    throw Error(ErrorCode::NoSameClassPairs,
                "no same-class source/target pair can be formed");
  }
  ps.n_diff_requested = ps.n_same * ratio_diff / ratio_same;
  ps.n_diff = std::min(ps.n_diff_requested, static_cast<std::int64_t>(diff.size()));

  Rng rng(pair_seed);
  for (const int idx : rng.sample_without_replacement(static_cast<int>(diff.size()),
                                                      static_cast<int>(ps.n_diff))) {
    ps.pairs.push_back(diff[static_cast<std::size_t>(idx)]);
  }
  return ps;
}

SplitManifest build_manifest(const LabeledDataset& source, const LabeledDataset& target,
                             const ProtocolParams& params,
                             const std::vector<std::uint64_t>& run_seeds) {
  SplitManifest m;
  m.protocol = "rectified";
  m.dataset_fingerprint = dataset_fingerprint(source, target);
  m.params = params;
  auto [test, pool] = fixed_test_split(target, params.test_fraction, params.test_seed);
  m.test = std::move(test);
  for (const std::uint64_t seed : run_seeds) {
    RunRecord run;
    run.seed = seed;
    auto [train_target, validation] =
        run_split(target, pool, params.n_target_per_class, seed);
    run.train_target = std::move(train_target);
    run.validation = std::move(validation);
    run.train_source = sample_source(source, params.n_source_per_class, seed);
    run.pairs = cartesian_pairs(select_columns(source, run.train_source),
                                select_columns(target, run.train_target), params.ratio_same,
                                params.ratio_diff, seed);
    m.runs.push_back(std::move(run));
  }
  return m;
}

SplitManifest build_traditional_manifest(const LabeledDataset& source,
                                         const LabeledDataset& target,
                                         const ProtocolParams& params,
                                         const std::vector<std::uint64_t>& run_seeds) {
  SplitManifest m;
  m.protocol = "traditional";
  m.dataset_fingerprint = dataset_fingerprint(source, target);
  m.params = params;
  std::vector<int> all_target;
  for (Eigen::Index i = 0; i < target.size(); ++i) {
    if (target.domains[static_cast<std::size_t>(i)] == DomainTag::Target) {
      all_target.push_back(static_cast<int>(i));
    }
  }
  for (const std::uint64_t seed : run_seeds) {
    RunRecord run;
    run.seed = seed;
    auto [train_target, rest] = run_split(target, all_target, params.n_target_per_class, seed);
    run.train_target = std::move(train_target);
    run.validation = std::move(rest);  // doubles as the test set: the leak
    run.train_source = sample_source(source, params.n_source_per_class, seed);
    run.pairs = cartesian_pairs(select_columns(source, run.train_source),
                                select_columns(target, run.train_target), params.ratio_same,
                                params.ratio_diff, seed);
    m.runs.push_back(std::move(run));
  }
  return m;
}

std::optional<Violation> validate(const SplitManifest& m, const LabeledDataset& source,
                                  const LabeledDataset& target) {
  if (!sorted_ascending(m.test)) return Violation{"test indices not sorted ascending"};
  const std::set<int> test_set(m.test.begin(), m.test.end());
  for (const auto& run : m.runs) {
    for (const auto* list : {&run.train_target, &run.validation, &run.train_source}) {
      if (!sorted_ascending(*list)) {
        return Violation{"run " + std::to_string(run.seed) + ": index list not sorted"};
      }
    }
    for (const int i : run.train_target) {
      if (test_set.count(i)) {
        return Violation{"run " + std::to_string(run.seed) + ": train index " +
                         std::to_string(i) + " overlaps the test set"};
      }
    }
    for (const int i : run.validation) {
      if (test_set.count(i)) {
        return Violation{"run " + std::to_string(run.seed) + ": validation index " +
                         std::to_string(i) + " overlaps the test set"};
      }
    }
    std::vector<int> overlap;
    std::set_intersection(run.train_target.begin(), run.train_target.end(),
                          run.validation.begin(), run.validation.end(),
                          std::back_inserter(overlap));
    if (!overlap.empty()) {
      return Violation{"run " + std::to_string(run.seed) +
                       ": train/validation sets overlap"};
    }
    if (run.pairs.n_same + run.pairs.n_diff !=
        static_cast<std::int64_t>(run.pairs.pairs.size())) {
      return Violation{"run " + std::to_string(run.seed) + ": pair counts inconsistent"};
    }
    for (const auto& p : run.pairs.pairs) {
      if (p.source < 0 || p.source >= static_cast<int>(run.train_source.size()) ||
          p.target < 0 || p.target >= static_cast<int>(run.train_target.size())) {
        return Violation{"run " + std::to_string(run.seed) + ": pair index out of range"};
      }
      const int src_col = run.train_source[static_cast<std::size_t>(p.source)];
      const int tgt_col = run.train_target[static_cast<std::size_t>(p.target)];
      const bool same = source.labels[static_cast<std::size_t>(src_col)] ==
                        target.labels[static_cast<std::size_t>(tgt_col)];
      if (same != p.same_class) {
        return Violation{"run " + std::to_string(run.seed) + ": same-class flag wrong"};
      }
    }
  }
  return std::nullopt;
}

std::string dataset_fingerprint(const LabeledDataset& source, const LabeledDataset& target) {
  // Hash of hashes, so each CSV's byte content is pinned without delimiter
  // ambiguity.
  return sha256_hex(sha256_hex(to_feature_csv(source)) + sha256_hex(to_feature_csv(target)));
}

}  // namespace dage
