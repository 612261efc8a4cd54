#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "dage/dataset.hpp"
#include "dage/error.hpp"
#include "dage/rng.hpp"

using namespace dage;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path, std::ios::binary);
  out << content;
  return path;
}

LabeledDataset random_dataset(Rng& rng, int dim, int n, int classes) {
  LabeledDataset ds;
  ds.features = Eigen::MatrixXd(dim, n);
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < dim; ++i) ds.features(i, j) = rng.next_gaussian();
    ds.labels.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(classes))));
    ds.domains.push_back(rng.next_below(2) == 0 ? DomainTag::Source : DomainTag::Target);
  }
  ds.class_count = classes;
  return ds;
}

}  // namespace

TEST_CASE("well-formed csv parses with the declared shape") {
  const LabeledDataset ds = parse_feature_csv(
      "domain,label,f0,f1\n"
      "source,0,1.5,-2\n"
      "source,1,0,3.25\n"
      "target,0,-0.5,0.125\n");
  CHECK(ds.size() == 3);
  CHECK(ds.dim() == 2);
  CHECK(ds.class_count == 2);
  CHECK(ds.features(0, 0) == 1.5);
  CHECK(ds.features(1, 2) == 0.125);
  CHECK(ds.labels == std::vector<int>{0, 1, 0});
  CHECK(ds.domains[0] == DomainTag::Source);
  CHECK(ds.domains[2] == DomainTag::Target);
}

TEST_CASE("header must match domain,label,f0.. exactly") {
  CHECK_THROWS_WITH_AS(parse_feature_csv("domain,label,x0\nsource,0,1\n"),
                       doctest::Contains("MalformedHeader"), Error);
  CHECK_THROWS_AS(parse_feature_csv("label,domain,f0\nsource,0,1\n"), Error);
  CHECK_THROWS_AS(parse_feature_csv(""), Error);
}

TEST_CASE("ragged rows are reported with their line number") {
  try {
    parse_feature_csv("domain,label,f0,f1\nsource,0,1,2\ntarget,1,3\n");
    FAIL("expected RaggedRow");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::RaggedRow);
    CHECK(std::string(e.what()).find("3") != std::string::npos);  // 1-based file line
  }
}

TEST_CASE("non-finite features and unknown domains are rejected") {
  CHECK_THROWS_AS(parse_feature_csv("domain,label,f0\nsource,0,nan\n"), Error);
  CHECK_THROWS_AS(parse_feature_csv("domain,label,f0\nsource,0,inf\n"), Error);
  try {
    parse_feature_csv("domain,label,f0\nboth,0,1\n");
    FAIL("expected UnknownDomainTag");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownDomainTag);
  }
  CHECK_THROWS_AS(parse_feature_csv("domain,label,f0\nsource,-1,1\n"), Error);
}

TEST_CASE("missing file reports its path") {
  try {
    load_feature_csv("/nonexistent/nowhere.csv");
    FAIL("expected MissingFile");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingFile);
    CHECK(std::string(e.what()).find("nowhere.csv") != std::string::npos);
  }
}

TEST_CASE("crlf and missing trailing newline both parse") {
  const LabeledDataset a = parse_feature_csv("domain,label,f0\r\nsource,0,1\r\n");
  const LabeledDataset b = parse_feature_csv("domain,label,f0\nsource,0,1");
  CHECK(a.size() == 1);
  CHECK(b.size() == 1);
  CHECK(a.features(0, 0) == b.features(0, 0));
}

TEST_CASE("write then load round-trips bit-identically") {
  Rng rng(99);
  const LabeledDataset ds = random_dataset(rng, 5, 40, 3);
  const auto path = write_temp("dage_roundtrip.csv", to_feature_csv(ds));
  const LabeledDataset back = load_feature_csv(path.string());
  REQUIRE(back.size() == ds.size());
  REQUIRE(back.dim() == ds.dim());
  CHECK(back.features == ds.features);  // exact: shortest round-trip decimals
  CHECK(back.labels == ds.labels);
  CHECK(back.domains == ds.domains);
  std::filesystem::remove(path);
}

TEST_CASE("validate reports the first broken invariant") {
  Rng rng(1);
  LabeledDataset ds = random_dataset(rng, 3, 10, 2);
  CHECK(!validate(ds).has_value());

  LabeledDataset bad_label = ds;
  bad_label.labels[4] = 7;
  auto v = validate(bad_label);
  REQUIRE(v.has_value());
  CHECK(v->message.find("label") != std::string::npos);

  LabeledDataset bad_value = ds;
  bad_value.features(1, 2) = std::numeric_limits<double>::infinity();
  v = validate(bad_value);
  REQUIRE(v.has_value());
  CHECK(v->message.find("finite") != std::string::npos);

  LabeledDataset bad_len = ds;
  bad_len.labels.pop_back();
  CHECK(validate(bad_len).has_value());
}

TEST_CASE("class index partitions columns by domain and label") {
  LabeledDataset ds;
  ds.features = Eigen::MatrixXd::Zero(2, 3);
  ds.labels = {0, 0, 1};
  ds.domains = {DomainTag::Source, DomainTag::Source, DomainTag::Target};
  ds.class_count = 2;
  const ClassIndex idx = build_class_index(ds);
  CHECK(idx.source[0] == std::vector<int>{0, 1});
  CHECK(idx.source[1].empty());
  CHECK(idx.target[0].empty());
  CHECK(idx.target[1] == std::vector<int>{2});
}

TEST_CASE("class index is a partition on random datasets") {
  Rng rng(7);
  for (int trial = 0; trial < 20; ++trial) {
    const LabeledDataset ds = random_dataset(rng, 4, 30, 4);
    const ClassIndex idx = build_class_index(ds);
    std::vector<int> seen(static_cast<std::size_t>(ds.size()), 0);
    for (const auto& lists : {idx.source, idx.target}) {
      for (const auto& list : lists) {
        for (const int col : list) seen[static_cast<std::size_t>(col)]++;
      }
    }
    CHECK(std::all_of(seen.begin(), seen.end(), [](int c) { return c == 1; }));
  }
}

TEST_CASE("select_columns keeps order and class_count") {
  Rng rng(3);
  const LabeledDataset ds = random_dataset(rng, 3, 12, 3);
  const LabeledDataset sub = select_columns(ds, {5, 1, 9});
  REQUIRE(sub.size() == 3);
  CHECK(sub.class_count == 3);
  CHECK(sub.features.col(0) == ds.features.col(5));
  CHECK(sub.features.col(1) == ds.features.col(1));
  CHECK(sub.labels[2] == ds.labels[9]);
  CHECK(sub.domains[1] == ds.domains[1]);
}

TEST_CASE("concat stacks columns and reconciles class counts") {
  Rng rng(4);
  LabeledDataset a = random_dataset(rng, 3, 5, 2);
  LabeledDataset b = random_dataset(rng, 3, 7, 4);
  const LabeledDataset c = concat(a, b);
  REQUIRE(c.size() == 12);
  CHECK(c.class_count == 4);
  CHECK(c.features.col(4) == a.features.col(4));
  CHECK(c.features.col(5) == b.features.col(0));
}
