#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dage/error.hpp"
#include "dage/losses.hpp"
#include "dage/rng.hpp"

using namespace dage;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) m(i, j) = rng.next_gaussian();
  }
  return m;
}

WeightMatrix random_weights(Rng& rng, int n) {
  WeightMatrix w;
  w.entries = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) w.entries(i, j) = rng.next_double();
    }
  }
  return w;
}

LaplacianMatrix unit_edge_laplacian() {
  WeightMatrix w;
  w.entries = Eigen::MatrixXd::Zero(2, 2);
  w.entries(0, 1) = w.entries(1, 0) = 1.0;
  return laplacian(w);
}

Batch mixed_batch(Rng& rng, int d, int classes, int sources_per_class, int targets) {
  Batch b;
  for (int c = 0; c < classes; ++c) {
    for (int s = 0; s < sources_per_class; ++s) {
      b.labels.push_back(c);
      b.domains.push_back(DomainTag::Source);
    }
  }
  for (int t = 0; t < targets; ++t) {
    b.labels.push_back(static_cast<int>(rng.next_below(static_cast<std::uint64_t>(classes))));
    b.domains.push_back(DomainTag::Target);
  }
  const int n = classes * sources_per_class + targets;
  b.embedded = random_matrix(rng, d, n);
  b.original_features = random_matrix(rng, d + 2, n);
  return b;
}

double graph_trace(const Eigen::MatrixXd& phi, const LaplacianMatrix& l) {
  return (phi * l.entries).cwiseProduct(phi).sum();
}

}  // namespace

TEST_CASE("identical graphs on a unit edge give ratio one") {
  Eigen::MatrixXd phi(1, 2);
  phi << 0.0, 1.0;
  const LaplacianMatrix l = unit_edge_laplacian();
  const LossValue v = dage_loss(phi, l, l);
  CHECK(v.value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(!v.degenerate_denominator);
}

TEST_CASE("an embedding constant on the intrinsic edges has zero ratio loss") {
  Eigen::MatrixXd phi(1, 3);
  phi << 2.5, 2.5, 7.0;
  WeightMatrix intrinsic;
  intrinsic.entries = Eigen::MatrixXd::Zero(3, 3);
  intrinsic.entries(0, 1) = intrinsic.entries(1, 0) = 1.0;
  Rng rng(1);
  const LossValue v =
      dage_loss(phi, laplacian(intrinsic), laplacian(random_weights(rng, 3)));
  CHECK(v.value == 0.0);
  CHECK(!v.degenerate_denominator);

  // a fully constant embedding zeroes both energies; that is flagged, not hidden
  const Eigen::MatrixXd flat = Eigen::MatrixXd::Constant(3, 4, 2.5);
  const LaplacianMatrix l = laplacian(random_weights(rng, 4));
  const LaplacianMatrix b = laplacian(random_weights(rng, 4));
  CHECK(dage_loss(flat, l, b).degenerate_denominator);
}

TEST_CASE("empty penalty graph engages the denominator floor and flags it") {
  Eigen::MatrixXd phi(1, 2);
  phi << 0.0, 1.0;
  WeightMatrix empty;
  empty.entries = Eigen::MatrixXd::Zero(2, 2);
  const LossValue v = dage_loss(phi, unit_edge_laplacian(), laplacian(empty));
  CHECK(v.degenerate_denominator);
  CHECK(std::isfinite(v.value));
  CHECK_THROWS_AS(dage_grad(phi, unit_edge_laplacian(), laplacian(empty)), Error);
}

TEST_CASE("ratio loss ignores uniform scaling of the embedding") {
  Rng rng(2);
  const Eigen::MatrixXd phi = random_matrix(rng, 3, 6);
  const LaplacianMatrix l = laplacian(random_weights(rng, 6));
  const LaplacianMatrix b = laplacian(random_weights(rng, 6));
  const double base = dage_loss(phi, l, b).value;
  for (const double c : {0.1, 10.0}) {
    CHECK(std::abs(dage_loss(c * phi, l, b).value - base) <= 1e-10 * std::max(1.0, base));
  }
}

TEST_CASE("ratio gradient is orthogonal to the scaling direction") {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd phi = random_matrix(rng, 2, 5);
    const LaplacianMatrix l = laplacian(random_weights(rng, 5));
    const LaplacianMatrix b = laplacian(random_weights(rng, 5));
    const Eigen::MatrixXd g = dage_grad(phi, l, b);
    const double inner = (g.array() * phi.array()).sum();
    CHECK(std::abs(inner) <= 1e-8 * g.norm() * phi.norm());
  }
}

TEST_CASE("zero-numerator gradient reduces to the first quotient term") {
  // Constant embedding kills the numerator trace; penalty graph separates.
  Eigen::MatrixXd phi(1, 3);
  phi << 1.0, 1.0, 3.0;
  WeightMatrix intrinsic;
  intrinsic.entries = Eigen::MatrixXd::Zero(3, 3);
  intrinsic.entries(0, 1) = intrinsic.entries(1, 0) = 1.0;  // columns 0,1 coincide
  Rng rng(4);
  const LaplacianMatrix l = laplacian(intrinsic);
  const LaplacianMatrix b = laplacian(random_weights(rng, 3));
  const double den = graph_trace(phi, b);
  const Eigen::MatrixXd expected = phi * (l.entries + l.entries.transpose()) / den;
  CHECK((dage_grad(phi, l, b) - expected).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("identical graphs give a zero gradient") {
  Rng rng(5);
  const Eigen::MatrixXd phi = random_matrix(rng, 2, 5);
  const LaplacianMatrix l = laplacian(random_weights(rng, 5));
  CHECK(dage_grad(phi, l, l).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("analytic gradient matches central differences") {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const Eigen::MatrixXd phi = random_matrix(rng, 3, 6);
    const LaplacianMatrix l = laplacian(random_weights(rng, 6));
    const LaplacianMatrix b = laplacian(random_weights(rng, 6));
    const Eigen::MatrixXd analytic = dage_grad(phi, l, b);
    const Eigen::MatrixXd fd = finite_difference_grad(
        [&](const Eigen::MatrixXd& p) { return dage_loss(p, l, b).value; }, phi);
    const double rel = (analytic - fd).cwiseAbs().maxCoeff() /
                       std::max(1e-12, fd.cwiseAbs().maxCoeff());
    CHECK(rel <= 1e-6);
  }
}

TEST_CASE("finite differences recover simple closed-form gradients") {
  Rng rng(7);
  const Eigen::MatrixXd phi = random_matrix(rng, 2, 4);
  const Eigen::MatrixXd g = finite_difference_grad(
      [](const Eigen::MatrixXd& p) { return p.squaredNorm(); }, phi);
  CHECK((g - 2.0 * phi).cwiseAbs().maxCoeff() <= 1e-6);

  const Eigen::MatrixXd zero = finite_difference_grad(
      [](const Eigen::MatrixXd&) { return 3.25; }, phi);
  CHECK(zero.cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS(finite_difference_grad(
                      [](const Eigen::MatrixXd& p) {
                        return std::sqrt(-1.0) * p(0, 0);
                      },
                      phi),
                  Error);
}

TEST_CASE("contrastive loss sums the worked similarity and hinge terms") {
  // One same-class cross pair at distance 2, one different-class cross pair
  // at distance 0.5, margin 1.
  Batch b;
  b.embedded = Eigen::MatrixXd(1, 4);
  b.embedded << 0.0, 2.0, 10.0, 10.5;
  b.labels = {0, 0, 1, 2};
  b.domains = {DomainTag::Source, DomainTag::Target, DomainTag::Source, DomainTag::Target};
  const LossValue v = ccsa_loss(b, 1.0);
  CHECK(v.value == doctest::Approx(2.125).epsilon(1e-12));
  // similarity pairs first, then every dissimilar cross pair, source-major
  REQUIRE(v.contributions.size() == 4);
  CHECK(v.contributions[0].source == 0);
  CHECK(v.contributions[0].target == 1);
  CHECK(v.contributions[0].value == doctest::Approx(2.0));
  CHECK(v.contributions[1].value == 0.0);  // (0,3) beyond the margin
  CHECK(v.contributions[2].value == 0.0);  // (2,1) beyond the margin
  CHECK(v.contributions[3].source == 2);
  CHECK(v.contributions[3].target == 3);
  CHECK(v.contributions[3].value == doctest::Approx(0.125));

  CHECK_THROWS_AS(ccsa_loss(b, 0.0), Error);
}

TEST_CASE("distances beyond the margin contribute nothing") {
  Batch b;
  b.embedded = Eigen::MatrixXd(1, 2);
  b.embedded << 0.0, 5.0;
  b.labels = {0, 1};
  b.domains = {DomainTag::Source, DomainTag::Target};
  CHECK(ccsa_loss(b, 1.0).value == 0.0);
}

TEST_CASE("contrastive loss equals twice the sum of its graph energies") {
  Rng rng(8);
  const double margin = 1.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Batch b = mixed_batch(rng, 3, 3, 2, 5);
    const GraphPair gp = ccsa_graphs(b.embedded, b.labels, b.domains, margin);
    const double graph_form = 2.0 * (graph_trace(b.embedded, laplacian(gp.intrinsic)) +
                                     graph_trace(b.embedded, laplacian(gp.penalty)));
    const double direct = ccsa_loss(b, margin).value;
    CHECK(std::abs(direct - graph_form) <= 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("extreme-pair loss matches its worked example and graph form") {
  Batch b;
  b.embedded = Eigen::MatrixXd(1, 4);
  b.embedded << 0.0, 4.0, 1.5, 1.0;
  b.labels = {0, 0, 1, 0};
  b.domains = {DomainTag::Source, DomainTag::Source, DomainTag::Source, DomainTag::Target};
  const LossValue v = dsne_loss(b);
  CHECK(v.value == doctest::Approx(8.75).epsilon(1e-12));  // 3^2 - 0.5^2
  REQUIRE(v.contributions.size() == 2);
  CHECK(v.contributions[0].source == 1);  // farthest same-class
  CHECK(v.contributions[0].value == doctest::Approx(9.0));
  CHECK(v.contributions[1].source == 2);  // nearest different-class
  CHECK(v.contributions[1].value == doctest::Approx(-0.25));

  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    const Batch batch = mixed_batch(rng, 2, 3, 2, 4);
    const GraphPair gp = dsne_graphs(batch.embedded, batch.labels, batch.domains);
    const double graph_form =
        2.0 * (graph_trace(batch.embedded, laplacian(gp.intrinsic)) -
               graph_trace(batch.embedded, laplacian(gp.penalty)));
    const double direct = dsne_loss(batch).value;
    CHECK(std::abs(direct - graph_form) <= 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("single target equidistant to both source kinds scores zero") {
  Batch b;
  b.embedded = Eigen::MatrixXd(1, 3);
  b.embedded << -1.0, 1.0, 0.0;
  b.labels = {0, 1, 0};
  b.domains = {DomainTag::Source, DomainTag::Source, DomainTag::Target};
  CHECK(dsne_loss(b).value == doctest::Approx(0.0));
}

TEST_CASE("extreme-pair loss reports which source kind is missing") {
  Batch b;
  b.embedded = Eigen::MatrixXd(1, 2);
  b.embedded << 0.0, 1.0;
  b.domains = {DomainTag::Source, DomainTag::Target};
  b.labels = {0, 0};
  try {
    dsne_loss(b);
    FAIL("expected MissingDifferentClassSource");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::MissingDifferentClassSource);
  }
}

TEST_CASE("neighbourhood loss reduces to the contrastive loss at nu zero") {
  Rng rng(10);
  const Batch b = mixed_batch(rng, 2, 2, 2, 4);
  CHECK(nem_loss(b, 1.0, 0.0, 2, 1.5).value ==
        doctest::Approx(ccsa_loss(b, 1.0).value).epsilon(1e-14));
}

TEST_CASE("coincident neighbour embeddings contribute nothing") {
  Batch b;
  b.embedded = Eigen::MatrixXd(1, 4);
  b.embedded << 0.0, 5.0, 1.0, 1.0;  // the two targets coincide in embedding
  b.labels = {0, 1, 0, 1};
  b.domains = {DomainTag::Source, DomainTag::Source, DomainTag::Target, DomainTag::Target};
  b.original_features = Eigen::MatrixXd(1, 4);
  b.original_features << 0.0, 5.0, 1.0, 2.0;
  const double with_neighbours = nem_loss(b, 10.0, 3.0, 1, 1.0).value;
  const double contrastive_only = ccsa_loss(b, 10.0).value;
  CHECK(with_neighbours == doctest::Approx(contrastive_only).epsilon(1e-12));
}

TEST_CASE("neighbour term equals the neighbourhood graph energy") {
  Rng rng(11);
  const double margin = 1.0;
  const double nu = 0.6;
  const double sigma = 1.3;
  const int k = 2;
  for (int trial = 0; trial < 30; ++trial) {
    const Batch b = mixed_batch(rng, 3, 2, 2, 5);
    const double term = nem_loss(b, margin, nu, k, sigma).value - ccsa_loss(b, margin).value;
    // reconstruct: knn over the batch's target columns on original features
    std::vector<int> targets;
    for (std::size_t i = 0; i < b.domains.size(); ++i) {
      if (b.domains[i] == DomainTag::Target) targets.push_back(static_cast<int>(i));
    }
    Eigen::MatrixXd tgt_orig(b.original_features.rows(),
                             static_cast<Eigen::Index>(targets.size()));
    for (std::size_t c = 0; c < targets.size(); ++c) {
      tgt_orig.col(static_cast<Eigen::Index>(c)) = b.original_features.col(targets[c]);
    }
    double direct = 0.0;
    const auto lists = knn_in_input_space(tgt_orig, k);
    for (std::size_t c = 0; c < targets.size(); ++c) {
      for (const int nb : lists[c]) {
        const int i = targets[c];
        const int j = targets[static_cast<std::size_t>(nb)];
        const double dist = (b.embedded.col(i) - b.embedded.col(j)).norm();
        const double kappa = std::exp(
            -(b.original_features.col(i) - b.original_features.col(j)).squaredNorm() /
            (2 * sigma * sigma));
        direct += nu * dist * kappa;
      }
    }
    CHECK(std::abs(term - direct) <= 1e-10 * std::max(1.0, std::abs(direct)));
  }
}

TEST_CASE("neighbourhood loss needs more targets than neighbours") {
  Rng rng(12);
  const Batch b = mixed_batch(rng, 2, 2, 2, 2);
  CHECK_THROWS_AS(nem_loss(b, 1.0, 0.5, 2, 1.0), Error);
}

TEST_CASE("permuting batch columns permutes contributions and keeps totals") {
  Rng rng(13);
  const Batch b = mixed_batch(rng, 2, 2, 3, 4);
  std::vector<int> perm(static_cast<std::size_t>(b.embedded.cols()));
  std::iota(perm.begin(), perm.end(), 0);
  Rng shuffler(99);
  shuffler.shuffle(perm);

  Batch permuted;
  permuted.embedded = Eigen::MatrixXd(b.embedded.rows(), b.embedded.cols());
  permuted.original_features =
      Eigen::MatrixXd(b.original_features.rows(), b.original_features.cols());
  permuted.labels.resize(b.labels.size());
  permuted.domains.resize(b.domains.size());
  for (std::size_t to = 0; to < perm.size(); ++to) {
    const int from = perm[to];
    permuted.embedded.col(static_cast<Eigen::Index>(to)) = b.embedded.col(from);
    permuted.original_features.col(static_cast<Eigen::Index>(to)) =
        b.original_features.col(from);
    permuted.labels[to] = b.labels[static_cast<std::size_t>(from)];
    permuted.domains[to] = b.domains[static_cast<std::size_t>(from)];
  }

  const double margin = 1.0;
  CHECK(std::abs(ccsa_loss(b, margin).value - ccsa_loss(permuted, margin).value) <= 1e-12);
  CHECK(std::abs(dsne_loss(b).value - dsne_loss(permuted).value) <= 1e-12);
  CHECK(std::abs(nem_loss(b, margin, 0.5, 2, 1.0).value -
                 nem_loss(permuted, margin, 0.5, 2, 1.0).value) <= 1e-12);

  // same multiset of contribution values, relabeled indices
  auto values = [](const LossValue& v) {
    std::vector<double> vals;
    for (const auto& c : v.contributions) vals.push_back(c.value);
    std::sort(vals.begin(), vals.end());
    return vals;
  };
  const auto a_vals = values(ccsa_loss(b, margin));
  const auto p_vals = values(ccsa_loss(permuted, margin));
  REQUIRE(a_vals.size() == p_vals.size());
  for (std::size_t i = 0; i < a_vals.size(); ++i) {
    CHECK(a_vals[i] == doctest::Approx(p_vals[i]).epsilon(1e-12));
  }
}

TEST_CASE("batches must contain both domains and finite values") {
  Batch b;
  b.embedded = Eigen::MatrixXd(1, 2);
  b.embedded << 0.0, 1.0;
  b.labels = {0, 1};
  b.domains = {DomainTag::Source, DomainTag::Source};
  CHECK(validate(b).has_value());
  b.domains = {DomainTag::Source, DomainTag::Target};
  CHECK(!validate(b).has_value());
  b.embedded(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK(validate(b).has_value());
}
