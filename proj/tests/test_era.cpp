#include "erakit/era.hpp"
#include "erakit/error.hpp"
#include "jacobi_oracle.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace erakit;
using namespace erakit::testing;
using features::FeatureVector;
using features::Kind;

namespace {

std::vector<std::vector<double>> to_rows(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(m.rows()),
                                        std::vector<double>(static_cast<std::size_t>(m.cols())));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
  return rows;
}

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index n, Eigen::Index d) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd mix(d, d);
  for (auto& v : mix.reshaped()) v = normal(rng);
  Eigen::MatrixXd z(n, d);
  for (auto& v : z.reshaped()) v = normal(rng);
  return z * mix + Eigen::RowVectorXd::LinSpaced(d, -3.0, 5.0).replicate(n, 1);
}

FeatureVector row(std::string label, std::string source, std::string id, Kind kind, Eigen::VectorXd values) {
  return {kind, std::move(values), {std::move(label), std::move(source), std::move(id)}};
}

}  // namespace

TEST_CASE("collinear points keep one component") {
  Eigen::MatrixXd data(3, 2);
  data << 0, 0, 1, 1, 2, 2;
  const auto model = era::fit_pca(data, era::Retain::variance(0.95));
  REQUIRE(model.retained() == 1);
  CHECK(model.components(0, 0) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(model.components(0, 1) == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(model.explained_variance_ratio[0] == doctest::Approx(1.0));
}

TEST_CASE("isotropic data keeps both components") {
  std::mt19937_64 rng(17);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd data(5000, 2);
  for (auto& v : data.reshaped()) v = normal(rng);
  const auto model = era::fit_pca(data, era::Retain::variance(0.95));
  CHECK(model.retained() == 2);
  const auto oracle = jacobi_eigenvalues(brute_force_covariance(to_rows(data)));
  CHECK(model.eigenvalues[0] == doctest::Approx(oracle[0]).epsilon(1e-10));
  CHECK(model.eigenvalues[1] == doctest::Approx(oracle[1]).epsilon(1e-10));
  CHECK(model.eigenvalues[0] / model.eigenvalues[1] < 1.1);
}

TEST_CASE("fit_pca matches a brute-force eigendecomposition on small matrices") {
  std::mt19937_64 rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(rng() % 49);
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng() % 6);
    const Eigen::MatrixXd data = random_matrix(rng, n, d);
    const auto model = era::fit_pca(data, era::Retain::components(static_cast<int>(d)));
    const auto oracle = jacobi_eigenvalues(brute_force_covariance(to_rows(data)));
    for (Eigen::Index i = 0; i < model.retained(); ++i) {
      CHECK(std::abs(model.eigenvalues[i] - std::max(0.0, oracle[static_cast<std::size_t>(i)])) < 1e-8);
    }
    const Eigen::MatrixXd gram = model.components * model.components.transpose();
    CHECK((gram - Eigen::MatrixXd::Identity(model.retained(), model.retained())).cwiseAbs().maxCoeff() < 1e-8);
    for (Eigen::Index i = 1; i < model.retained(); ++i) CHECK(model.eigenvalues[i] <= model.eigenvalues[i - 1]);
  }
}

TEST_CASE("full-rank PCA reconstructs its input") {
  std::mt19937_64 rng(5);
  const Eigen::MatrixXd data = random_matrix(rng, 30, 5);
  const auto model = era::fit_pca(data, era::Retain::components(5));
  const Eigen::MatrixXd projected = era::transform(model, data);
  const Eigen::MatrixXd rebuilt = (projected * model.components).rowwise() + model.mean.transpose();
  CHECK((rebuilt - data).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("transform column variances equal the eigenvalues") {
  std::mt19937_64 rng(6);
  const Eigen::MatrixXd data = random_matrix(rng, 40, 4);
  const auto model = era::fit_pca(data, era::Retain::components(4));
  const Eigen::MatrixXd projected = era::transform(model, data);
  for (Eigen::Index j = 0; j < 4; ++j) {
    const auto col = projected.col(j);
    const double var = (col.array() - col.mean()).square().sum() / 39.0;
    CHECK(std::abs(var - model.eigenvalues[j]) < 1e-8);
  }
  CHECK(era::transform(model, model.mean.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  const Eigen::MatrixXd repeated = data.row(3).replicate(5, 1);
  const Eigen::MatrixXd t = era::transform(model, repeated);
  for (Eigen::Index i = 1; i < 5; ++i) CHECK(t.row(i) == t.row(0));
  CHECK_THROWS_AS(era::transform(model, Eigen::MatrixXd::Zero(2, 3)), InvalidInput);
}

TEST_CASE("component signs are deterministic") {
  std::mt19937_64 rng(8);
  const Eigen::MatrixXd data = random_matrix(rng, 25, 3);
  const auto model = era::fit_pca(data, era::Retain::components(3));
  for (Eigen::Index r = 0; r < 3; ++r) {
    Eigen::Index at = 0;
    model.components.row(r).cwiseAbs().maxCoeff(&at);
    CHECK(model.components(r, at) > 0);
  }
}

TEST_CASE("fit_pca error paths") {
  CHECK_THROWS_AS(era::fit_pca(Eigen::MatrixXd::Zero(1, 3), era::Retain::components(1)), InsufficientData);
  Eigen::MatrixXd bad = Eigen::MatrixXd::Zero(3, 2);
  bad(1, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(era::fit_pca(bad, era::Retain::components(1)), InvalidInput);
}

TEST_CASE("zero-variance data reports zero ratios") {
  const auto model = era::fit_pca(Eigen::MatrixXd::Constant(5, 3, 2.0), era::Retain::components(2));
  CHECK(model.retained() == 2);
  CHECK(model.explained_variance_ratio.isZero(0.0));
  CHECK(model.eigenvalues.isZero(0.0));
}

TEST_CASE("standardized PCA scales columns to unit variance") {
  std::mt19937_64 rng(12);
  Eigen::MatrixXd data = random_matrix(rng, 50, 3);
  data.col(2) *= 1000.0;
  const auto model = era::fit_pca(data, era::Retain::components(3), true);
  CHECK(model.total_variance == doctest::Approx(3.0));
}

TEST_CASE("total variance") {
  CHECK(era::total_variance(Eigen::MatrixXd::Constant(4, 3, 1.5)) == 0.0);
  Eigen::MatrixXd two(2, 1);
  two << 0.0, 2.0;
  CHECK(era::total_variance(two) == doctest::Approx(2.0));
  CHECK_THROWS_AS(era::total_variance(Eigen::MatrixXd::Zero(1, 2)), InsufficientData);

  std::mt19937_64 rng(3);
  const Eigen::MatrixXd rows = random_matrix(rng, 20, 4);
  const Eigen::RowVectorXd mean = rows.colwise().mean();
  const Eigen::MatrixXd scaled = ((rows.rowwise() - mean) * 2.0).rowwise() + mean;
  CHECK(era::total_variance(scaled) == doctest::Approx(4.0 * era::total_variance(rows)).epsilon(1e-12));

  // Permutation and translation invariance.
  Eigen::MatrixXd permuted = rows.colwise().reverse();
  CHECK(era::total_variance(permuted) == doctest::Approx(era::total_variance(rows)).epsilon(1e-12));
  const Eigen::MatrixXd shifted = rows.rowwise() + Eigen::RowVectorXd::Constant(4, 100.0);
  CHECK(era::total_variance(shifted) == doctest::Approx(era::total_variance(rows)).epsilon(1e-9));
}

TEST_CASE("era projection pools every source of one label") {
  std::vector<FeatureVector> vectors;
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    Eigen::VectorXd a(4), b(4);
    for (auto& v : a) v = normal(rng);
    for (auto& v : b) v = normal(rng) + 10.0;
    vectors.push_back(row("dog", "alpha", std::to_string(i), Kind::kLoudness, a));
    vectors.push_back(row("dog", "beta", std::to_string(i), Kind::kLoudness, b));
    vectors.push_back(row("rain", "alpha", std::to_string(i), Kind::kLoudness, b));
    vectors.push_back(row("dog", "alpha", std::to_string(i), Kind::kTimbre, b));
  }
  const auto p = era::era_projection_2d(vectors, "dog", Kind::kLoudness);
  CHECK(p.points.size() == 20);
  CHECK(p.rows_per_source.at("alpha") == 10);
  CHECK(p.rows_per_source.at("beta") == 10);
  CHECK(p.explained[0] > 0.9);
  CHECK(p.points.front().source == "alpha");
  CHECK(p.points.back().source == "beta");

  // Shuffled input gives the same projection.
  std::shuffle(vectors.begin(), vectors.end(), rng);
  const auto q = era::era_projection_2d(vectors, "dog", Kind::kLoudness);
  for (std::size_t i = 0; i < p.points.size(); ++i) {
    CHECK(p.points[i].pc1 == q.points[i].pc1);
    CHECK(p.points[i].pc2 == q.points[i].pc2);
  }

  CHECK_THROWS_AS(era::era_projection_2d(vectors, "cat", Kind::kLoudness), InsufficientData);
}

TEST_CASE("identical rows project onto one point with zero ratios") {
  std::vector<FeatureVector> vectors;
  for (int i = 0; i < 4; ++i) vectors.push_back(row("x", i % 2 ? "a" : "b", std::to_string(i), Kind::kPitch, Eigen::VectorXd::Ones(12)));
  const auto p = era::era_projection_2d(vectors, "x", Kind::kPitch);
  CHECK(p.explained[0] == 0.0);
  CHECK(p.explained[1] == 0.0);
  for (const auto& pt : p.points) {
    CHECK(pt.pc1 == 0.0);
    CHECK(pt.pc2 == 0.0);
  }
}

TEST_CASE("variance summary normalizes against the reference source") {
  std::mt19937_64 rng(99);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<FeatureVector> vectors;
  for (const char* label : {"dog", "rain"}) {
    for (int i = 0; i < 30; ++i) {
      Eigen::VectorXd ref(5), wide(5);
      for (auto& v : ref) v = normal(rng);
      wide = 3.0 * ref;
      for (Kind kind : features::kAllKinds) {
        vectors.push_back(row(label, "reference", std::to_string(i), kind, ref));
        vectors.push_back(row(label, "copy", std::to_string(i), kind, ref));
        vectors.push_back(row(label, "wide", std::to_string(i), kind, wide));
      }
    }
  }
  const auto summary = era::variance_summary(vectors, "reference");
  for (Kind kind : features::kAllKinds) {
    REQUIRE(summary.find("reference", kind) != nullptr);
    CHECK(summary.find("reference", kind)->normalized_total_variance == 1.0);
    CHECK(summary.find("copy", kind)->normalized_total_variance == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(summary.find("wide", kind)->normalized_total_variance > 1.0);
    CHECK(summary.find("wide", kind)->rows == 60);
  }
  CHECK(summary.source_mean.at("reference") == 1.0);

  auto shuffled = vectors;
  std::shuffle(shuffled.begin(), shuffled.end(), rng);
  const auto again = era::variance_summary(shuffled, "reference");
  REQUIRE(again.cells.size() == summary.cells.size());
  for (std::size_t i = 0; i < summary.cells.size(); ++i) {
    CHECK(again.cells[i].normalized_total_variance == summary.cells[i].normalized_total_variance);
  }

  CHECK_THROWS_AS(era::variance_summary(vectors, "esc50"), ConfigError);
}

TEST_CASE("variance summary drops sources without enough rows of a kind") {
  std::vector<FeatureVector> vectors;
  for (int i = 0; i < 5; ++i) {
    Eigen::VectorXd v = Eigen::VectorXd::Constant(3, static_cast<double>(i));
    v[1] = i * i;
    vectors.push_back(row("l", "ref", std::to_string(i), Kind::kLoudness, v));
    vectors.push_back(row("l", "gen", std::to_string(i), Kind::kLoudness, 2.0 * v));
    vectors.push_back(row("l", "ref", std::to_string(i), Kind::kPitch, v));
  }
  vectors.push_back(row("l", "gen", "0", Kind::kPitch, Eigen::VectorXd::Zero(3)));
  const auto summary = era::variance_summary(vectors, "ref");
  CHECK(summary.find("gen", Kind::kPitch) == nullptr);
  REQUIRE(summary.find("gen", Kind::kLoudness) != nullptr);
  CHECK(summary.source_mean.at("gen") == summary.find("gen", Kind::kLoudness)->normalized_total_variance);
}

TEST_CASE("mean over kinds uses unrounded values") {
  const double values[] = {0.73, 1.69, 0.83};
  const double mean = era::mean_over_kinds(values);
  CHECK(mean == doctest::Approx((0.73 + 1.69 + 0.83) / 3.0));
  CHECK(std::round(mean * 100.0) / 100.0 == doctest::Approx(1.08));
}
