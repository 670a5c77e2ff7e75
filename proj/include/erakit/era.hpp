#pragma once

#include "erakit/error.hpp"
#include "erakit/features.hpp"

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace erakit::era {

/// How many principal components a fit keeps.
struct Retain {
  enum class By { kCount, kVarianceFraction };
  By by = By::kVarianceFraction;
  int count = 0;
  double fraction = 0.95;

  static Retain components(int k) { return {By::kCount, k, 0.0}; }
  static Retain variance(double v) { return {By::kVarianceFraction, 0, v}; }
};

template <typename Scalar>
struct PcaModel {
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  Vector mean;
  Vector scale;       // per-feature divisor; ones unless standardized
  Matrix components;  // r x d, orthonormal rows
  Vector eigenvalues;  // r, descending
  Vector explained_variance_ratio;
  Scalar total_variance = 0;  // trace of the training covariance

  Eigen::Index dim() const { return mean.size(); }
  Eigen::Index retained() const { return components.rows(); }
};

/// Covariance PCA (sample covariance, divisor n-1) on mean-centered rows.
///
/// Components are sign-normalized so that each row's largest-magnitude entry is
/// positive. When the training data has zero total variance all ratios are 0.
template <typename Scalar = double, typename Derived>
PcaModel<Scalar> fit_pca(const Eigen::MatrixBase<Derived>& data, Retain retain, bool standardize = false) {
  using Model = PcaModel<Scalar>;
  using Matrix = typename Model::Matrix;
  using Vector = typename Model::Vector;

  const Eigen::Index n = data.rows();
  const Eigen::Index d = data.cols();
  if (n < 2) throw InsufficientData("PCA needs at least 2 rows, got " + std::to_string(n));
  if (d < 1) throw InvalidInput("PCA needs at least one column");
  if (!data.allFinite()) throw InvalidInput("PCA input contains non-finite values");

  Model model;
  model.mean = data.colwise().mean().transpose().template cast<Scalar>();
  Matrix centered = data.template cast<Scalar>().rowwise() - model.mean.transpose();
  model.scale = Vector::Ones(d);
  if (standardize) {
    for (Eigen::Index j = 0; j < d; ++j) {
      const Scalar sd = std::sqrt(centered.col(j).squaredNorm() / static_cast<Scalar>(n - 1));
      if (sd > 0) model.scale[j] = sd;
    }
    centered = centered.array().rowwise() / model.scale.transpose().array();
  }

  const Matrix cov = (centered.adjoint() * centered) / static_cast<Scalar>(n - 1);
  Eigen::SelfAdjointEigenSolver<Matrix> solver(cov);
  if (solver.info() != Eigen::Success) throw InvalidInput("covariance eigendecomposition did not converge");

  // Solver output is ascending; flip to descending.
  const Vector values = solver.eigenvalues().reverse().cwiseMax(Scalar(0));
  const Matrix vectors = solver.eigenvectors().rowwise().reverse();
  model.total_variance = cov.trace();
  const Scalar total = model.total_variance;

  Eigen::Index keep = 0;
  if (retain.by == Retain::By::kCount) {
    if (retain.count < 1) throw ConfigError("retained component count must be positive");
    keep = std::min<Eigen::Index>(retain.count, d);
  } else {
    if (!(retain.fraction > 0 && retain.fraction <= 1)) throw ConfigError("retained variance fraction must be in (0, 1]");
    keep = d;
    if (total > 0) {
      Scalar cumulative = 0;
      for (Eigen::Index i = 0; i < d; ++i) {
        cumulative += values[i];
        if (cumulative / total >= static_cast<Scalar>(retain.fraction) - Scalar(1e-12)) {
          keep = i + 1;
          break;
        }
      }
    } else {
      keep = 1;
    }
  }

  model.eigenvalues = values.head(keep);
  model.components = vectors.leftCols(keep).transpose();
  for (Eigen::Index r = 0; r < keep; ++r) {
    Eigen::Index at = 0;
    model.components.row(r).cwiseAbs().maxCoeff(&at);
    if (model.components(r, at) < 0) model.components.row(r) *= Scalar(-1);
  }
  model.explained_variance_ratio = total > 0 ? Vector(model.eigenvalues / total) : Vector(Vector::Zero(keep));
  return model;
}

/// (data - mean) / scale * components^T, m x r.
template <typename Scalar, typename Derived>
typename PcaModel<Scalar>::Matrix transform(const PcaModel<Scalar>& model, const Eigen::MatrixBase<Derived>& data) {
  if (data.cols() != model.dim()) {
    throw InvalidInput("PCA transform expects " + std::to_string(model.dim()) + " columns, got " +
                       std::to_string(data.cols()));
  }
  const typename PcaModel<Scalar>::Matrix centered =
      (data.template cast<Scalar>().rowwise() - model.mean.transpose()).array().rowwise() /
      model.scale.transpose().array();
  return centered * model.components.transpose();
}

/// Trace of the rows' own sample covariance: sum of per-column variances.
template <typename Derived>
typename Derived::Scalar total_variance(const Eigen::MatrixBase<Derived>& rows) {
  using Scalar = typename Derived::Scalar;
  const Eigen::Index m = rows.rows();
  if (m < 2) throw InsufficientData("total variance needs at least 2 rows, got " + std::to_string(m));
  const auto centered = (rows.rowwise() - rows.colwise().mean()).eval();
  return centered.squaredNorm() / static_cast<Scalar>(m - 1);
}

// ---------------------------------------------------------------------------
// Corpus-level analyses over extracted feature vectors.

struct EraPoint {
  std::string source;
  std::string sample_id;
  double pc1 = 0.0;
  double pc2 = 0.0;
};

struct EraProjection {
  std::string label;
  features::Kind kind = features::Kind::kTimbre;
  std::vector<EraPoint> points;  // sorted by (source, sample_id)
  std::array<double, 2> explained{0.0, 0.0};
  std::map<std::string, std::size_t> rows_per_source;
};

/// Pooled two-component PCA of every source's vectors for one label and kind.
EraProjection era_projection_2d(std::span<const features::FeatureVector> vectors, std::string_view label,
                                features::Kind kind, bool standardize = false);

struct VarianceCell {
  std::string source;
  features::Kind kind = features::Kind::kTimbre;
  double normalized_total_variance = 0.0;
  std::size_t rows = 0;
};

struct VarianceSummary {
  std::string reference_source;
  std::vector<VarianceCell> cells;          // sorted by (source, kind name)
  std::map<std::string, double> source_mean;  // mean over that source's kinds
  std::map<std::string, Eigen::Index> retained_components;  // per kind name

  const VarianceCell* find(std::string_view source, features::Kind kind) const;
};

struct VarianceOptions {
  double retain_fraction = 0.95;
  bool standardize = false;
};

/// Per kind: pool every row across labels and sources, fit PCA at the retained
/// variance fraction, then divide each source's total variance in PCA space by
/// the reference source's. Sources with fewer than two rows of a kind get no cell.
VarianceSummary variance_summary(std::span<const features::FeatureVector> vectors, std::string_view reference_source,
                                 const VarianceOptions& options = {});

/// Arithmetic mean of unrounded per-kind values.
double mean_over_kinds(std::span<const double> values);

}  // namespace erakit::era
