#include "erakit/era.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <tuple>

namespace erakit::era {
namespace {

using features::FeatureVector;
using features::Kind;

std::vector<const FeatureVector*> select(std::span<const FeatureVector> vectors, Kind kind,
                                         std::string_view label = {}) {
  std::vector<const FeatureVector*> rows;
  for (const auto& v : vectors) {
    if (v.kind == kind && (label.empty() || v.clip.label == label)) rows.push_back(&v);
  }
  std::sort(rows.begin(), rows.end(), [](const FeatureVector* a, const FeatureVector* b) {
    return std::tie(a->clip.source, a->clip.sample_id, a->clip.label) <
           std::tie(b->clip.source, b->clip.sample_id, b->clip.label);
  });
  return rows;
}

Eigen::MatrixXd stack(const std::vector<const FeatureVector*>& rows, std::string_view context) {
  const Eigen::Index dim = rows.front()->dim();
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i]->dim() != dim) {
      throw InvalidInput(std::string(context) + ": feature dimension mismatch (" + std::to_string(rows[i]->dim()) +
                         " vs " + std::to_string(dim) + ")");
    }
    out.row(static_cast<Eigen::Index>(i)) = rows[i]->values.transpose();
  }
  return out;
}

}  // namespace

EraProjection era_projection_2d(std::span<const FeatureVector> vectors, std::string_view label, Kind kind,
                                bool standardize) {
  const std::string context = "label '" + std::string(label) + "', kind " + std::string(features::kind_name(kind));
  const auto rows = select(vectors, kind, label);
  if (rows.size() < 3) {
    throw InsufficientData(context + ": expression range needs at least 3 rows, got " + std::to_string(rows.size()));
  }
  const Eigen::MatrixXd data = stack(rows, context);
  const auto model = fit_pca<double>(data, Retain::components(2), standardize);
  const Eigen::MatrixXd projected = transform(model, data);

  EraProjection out;
  out.label = std::string(label);
  out.kind = kind;
  for (Eigen::Index r = 0; r < model.retained(); ++r) out.explained[static_cast<std::size_t>(r)] = model.explained_variance_ratio[r];
  out.points.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out.points.push_back({rows[i]->clip.source, rows[i]->clip.sample_id, projected(row, 0),
                          projected.cols() > 1 ? projected(row, 1) : 0.0});
    ++out.rows_per_source[rows[i]->clip.source];
  }
  return out;
}

const VarianceCell* VarianceSummary::find(std::string_view source, Kind kind) const {
  for (const auto& cell : cells) {
    if (cell.source == source && cell.kind == kind) return &cell;
  }
  return nullptr;
}

double mean_over_kinds(std::span<const double> values) {
  if (values.empty()) return 0.0;
  return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

VarianceSummary variance_summary(std::span<const FeatureVector> vectors, std::string_view reference_source,
                                 const VarianceOptions& options) {
  const bool has_reference = std::any_of(vectors.begin(), vectors.end(),
                                         [&](const FeatureVector& v) { return v.clip.source == reference_source; });
  if (!has_reference) {
    throw ConfigError("reference source '" + std::string(reference_source) + "' has no feature rows");
  }

  VarianceSummary summary;
  summary.reference_source = std::string(reference_source);
  std::map<std::string, std::vector<double>> per_source;

  for (Kind kind : features::kAllKinds) {
    const auto rows = select(vectors, kind);
    if (rows.empty()) continue;
    const std::string kind_label(features::kind_name(kind));
    const Eigen::MatrixXd pooled = stack(rows, kind_label);
    const auto model = fit_pca<double>(pooled, Retain::variance(options.retain_fraction), options.standardize);
    const Eigen::MatrixXd projected = transform(model, pooled);
    summary.retained_components[kind_label] = model.retained();

    // Rows are sorted by source, so each source is a contiguous block.
    std::map<std::string, std::pair<Eigen::Index, Eigen::Index>> blocks;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto [it, inserted] = blocks.try_emplace(rows[i]->clip.source, static_cast<Eigen::Index>(i), 0);
      ++it->second.second;
    }

    const auto ref = blocks.find(summary.reference_source);
    if (ref == blocks.end() || ref->second.second < 2) {
      throw InsufficientData("reference source '" + summary.reference_source + "' has fewer than 2 " + kind_label +
                             " rows");
    }
    const double ref_variance = total_variance(projected.middleRows(ref->second.first, ref->second.second));
    if (!(ref_variance > 0.0)) {
      throw InsufficientData("reference source '" + summary.reference_source + "' has zero " + kind_label +
                             " variance");
    }

    for (const auto& [source, block] : blocks) {
      if (block.second < 2) continue;
      const double value = source == summary.reference_source
                               ? 1.0
                               : total_variance(projected.middleRows(block.first, block.second)) / ref_variance;
      summary.cells.push_back({source, kind, value, static_cast<std::size_t>(block.second)});
      per_source[source].push_back(value);
    }
  }

  std::sort(summary.cells.begin(), summary.cells.end(), [](const VarianceCell& a, const VarianceCell& b) {
    return std::make_tuple(a.source, features::kind_name(a.kind)) < std::make_tuple(b.source, features::kind_name(b.kind));
  });
  for (const auto& [source, values] : per_source) summary.source_mean[source] = mean_over_kinds(values);
  return summary;
}

}  // namespace erakit::era
