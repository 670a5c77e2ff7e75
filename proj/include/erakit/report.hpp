#pragma once

#include "erakit/audio_io.hpp"
#include "erakit/dsp.hpp"
#include "erakit/era.hpp"
#include "erakit/features.hpp"

#include <array>
#include <cstdint>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace erakit::report {

inline constexpr int kFeatureColumns = 156;

/// Header `label,source,sample_id,kind,dim,v0..v155`; rows sorted by
/// (label, source, sample_id, kind). Shorter vectors leave trailing cells empty.
std::string emit_features_csv(std::span<const features::FeatureVector> vectors);
std::vector<features::FeatureVector> parse_features_csv(std::string_view text);

struct PeakRow {
  features::ClipRef clip;
  features::PeakMetrics metrics;
};

/// Columns `label,source,sample_id,peak_time_s,relative_magnitude`.
std::string emit_peaks_csv(std::span<const PeakRow> rows);

/// Columns `label,kind,source,sample_id,pc1,pc2`.
std::string emit_projection_csv(const era::EraProjection& projection);

/// Columns `source,kind,normalized_total_variance`; each source ends with a `mean` row.
std::string emit_variance_csv(const era::VarianceSummary& summary);

struct PlotSeries {
  std::string name;
  std::string color;
  std::vector<std::pair<double, double>> points;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;  // drawn in order, later on top
  int width = 640;
  int height = 480;
};

const std::array<std::string_view, 8>& palette();

/// Sorted source names with the reference moved to the end.
std::vector<std::string> source_order(const std::set<std::string>& sources, std::string_view reference);

PlotSpec projection_plot(const era::EraProjection& projection, std::string_view reference_source);
PlotSpec peaks_plot(std::span<const PeakRow> rows, std::string_view reference_source, std::string title);

/// Scatter plot: one circle per point, one legend entry per series.
std::string emit_era_svg(const PlotSpec& spec);

struct GrayImage {
  int rows = 0;
  int cols = 0;
  std::vector<std::uint8_t> pixels;  // row-major, row 0 at the top

  std::uint8_t at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * cols + col]; }
};

/// dB power spectrogram clipped to [max - 80, max]; low frequencies at the bottom.
GrayImage render_spectrogram(const audio::AudioClip& clip, dsp::FrameConfig cfg = {});

/// Binary portable graymap (P5).
std::string encode_pgm(const GrayImage& image);

}  // namespace erakit::report
