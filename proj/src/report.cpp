#include "erakit/report.hpp"

#include "erakit/csv.hpp"
#include "erakit/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <tuple>

namespace erakit::report {
namespace {

using features::FeatureVector;
using features::Kind;

std::string xml_escape(std::string_view text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

std::string percent(double ratio) { return csv::format_fixed(100.0 * ratio, 1) + "%"; }

std::vector<PlotSeries> series_by_source(const std::map<std::string, std::vector<std::pair<double, double>>>& points,
                                         std::string_view reference) {
  std::set<std::string> names;
  for (const auto& [name, _] : points) names.insert(name);
  const auto order = source_order(names, reference);
  // Colors follow sorted source name so they are stable across plots.
  std::map<std::string, std::string> colors;
  std::size_t i = 0;
  for (const auto& name : names) colors[name] = std::string(palette()[i++ % palette().size()]);

  std::vector<PlotSeries> out;
  for (const auto& name : order) out.push_back({name, colors[name], points.at(name)});
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

Range padded_range(double lo, double hi) {
  if (!(hi > lo)) return {lo - 1.0, hi + 1.0};
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

}  // namespace

std::string emit_features_csv(std::span<const FeatureVector> vectors) {
  std::vector<const FeatureVector*> rows;
  Eigen::Index width = kFeatureColumns;
  for (const auto& v : vectors) {
    rows.push_back(&v);
    width = std::max(width, v.dim());
  }
  std::sort(rows.begin(), rows.end(), [](const FeatureVector* a, const FeatureVector* b) {
    return std::make_tuple(std::cref(a->clip.label), std::cref(a->clip.source), std::cref(a->clip.sample_id),
                           features::kind_name(a->kind)) <
           std::make_tuple(std::cref(b->clip.label), std::cref(b->clip.source), std::cref(b->clip.sample_id),
                           features::kind_name(b->kind));
  });

  std::string out = "label,source,sample_id,kind,dim";
  for (Eigen::Index i = 0; i < width; ++i) out += ",v" + std::to_string(i);
  out += '\n';
  for (const auto* v : rows) {
    out += csv::escape(v->clip.label) + ',' + csv::escape(v->clip.source) + ',' + csv::escape(v->clip.sample_id) +
           ',' + std::string(features::kind_name(v->kind)) + ',' + std::to_string(v->dim());
    for (Eigen::Index i = 0; i < width; ++i) {
      out += ',';
      if (i < v->dim()) out += csv::format_double(v->values[i]);
    }
    out += '\n';
  }
  return out;
}

std::vector<FeatureVector> parse_features_csv(std::string_view text) {
  const auto text_lines = csv::lines(text);
  if (text_lines.empty()) throw InvalidInput("features CSV: missing header");
  const auto header = csv::split_line(text_lines.front());
  if (header.size() < 5 || header[0] != "label" || header[1] != "source" || header[2] != "sample_id" ||
      header[3] != "kind" || header[4] != "dim") {
    throw InvalidInput("features CSV: header must start with label,source,sample_id,kind,dim");
  }
  std::vector<FeatureVector> out;
  for (std::size_t i = 1; i < text_lines.size(); ++i) {
    if (text_lines[i].empty()) continue;
    const std::string where = "features CSV line " + std::to_string(i + 1);
    const auto fields = csv::split_line(text_lines[i]);
    if (fields.size() != header.size()) throw InvalidInput(where + ": expected " + std::to_string(header.size()) + " fields");
    FeatureVector v;
    v.clip = {fields[0], fields[1], fields[2]};
    try {
      v.kind = features::parse_kind(fields[3]);
      const long long dim = csv::parse_int(fields[4]);
      if (dim < 1 || static_cast<std::size_t>(dim) + 5 > fields.size()) throw InvalidInput("dim out of range");
      v.values.resize(dim);
      for (long long k = 0; k < dim; ++k) v.values[k] = csv::parse_double(fields[5 + static_cast<std::size_t>(k)]);
    } catch (const Error& e) {
      throw InvalidInput(where + ": " + e.what());
    }
    out.push_back(std::move(v));
  }
  return out;
}

std::string emit_peaks_csv(std::span<const PeakRow> rows) {
  std::vector<const PeakRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const PeakRow* a, const PeakRow* b) { return a->clip < b->clip; });
  std::string out = "label,source,sample_id,peak_time_s,relative_magnitude\n";
  for (const auto* r : sorted) {
    out += csv::escape(r->clip.label) + ',' + csv::escape(r->clip.source) + ',' + csv::escape(r->clip.sample_id) +
           ',' + csv::format_double(r->metrics.peak_time_s) + ',' + csv::format_double(r->metrics.relative_magnitude) +
           '\n';
  }
  return out;
}

std::string emit_projection_csv(const era::EraProjection& projection) {
  std::string out = "label,kind,source,sample_id,pc1,pc2\n";
  const std::string prefix = csv::escape(projection.label) + ',' + std::string(features::kind_name(projection.kind)) + ',';
  for (const auto& p : projection.points) {
    out += prefix + csv::escape(p.source) + ',' + csv::escape(p.sample_id) + ',' + csv::format_double(p.pc1) + ',' +
           csv::format_double(p.pc2) + '\n';
  }
  return out;
}

std::string emit_variance_csv(const era::VarianceSummary& summary) {
  std::string out = "source,kind,normalized_total_variance\n";
  std::string current;
  const auto close_source = [&](const std::string& source) {
    if (!source.empty()) out += csv::escape(source) + ",mean," + csv::format_double(summary.source_mean.at(source)) + '\n';
  };
  for (const auto& cell : summary.cells) {
    if (cell.source != current) {
      close_source(current);
      current = cell.source;
    }
    out += csv::escape(cell.source) + ',' + std::string(features::kind_name(cell.kind)) + ',' +
           csv::format_double(cell.normalized_total_variance) + '\n';
  }
  close_source(current);
  return out;
}

const std::array<std::string_view, 8>& palette() {
  static constexpr std::array<std::string_view, 8> colors = {
      "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};
  return colors;
}

std::vector<std::string> source_order(const std::set<std::string>& sources, std::string_view reference) {
  std::vector<std::string> out;
  for (const auto& s : sources) {
    if (s != reference) out.push_back(s);
  }
  if (sources.contains(std::string(reference))) out.emplace_back(reference);
  return out;
}

PlotSpec projection_plot(const era::EraProjection& projection, std::string_view reference_source) {
  std::map<std::string, std::vector<std::pair<double, double>>> points;
  for (const auto& p : projection.points) points[p.source].emplace_back(p.pc1, p.pc2);
  PlotSpec spec;
  spec.title = projection.label + " (" + std::string(features::kind_name(projection.kind)) + ")";
  spec.x_label = "PC1 (" + percent(projection.explained[0]) + ")";
  spec.y_label = "PC2 (" + percent(projection.explained[1]) + ")";
  spec.series = series_by_source(points, reference_source);
  return spec;
}

PlotSpec peaks_plot(std::span<const PeakRow> rows, std::string_view reference_source, std::string title) {
  std::map<std::string, std::vector<std::pair<double, double>>> points;
  std::vector<const PeakRow*> sorted;
  for (const auto& r : rows) sorted.push_back(&r);
  std::sort(sorted.begin(), sorted.end(), [](const PeakRow* a, const PeakRow* b) { return a->clip < b->clip; });
  for (const auto* r : sorted) points[r->clip.source].emplace_back(r->metrics.peak_time_s, r->metrics.relative_magnitude);
  PlotSpec spec;
  spec.title = std::move(title);
  spec.x_label = "peak time (s)";
  spec.y_label = "relative magnitude (peak / mean RMS)";
  spec.series = series_by_source(points, reference_source);
  return spec;
}

std::string emit_era_svg(const PlotSpec& spec) {
  std::size_t total = 0;
  double x_lo = 0, x_hi = 0, y_lo = 0, y_hi = 0;
  std::set<std::string> names;
  for (const auto& s : spec.series) {
    if (!names.insert(s.name).second) throw InvalidInput("plot series names must be unique: " + s.name);
    for (const auto& [x, y] : s.points) {
      if (!std::isfinite(x) || !std::isfinite(y)) throw InvalidInput("plot point is not finite");
      if (total++ == 0) {
        x_lo = x_hi = x;
        y_lo = y_hi = y;
      }
      x_lo = std::min(x_lo, x);
      x_hi = std::max(x_hi, x);
      y_lo = std::min(y_lo, y);
      y_hi = std::max(y_hi, y);
    }
  }
  if (total == 0) throw InvalidInput("cannot plot zero points");

  const Range xr = padded_range(x_lo, x_hi);
  const Range yr = padded_range(y_lo, y_hi);
  const double left = 80, right = 150, top = 40, bottom = 60;
  const double plot_w = spec.width - left - right;
  const double plot_h = spec.height - top - bottom;
  const auto px = [&](double x) { return left + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  const auto py = [&](double y) { return top + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h; };
  const auto num = [](double v) { return csv::format_fixed(v, 2); };

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
      << "\" viewBox=\"0 0 " << spec.width << ' ' << spec.height << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << spec.width << "\" height=\"" << spec.height << "\" fill=\"white\"/>\n"
      << "<text x=\"" << num(left + plot_w / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"14\">"
      << xml_escape(spec.title) << "</text>\n";

  // Frame and axis annotations.
  svg << "<g class=\"axes\" stroke=\"black\" fill=\"none\">\n"
      << "<rect x=\"" << num(left) << "\" y=\"" << num(top) << "\" width=\"" << num(plot_w) << "\" height=\""
      << num(plot_h) << "\"/>\n</g>\n";
  svg << "<g class=\"ticks\">\n"
      << "<text x=\"" << num(left) << "\" y=\"" << num(top + plot_h + 16) << "\" text-anchor=\"start\">" << num(xr.lo)
      << "</text>\n"
      << "<text x=\"" << num(left + plot_w) << "\" y=\"" << num(top + plot_h + 16) << "\" text-anchor=\"end\">"
      << num(xr.hi) << "</text>\n"
      << "<text x=\"" << num(left - 6) << "\" y=\"" << num(top + plot_h) << "\" text-anchor=\"end\">" << num(yr.lo)
      << "</text>\n"
      << "<text x=\"" << num(left - 6) << "\" y=\"" << num(top + 10) << "\" text-anchor=\"end\">" << num(yr.hi)
      << "</text>\n</g>\n";
  svg << "<text class=\"x-label\" x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(spec.height - 16)
      << "\" text-anchor=\"middle\">" << xml_escape(spec.x_label) << "</text>\n"
      << "<text class=\"y-label\" x=\"20\" y=\"" << num(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
      << num(top + plot_h / 2) << ")\">" << xml_escape(spec.y_label) << "</text>\n";

  for (const auto& s : spec.series) {
    svg << "<g class=\"series\" data-name=\"" << xml_escape(s.name) << "\" fill=\"" << s.color
        << "\" fill-opacity=\"0.7\">\n";
    for (const auto& [x, y] : s.points) {
      svg << "<circle cx=\"" << num(px(x)) << "\" cy=\"" << num(py(y)) << "\" r=\"3\"/>\n";
    }
    svg << "</g>\n";
  }

  svg << "<g class=\"legend\">\n";
  double ly = top + 10;
  for (const auto& s : spec.series) {
    svg << "<g class=\"legend-entry\"><rect x=\"" << num(left + plot_w + 16) << "\" y=\"" << num(ly - 9)
        << "\" width=\"10\" height=\"10\" fill=\"" << s.color << "\"/><text x=\"" << num(left + plot_w + 32)
        << "\" y=\"" << num(ly) << "\">" << xml_escape(s.name) << "</text></g>\n";
    ly += 18;
  }
  svg << "</g>\n</svg>\n";
  return svg.str();
}

GrayImage render_spectrogram(const audio::AudioClip& clip, dsp::FrameConfig cfg) {
  const auto power = dsp::stft_power(clip, cfg);
  GrayImage image;
  image.rows = static_cast<int>(power.values.rows());
  image.cols = static_cast<int>(power.values.cols());
  image.pixels.assign(static_cast<std::size_t>(image.rows) * image.cols, 0);
  const double peak = power.values.maxCoeff();
  if (!(peak > 0.0)) return image;

  constexpr double kRangeDb = 80.0;
  const double top_db = 10.0 * std::log10(peak);
  const double floor_db = top_db - kRangeDb;
  for (int bin = 0; bin < image.rows; ++bin) {
    const int row = image.rows - 1 - bin;
    for (int t = 0; t < image.cols; ++t) {
      const double db = 10.0 * std::log10(std::max(power.values(bin, t), dsp::kLogFloor));
      const double level = (std::clamp(db, floor_db, top_db) - floor_db) / kRangeDb;
      image.pixels[static_cast<std::size_t>(row) * image.cols + t] = static_cast<std::uint8_t>(std::lround(255.0 * level));
    }
  }
  return image;
}

std::string encode_pgm(const GrayImage& image) {
  std::string out = "P5\n" + std::to_string(image.cols) + " " + std::to_string(image.rows) + "\n255\n";
  out.append(reinterpret_cast<const char*>(image.pixels.data()), image.pixels.size());
  return out;
}

}  // namespace erakit::report
