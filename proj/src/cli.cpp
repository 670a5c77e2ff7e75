#include "erakit/cli.hpp"

#include "erakit/corpus.hpp"
#include "erakit/era.hpp"
#include "erakit/error.hpp"
#include "erakit/pipeline.hpp"
#include "erakit/report.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace erakit::cli {
namespace {

namespace fs = std::filesystem;

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out << text;
  if (!out) throw InvalidInput("failed writing " + path.string());
}

struct IngestArgs {
  std::vector<std::string> generated;
  std::string esc50_meta;
  std::string esc50_audio;
  std::string labels;
  std::string layout = "{label}/{id}.wav";
  std::string reference;
  bool check_decode = false;
  std::string out;
};

struct ExtractArgs {
  std::string manifest;
  features::ExtractConfig config;
  std::string pitch_deltas = "voiced-only";
  int threads = 1;
  std::string out;
};

struct PeaksArgs {
  std::string manifest;
  bool weighted = false;
  int threads = 1;
  std::string label;
  std::string out;
  std::string out_svg;
};

struct EraArgs {
  std::string features;
  std::string label;
  std::string kind;
  bool standardize = false;
  std::string reference{corpus::kReferenceSource};
  std::string out_csv;
  std::string out_svg;
};

struct VarianceArgs {
  std::string features;
  std::string reference;
  bool standardize = false;
  double retain = 0.95;
  std::string out;
};

struct SpectrogramArgs {
  std::string in;
  int sample_rate = audio::kCanonicalRate;
  std::string out;
};

int run_ingest(const IngestArgs& a, std::ostream& out, std::ostream& err) {
  std::map<std::string, fs::path> roots;
  for (const auto& spec : a.generated) {
    const auto eq = spec.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
      throw ConfigError("--generated expects <source>=<dir>, got '" + spec + "'");
    }
    if (!roots.emplace(spec.substr(0, eq), spec.substr(eq + 1)).second) {
      throw ConfigError("source '" + spec.substr(0, eq) + "' given twice");
    }
  }

  std::optional<corpus::Esc50Source> esc50;
  if (!a.esc50_meta.empty() || !a.esc50_audio.empty()) {
    if (a.esc50_meta.empty() || a.esc50_audio.empty()) {
      throw ConfigError("--esc50-meta and --esc50-audio must be given together");
    }
    esc50 = corpus::Esc50Source{corpus::load_esc50_metadata(read_text(a.esc50_meta)), a.esc50_audio};
  }
  if (roots.empty() && !esc50) throw ConfigError("nothing to ingest: give --generated and/or --esc50-meta");

  corpus::BuildOptions options;
  options.layout = a.layout;
  options.reference_source = a.reference;
  if (!a.labels.empty()) {
    std::set<std::string> filter;
    std::stringstream ss(a.labels);
    for (std::string item; std::getline(ss, item, ',');) {
      if (auto label = corpus::normalize_label(item); !label.empty()) filter.insert(label);
    }
    options.label_filter = std::move(filter);
  }

  const auto manifest = corpus::build_manifest(roots, esc50, options);
  corpus::write_manifest(a.out, manifest);

  const auto report = corpus::validate_manifest(manifest, a.check_decode);
  out << "manifest: " << manifest.entries.size() << " entries, " << manifest.labels.size() << " labels, "
      << manifest.sources.size() << " sources -> " << a.out << "\n";
  for (const auto& cell : report.cells) {
    if (cell.count == 0) err << "warning: no clips for label '" << cell.label << "' in source '" << cell.source << "'\n";
  }
  for (const auto& path : report.missing_files) err << "missing: " << path.string() << "\n";
  for (const auto& issue : report.decode_failures) err << "undecodable: " << issue.file_path.string() << ": " << issue.message << "\n";
  return report.ok() ? 0 : 3;
}

int run_extract(ExtractArgs a, std::ostream& out) {
  if (a.pitch_deltas == "voiced-only") {
    a.config.pitch_deltas = features::PitchDeltaMode::kVoicedOnly;
  } else if (a.pitch_deltas == "interpolate") {
    a.config.pitch_deltas = features::PitchDeltaMode::kInterpolateThenMask;
  } else {
    throw ConfigError("--pitch-deltas must be voiced-only or interpolate");
  }
  const auto manifest = corpus::read_manifest(a.manifest);
  const auto vectors = pipeline::extract_corpus(manifest, a.config, a.threads);
  write_text(a.out, report::emit_features_csv(vectors));

  std::size_t pitch_rows = 0;
  for (const auto& v : vectors) pitch_rows += v.kind == features::Kind::kPitch;
  out << "features: " << manifest.entries.size() << " clips, " << manifest.entries.size() - pitch_rows
      << " without voiced frames (excluded from pitch) -> " << a.out << "\n";
  return 0;
}

int run_peaks(const PeaksArgs& a, std::ostream& out) {
  auto manifest = corpus::read_manifest(a.manifest);
  if (!a.label.empty()) {
    const auto label = corpus::normalize_label(a.label);
    std::erase_if(manifest.entries, [&](const corpus::CorpusEntry& e) { return e.label != label; });
    if (manifest.entries.empty()) throw InsufficientData("no clips for label '" + label + "'");
  }
  pipeline::PeakOptions options;
  options.a_weighted = a.weighted;
  const auto rows = pipeline::corpus_peaks(manifest, options, a.threads);
  write_text(a.out, report::emit_peaks_csv(rows));
  if (!a.out_svg.empty()) {
    const std::string title = a.label.empty() ? "loudness peaks" : "loudness peaks: " + corpus::normalize_label(a.label);
    write_text(a.out_svg, report::emit_era_svg(report::peaks_plot(rows, manifest.reference_source, title)));
  }
  out << "peaks: " << rows.size() << " clips -> " << a.out << "\n";
  return 0;
}

int run_era(const EraArgs& a, std::ostream& out) {
  const auto vectors = report::parse_features_csv(read_text(a.features));
  const auto kind = features::parse_kind(a.kind);
  const auto label = corpus::normalize_label(a.label);
  const auto projection = era::era_projection_2d(vectors, label, kind, a.standardize);
  write_text(a.out_csv, report::emit_projection_csv(projection));
  write_text(a.out_svg, report::emit_era_svg(report::projection_plot(projection, a.reference)));
  out << "era: " << projection.points.size() << " points for '" << label << "' (" << a.kind << ");";
  for (const auto& [source, n] : projection.rows_per_source) out << ' ' << source << '=' << n;
  out << "\n";
  return 0;
}

int run_variance(const VarianceArgs& a, std::ostream& out) {
  const auto vectors = report::parse_features_csv(read_text(a.features));
  era::VarianceOptions options;
  options.retain_fraction = a.retain;
  options.standardize = a.standardize;
  const auto summary = era::variance_summary(vectors, a.reference, options);
  write_text(a.out, report::emit_variance_csv(summary));
  for (const auto& cell : summary.cells) {
    out << cell.source << ' ' << features::kind_name(cell.kind) << ' ' << cell.normalized_total_variance << " (n="
        << cell.rows << ")\n";
  }
  return 0;
}

int run_spectrogram(const SpectrogramArgs& a, std::ostream& out) {
  const auto clip = audio::load_canonical(a.in, a.sample_rate);
  const auto image = report::render_spectrogram(clip);
  write_text(a.out, report::encode_pgm(image));
  out << "spectrogram: " << image.rows << " x " << image.cols << " -> " << a.out << "\n";
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Expressive range analysis of audio corpora", "erakit"};
  app.require_subcommand(1);

  IngestArgs ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Build a corpus manifest from generated trees and ESC-50");
  c_ingest->add_option("--generated", ingest.generated, "<source>=<dir>, repeatable");
  c_ingest->add_option("--esc50-meta", ingest.esc50_meta, "ESC-50 meta/esc50.csv");
  c_ingest->add_option("--esc50-audio", ingest.esc50_audio, "ESC-50 audio directory");
  c_ingest->add_option("--labels", ingest.labels, "Comma-separated label filter");
  c_ingest->add_option("--layout", ingest.layout, "Clip path pattern under each source root")->capture_default_str();
  c_ingest->add_option("--reference", ingest.reference, "Reference source (defaults to ESC-50 when given)");
  c_ingest->add_flag("--check-decode", ingest.check_decode, "Decode every file during validation");
  c_ingest->add_option("--out", ingest.out, "Output manifest.json")->required();

  ExtractArgs extract;
  auto* c_extract = app.add_subcommand("extract", "Extract pitch, loudness and timbre feature vectors");
  c_extract->add_option("--manifest", extract.manifest)->required();
  c_extract->add_option("--sample-rate", extract.config.sample_rate)->capture_default_str()->check(CLI::PositiveNumber);
  c_extract->add_option("--hop", extract.config.hop)->capture_default_str()->check(CLI::PositiveNumber);
  c_extract->add_option("--frame", extract.config.frame_length)->capture_default_str()->check(CLI::PositiveNumber);
  c_extract->add_option("--n-mels", extract.config.n_mels)->capture_default_str()->check(CLI::PositiveNumber);
  c_extract->add_option("--n-mfcc", extract.config.n_mfcc)->capture_default_str()->check(CLI::PositiveNumber);
  c_extract->add_option("--rms-frame", extract.config.rms_frame)->capture_default_str()->check(CLI::PositiveNumber);
  c_extract->add_option("--fmin", extract.config.fmin)->capture_default_str()->check(CLI::PositiveNumber);
  c_extract->add_option("--fmax", extract.config.fmax)->capture_default_str()->check(CLI::PositiveNumber);
  c_extract->add_option("--pitch-deltas", extract.pitch_deltas, "voiced-only | interpolate")->capture_default_str();
  c_extract->add_option("--threads", extract.threads)->capture_default_str()->check(CLI::PositiveNumber);
  c_extract->add_option("--out", extract.out)->required();

  PeaksArgs peaks;
  auto* c_peaks = app.add_subcommand("peaks", "Loudness-peak timing and relative magnitude per clip");
  c_peaks->add_option("--manifest", peaks.manifest)->required();
  c_peaks->add_flag("--peaks-weighted", peaks.weighted, "Use A-weighted RMS instead of plain RMS");
  c_peaks->add_option("--label", peaks.label, "Restrict to one label");
  c_peaks->add_option("--threads", peaks.threads)->capture_default_str()->check(CLI::PositiveNumber);
  c_peaks->add_option("--out", peaks.out)->required();
  c_peaks->add_option("--out-svg", peaks.out_svg, "Optional expressive-range scatter plot");

  EraArgs era_args;
  auto* c_era = app.add_subcommand("era", "Two-component expressive range projection for one label");
  c_era->add_option("--features", era_args.features)->required();
  c_era->add_option("--label", era_args.label)->required();
  c_era->add_option("--kind", era_args.kind)->required()->check(CLI::IsMember({"pitch", "loudness", "timbre"}));
  c_era->add_flag("--standardize", era_args.standardize);
  c_era->add_option("--reference", era_args.reference, "Source drawn last in the plot")->capture_default_str();
  c_era->add_option("--out-csv", era_args.out_csv)->required();
  c_era->add_option("--out-svg", era_args.out_svg)->required();

  VarianceArgs variance;
  auto* c_variance = app.add_subcommand("variance", "Normalized total variance per source and kind");
  c_variance->add_option("--features", variance.features)->required();
  c_variance->add_option("--reference", variance.reference)->required();
  c_variance->add_flag("--standardize", variance.standardize);
  c_variance->add_option("--retain", variance.retain)->capture_default_str()->check(CLI::Range(0.0, 1.0));
  c_variance->add_option("--out", variance.out)->required();

  SpectrogramArgs spectrogram;
  auto* c_spec = app.add_subcommand("render-spectrogram", "Write a dB spectrogram as a PGM image");
  c_spec->add_option("--in", spectrogram.in)->required();
  c_spec->add_option("--sample-rate", spectrogram.sample_rate)->capture_default_str()->check(CLI::PositiveNumber);
  c_spec->add_option("--out", spectrogram.out)->required();

  std::vector<std::string> argv_storage{"erakit"};
  argv_storage.insert(argv_storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : argv_storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (c_ingest->parsed()) return run_ingest(ingest, out, err);
    if (c_extract->parsed()) return run_extract(extract, out);
    if (c_peaks->parsed()) return run_peaks(peaks, out);
    if (c_era->parsed()) return run_era(era_args, out);
    if (c_variance->parsed()) return run_variance(variance, out);
    if (c_spec->parsed()) return run_spectrogram(spectrogram, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 2;
}

}  // namespace erakit::cli
