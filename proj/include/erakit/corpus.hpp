#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace erakit::corpus {

namespace fs = std::filesystem;

inline constexpr std::string_view kReferenceSource = "reference";

struct CorpusEntry {
  fs::path file_path;
  std::string label;
  std::string source;
  std::string sample_id;
};

struct CorpusManifest {
  std::vector<CorpusEntry> entries;  // sorted by (label, source, sample_id)
  std::set<std::string> labels;
  std::set<std::string> sources;
  std::string reference_source;  // empty when no reference was designated
};

struct Esc50MetadataRow {
  std::string filename;
  int target = 0;
  std::string category;  // normalized label, e.g. "crying baby"
  std::string fold;
  std::string take;
  std::string esc10;
  std::string src_file;
};

/// Lower-cases, maps '_' to ' ', collapses runs of whitespace and trims.
std::string normalize_label(std::string_view raw);

/// Parses the ESC-50 metadata table (header row required).
std::vector<Esc50MetadataRow> load_esc50_metadata(std::string_view csv_text);

struct Esc50Source {
  std::vector<Esc50MetadataRow> rows;
  fs::path audio_dir;
  std::string source_name{kReferenceSource};
};

struct BuildOptions {
  /// Path of each clip relative to its source root. `{label}` and `{id}` capture
  /// one path segment each; `*` matches within a segment. Case-insensitive.
  std::string layout = "{label}/{id}.wav";
  std::optional<std::set<std::string>> label_filter;
  /// Defaults to the ESC-50 source name when ESC-50 rows are supplied.
  std::string reference_source;
};

CorpusManifest build_manifest(const std::map<std::string, fs::path>& roots, const std::optional<Esc50Source>& esc50,
                              const BuildOptions& options = {});

struct ValidationCell {
  std::string label;
  std::string source;
  std::size_t count = 0;
};

struct ValidationIssue {
  fs::path file_path;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationCell> cells;  // every label x source, sorted
  std::vector<fs::path> missing_files;
  std::vector<ValidationIssue> decode_failures;

  bool ok() const { return missing_files.empty() && decode_failures.empty(); }
};

/// Never throws for data problems; everything lands in the report.
ValidationReport validate_manifest(const CorpusManifest& manifest, bool check_decode = false);

std::string to_json(const CorpusManifest& manifest);
CorpusManifest manifest_from_json(std::string_view text);

CorpusManifest read_manifest(const fs::path& path);
void write_manifest(const fs::path& path, const CorpusManifest& manifest);

}  // namespace erakit::corpus
