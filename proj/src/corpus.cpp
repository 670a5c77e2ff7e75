#include "erakit/corpus.hpp"

#include "erakit/audio_io.hpp"
#include "erakit/csv.hpp"
#include "erakit/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <regex>
#include <sstream>
#include <tuple>

namespace erakit::corpus {
namespace {

using nlohmann::json;

std::string lower_extension(const fs::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext;
}

bool supported_extension(const fs::path& path) { return lower_extension(path) == ".wav"; }

/// Compiled layout pattern with the capture index of each field.
struct Layout {
  std::regex pattern;
  int label_group = 0;
  int id_group = 0;
};

Layout compile_layout(std::string_view layout) {
  std::string re;
  int group = 0;
  Layout out;
  for (std::size_t i = 0; i < layout.size(); ++i) {
    const char c = layout[i];
    if (layout.substr(i, 7) == "{label}") {
      re += "([^/]+)";
      out.label_group = ++group;
      i += 6;
    } else if (layout.substr(i, 4) == "{id}") {
      re += "([^/]+)";
      out.id_group = ++group;
      i += 3;
    } else if (c == '*') {
      re += "[^/]*";
    } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '/' || c == '_' || c == '-') {
      re += c;
    } else {
      re += '\\';
      re += c;
    }
  }
  if (out.label_group == 0 || out.id_group == 0) {
    throw ConfigError("layout '" + std::string(layout) + "' must contain both {label} and {id}");
  }
  out.pattern = std::regex(re, std::regex::ECMAScript | std::regex::icase);
  return out;
}

void add_entry(std::vector<CorpusEntry>& entries, CorpusEntry entry, const std::optional<std::set<std::string>>& filter) {
  if (filter && !filter->contains(entry.label)) return;
  entries.push_back(std::move(entry));
}

}  // namespace

std::string normalize_label(std::string_view raw) {
  std::string out;
  bool pending_space = false;
  for (char c : raw) {
    if (c == '_' || std::isspace(static_cast<unsigned char>(c))) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

std::vector<Esc50MetadataRow> load_esc50_metadata(std::string_view csv_text) {
  const auto text_lines = csv::lines(csv_text);
  if (text_lines.empty()) throw InvalidInput("ESC-50 metadata: missing header row");
  const auto header = csv::split_line(text_lines.front());
  const auto column = [&header](std::string_view name, bool required) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    if (required) throw InvalidInput("ESC-50 metadata: missing required column '" + std::string(name) + "'");
    return -1;
  };
  const int c_filename = column("filename", true);
  const int c_target = column("target", true);
  const int c_category = column("category", true);
  const int c_fold = column("fold", false);
  const int c_take = column("take", false);
  const int c_esc10 = column("esc10", false);
  const int c_src = column("src_file", false);

  std::vector<Esc50MetadataRow> rows;
  std::map<int, std::string> category_of_target;
  std::map<std::string, int> target_of_category;
  for (std::size_t i = 1; i < text_lines.size(); ++i) {
    if (text_lines[i].empty()) continue;
    const std::string where = "ESC-50 metadata line " + std::to_string(i + 1);
    const auto fields = csv::split_line(text_lines[i]);
    const auto get = [&](int c) -> std::string {
      if (c < 0) return {};
      if (static_cast<std::size_t>(c) >= fields.size()) throw InvalidInput(where + ": too few fields");
      return fields[static_cast<std::size_t>(c)];
    };
    Esc50MetadataRow row;
    row.filename = get(c_filename);
    try {
      row.target = static_cast<int>(csv::parse_int(get(c_target)));
    } catch (const InvalidInput&) {
      throw InvalidInput(where + ": target '" + get(c_target) + "' is not an integer");
    }
    if (row.target < 0 || row.target > 49) {
      throw InvalidInput(where + ": target " + std::to_string(row.target) + " outside [0, 49]");
    }
    row.category = normalize_label(get(c_category));
    row.fold = get(c_fold);
    row.take = get(c_take);
    row.esc10 = get(c_esc10);
    row.src_file = get(c_src);

    const auto [cat_it, new_target] = category_of_target.try_emplace(row.target, row.category);
    const auto [tgt_it, new_category] = target_of_category.try_emplace(row.category, row.target);
    if (cat_it->second != row.category || tgt_it->second != row.target) {
      throw InvalidInput(where + ": category '" + row.category + "' and target " + std::to_string(row.target) +
                         " contradict earlier rows");
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

CorpusManifest build_manifest(const std::map<std::string, fs::path>& roots, const std::optional<Esc50Source>& esc50,
                              const BuildOptions& options) {
  const Layout layout = compile_layout(options.layout);
  std::optional<std::set<std::string>> filter;
  if (options.label_filter) {
    filter.emplace();
    for (const auto& label : *options.label_filter) filter->insert(normalize_label(label));
  }
  CorpusManifest manifest;
  std::vector<CorpusEntry> entries;

  for (const auto& [source, root] : roots) {
    if (source.empty()) throw ConfigError("source names must be non-empty");
    if (!fs::is_directory(root)) throw InvalidInput("source '" + source + "': not a directory: " + root.string());
    manifest.sources.insert(source);
    for (const auto& item : fs::recursive_directory_iterator(root)) {
      if (!item.is_regular_file()) continue;
      const std::string relative = fs::relative(item.path(), root).generic_string();
      std::smatch match;
      if (!std::regex_match(relative, match, layout.pattern)) continue;
      const std::string label = normalize_label(match[layout.label_group].str());
      if (label.empty() || match[layout.id_group].str().starts_with('.')) continue;
      add_entry(entries, {item.path(), label, source, match[layout.id_group].str()}, filter);
    }
  }

  if (esc50) {
    if (roots.contains(esc50->source_name)) {
      throw ConfigError("source name '" + esc50->source_name + "' is used by both ESC-50 and a generated tree");
    }
    manifest.sources.insert(esc50->source_name);
    for (const auto& row : esc50->rows) {
      add_entry(entries, {esc50->audio_dir / row.filename, row.category, esc50->source_name,
                          fs::path(row.filename).stem().string()},
                filter);
    }
  }

  std::sort(entries.begin(), entries.end(), [](const CorpusEntry& a, const CorpusEntry& b) {
    return std::tie(a.label, a.source, a.sample_id, a.file_path) < std::tie(b.label, b.source, b.sample_id, b.file_path);
  });
  for (std::size_t i = 1; i < entries.size(); ++i) {
    const auto& a = entries[i - 1];
    const auto& b = entries[i];
    if (a.label == b.label && a.source == b.source && a.sample_id == b.sample_id) {
      throw InvalidInput("conflicting entries for (" + a.label + ", " + a.source + ", " + a.sample_id +
                         "): " + a.file_path.string() + " and " + b.file_path.string());
    }
  }
  if (entries.empty()) throw InvalidInput("manifest has no entries");

  for (const auto& e : entries) manifest.labels.insert(e.label);
  manifest.entries = std::move(entries);
  manifest.reference_source = !options.reference_source.empty() ? options.reference_source
                              : esc50                           ? esc50->source_name
                                                                : std::string();
  if (!manifest.reference_source.empty() && !manifest.sources.contains(manifest.reference_source)) {
    throw ConfigError("reference source '" + manifest.reference_source + "' is not one of the manifest's sources");
  }
  return manifest;
}

ValidationReport validate_manifest(const CorpusManifest& manifest, bool check_decode) {
  ValidationReport report;
  std::map<std::pair<std::string, std::string>, std::size_t> counts;
  for (const auto& label : manifest.labels) {
    for (const auto& source : manifest.sources) counts[{label, source}] = 0;
  }
  for (const auto& e : manifest.entries) {
    ++counts[{e.label, e.source}];
    std::error_code ec;
    if (!fs::exists(e.file_path, ec)) {
      report.missing_files.push_back(e.file_path);
      continue;
    }
    if (!supported_extension(e.file_path)) {
      report.decode_failures.push_back({e.file_path, "unsupported audio extension '" + e.file_path.extension().string() + "'"});
      continue;
    }
    if (check_decode) {
      try {
        (void)audio::read_wav_file(e.file_path);
      } catch (const std::exception& ex) {
        report.decode_failures.push_back({e.file_path, ex.what()});
      }
    }
  }
  for (const auto& [key, count] : counts) report.cells.push_back({key.first, key.second, count});
  return report;
}

std::string to_json(const CorpusManifest& manifest) {
  json doc;
  doc["reference_source"] = manifest.reference_source;
  doc["labels"] = manifest.labels;
  doc["sources"] = manifest.sources;
  json entries = json::array();
  for (const auto& e : manifest.entries) {
    entries.push_back({{"file_path", e.file_path.generic_string()},
                       {"label", e.label},
                       {"source", e.source},
                       {"sample_id", e.sample_id}});
  }
  doc["entries"] = std::move(entries);
  return doc.dump(2) + "\n";
}

CorpusManifest manifest_from_json(std::string_view text) {
  CorpusManifest manifest;
  try {
    const json doc = json::parse(text);
    manifest.reference_source = doc.value("reference_source", std::string());
    for (const auto& e : doc.at("entries")) {
      manifest.entries.push_back({fs::path(e.at("file_path").get<std::string>()), e.at("label").get<std::string>(),
                                  e.at("source").get<std::string>(), e.at("sample_id").get<std::string>()});
    }
    for (const auto& l : doc.at("labels")) manifest.labels.insert(l.get<std::string>());
    for (const auto& s : doc.at("sources")) manifest.sources.insert(s.get<std::string>());
  } catch (const json::exception& e) {
    throw InvalidInput(std::string("malformed manifest: ") + e.what());
  }
  for (const auto& e : manifest.entries) {
    if (!manifest.labels.contains(e.label) || !manifest.sources.contains(e.source)) {
      throw InvalidInput("manifest entry " + e.sample_id + " has an undeclared label or source");
    }
  }
  return manifest;
}

CorpusManifest read_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open manifest " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return manifest_from_json(buffer.str());
}

void write_manifest(const fs::path& path, const CorpusManifest& manifest) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write manifest " + path.string());
  out << to_json(manifest);
}

}  // namespace erakit::corpus
