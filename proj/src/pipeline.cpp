#include "erakit/pipeline.hpp"

#include "erakit/error.hpp"

namespace erakit::pipeline {

std::vector<features::FeatureVector> extract_corpus(const corpus::CorpusManifest& manifest,
                                                    const features::ExtractConfig& config, int threads) {
  const auto& entries = manifest.entries;
  const auto per_clip = parallel_map<features::ClipFeatures>(entries.size(), threads, [&](std::size_t i) {
    const auto& e = entries[i];
    const features::ClipRef ref{e.label, e.source, e.sample_id};
    audio::AudioClip clip;
    try {
      clip = audio::load_canonical(e.file_path, config.sample_rate);
    } catch (const InvalidInput& ex) {
      throw InvalidInput(e.label + "/" + e.source + "/" + e.sample_id + ": " + ex.what());
    }
    return features::assemble_feature_vectors(clip, config, ref);
  });

  std::vector<features::FeatureVector> out;
  out.reserve(3 * per_clip.size());
  for (const auto& clip : per_clip) {
    if (clip.pitch) out.push_back(*clip.pitch);
    out.push_back(clip.loudness);
    out.push_back(clip.timbre);
  }
  return out;
}

std::vector<report::PeakRow> corpus_peaks(const corpus::CorpusManifest& manifest, const PeakOptions& options,
                                          int threads) {
  const auto& entries = manifest.entries;
  return parallel_map<report::PeakRow>(entries.size(), threads, [&](std::size_t i) {
    const auto& e = entries[i];
    const features::ClipRef ref{e.label, e.source, e.sample_id};
    try {
      const auto clip = audio::load_canonical(e.file_path, options.sample_rate);
      const auto series = options.a_weighted ? dsp::a_weighted_rms(clip, options.frames)
                                             : dsp::rms_series(clip, options.frames);
      return report::PeakRow{ref, features::loudness_peak_metrics(series)};
    } catch (const InvalidInput& ex) {
      throw InvalidInput(e.label + "/" + e.source + "/" + e.sample_id + ": " + ex.what());
    }
  });
}

}  // namespace erakit::pipeline
