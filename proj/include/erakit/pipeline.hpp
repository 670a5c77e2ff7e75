#pragma once

#include "erakit/corpus.hpp"
#include "erakit/features.hpp"
#include "erakit/report.hpp"

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace erakit::pipeline {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Results land at their
/// own index, so output never depends on scheduling. If any call throws, the
/// exception of the lowest failing index is rethrown after all workers finish.
template <typename Result>
std::vector<Result> parallel_map(std::size_t n, int threads, const std::function<Result(std::size_t)>& fn) {
  std::vector<Result> results(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const auto count = static_cast<std::size_t>(std::max(1, threads));
  std::vector<std::thread> pool;
  for (std::size_t w = 1; w < std::min(count, n); ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

/// Feature vectors for every manifest entry, in manifest order; absent pitch
/// vectors are skipped.
std::vector<features::FeatureVector> extract_corpus(const corpus::CorpusManifest& manifest,
                                                    const features::ExtractConfig& config, int threads = 1);

struct PeakOptions {
  int sample_rate = audio::kCanonicalRate;
  dsp::FrameConfig frames{};
  bool a_weighted = false;
};

std::vector<report::PeakRow> corpus_peaks(const corpus::CorpusManifest& manifest, const PeakOptions& options,
                                          int threads = 1);

}  // namespace erakit::pipeline
