#pragma once

#include "erakit/audio_io.hpp"
#include "erakit/dsp.hpp"
#include "erakit/pitch.hpp"

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <string_view>

namespace erakit::features {

enum class Kind { kPitch, kLoudness, kTimbre };

std::string_view kind_name(Kind kind);
/// Throws ConfigError for unknown names.
Kind parse_kind(std::string_view name);
inline constexpr Kind kAllKinds[] = {Kind::kLoudness, Kind::kPitch, Kind::kTimbre};

struct ClipRef {
  std::string label;
  std::string source;
  std::string sample_id;

  auto operator<=>(const ClipRef&) const = default;
};

struct FeatureVector {
  Kind kind = Kind::kTimbre;
  Eigen::VectorXd values;
  ClipRef clip;

  Eigen::Index dim() const { return values.size(); }
};

/// Regression delta over a width-9 window with edge replication, applied row-wise.
Eigen::MatrixXd delta(const Eigen::Ref<const Eigen::MatrixXd>& series, int half_width = 4);

/// (mean, population std, min, max) per row of base, then d1, then d2. Length 12*K.
Eigen::VectorXd summarize_stats(const Eigen::Ref<const Eigen::MatrixXd>& base,
                                const Eigen::Ref<const Eigen::MatrixXd>& d1,
                                const Eigen::Ref<const Eigen::MatrixXd>& d2);

/// Convenience: summarize_stats(x, delta(x), delta(delta(x))).
Eigen::VectorXd summarize_with_deltas(const Eigen::Ref<const Eigen::MatrixXd>& series);

enum class PitchDeltaMode {
  kVoicedOnly,           // deltas on the concatenated voiced subsequence
  kInterpolateThenMask,  // deltas on a gap-interpolated track, stats over voiced frames
};

struct ExtractConfig {
  int sample_rate = audio::kCanonicalRate;
  int hop = 512;
  int frame_length = 2048;
  int n_mels = 128;
  int n_mfcc = 13;
  int rms_frame = 2048;
  double fmin = 65.4;
  double fmax = 2093.0;
  PitchDeltaMode pitch_deltas = PitchDeltaMode::kVoicedOnly;
};

struct ClipFeatures {
  std::optional<FeatureVector> pitch;  // absent when no frame is voiced
  FeatureVector loudness;
  FeatureVector timbre;
};

ClipFeatures assemble_feature_vectors(const audio::AudioClip& clip, const ExtractConfig& config,
                                      const ClipRef& ref = {});

/// Pitch statistics only; nullopt when the track has no voiced frame.
std::optional<Eigen::VectorXd> pitch_statistics(const pitch::F0Track& track, PitchDeltaMode mode);

struct PeakMetrics {
  double peak_time_s = 0.0;
  double relative_magnitude = 1.0;
};

/// Timing and salience of the loudest frame: argmax (earliest on ties) and max / mean.
PeakMetrics loudness_peak_metrics(const dsp::FrameSeries<double>& rms);

}  // namespace erakit::features
