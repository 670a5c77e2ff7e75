#include "erakit/features.hpp"

#include "erakit/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace erakit::features {

std::string_view kind_name(Kind kind) {
  switch (kind) {
    case Kind::kPitch: return "pitch";
    case Kind::kLoudness: return "loudness";
    case Kind::kTimbre: return "timbre";
  }
  return "unknown";
}

Kind parse_kind(std::string_view name) {
  if (name == "pitch") return Kind::kPitch;
  if (name == "loudness") return Kind::kLoudness;
  if (name == "timbre") return Kind::kTimbre;
  throw ConfigError("unknown feature kind '" + std::string(name) + "'");
}

Eigen::MatrixXd delta(const Eigen::Ref<const Eigen::MatrixXd>& series, int half_width) {
  const Eigen::Index frames = series.cols();
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(series.rows(), frames);
  if (frames == 0) return out;
  double denom = 0.0;
  for (int n = 1; n <= half_width; ++n) denom += 2.0 * n * n;
  for (Eigen::Index t = 0; t < frames; ++t) {
    for (int n = 1; n <= half_width; ++n) {
      const Eigen::Index ahead = std::min<Eigen::Index>(t + n, frames - 1);
      const Eigen::Index behind = std::max<Eigen::Index>(t - n, 0);
      out.col(t) += n * (series.col(ahead) - series.col(behind));
    }
  }
  return out / denom;
}

Eigen::VectorXd summarize_stats(const Eigen::Ref<const Eigen::MatrixXd>& base,
                                const Eigen::Ref<const Eigen::MatrixXd>& d1,
                                const Eigen::Ref<const Eigen::MatrixXd>& d2) {
  if (base.cols() == 0) throw InvalidInput("summary statistics need at least one frame");
  if (d1.rows() != base.rows() || d2.rows() != base.rows() || d1.cols() != base.cols() ||
      d2.cols() != base.cols()) {
    throw InvalidInput("summary statistics blocks disagree in shape");
  }
  const Eigen::Index rows = base.rows();
  Eigen::VectorXd out(12 * rows);
  Eigen::Index at = 0;
  for (const auto* block : {&base, &d1, &d2}) {
    for (Eigen::Index k = 0; k < rows; ++k) {
      const auto row = block->row(k).array();
      const double mean = row.mean();
      out[at++] = mean;
      out[at++] = std::sqrt((row - mean).square().mean());
      out[at++] = row.minCoeff();
      out[at++] = row.maxCoeff();
    }
  }
  return out;
}

Eigen::VectorXd summarize_with_deltas(const Eigen::Ref<const Eigen::MatrixXd>& series) {
  const Eigen::MatrixXd d1 = delta(series);
  const Eigen::MatrixXd d2 = delta(d1);
  return summarize_stats(series, d1, d2);
}

std::optional<Eigen::VectorXd> pitch_statistics(const pitch::F0Track& track, PitchDeltaMode mode) {
  if (track.voiced_count() == 0) return std::nullopt;
  const Eigen::VectorXd voiced = track.voiced_f0();
  if (mode == PitchDeltaMode::kVoicedOnly) return summarize_with_deltas(voiced.transpose());

  // Fill unvoiced gaps linearly between voiced neighbours, holding the ends.
  const Eigen::Index frames = track.frames();
  Eigen::RowVectorXd filled(frames);
  Eigen::Index prev = -1;
  for (Eigen::Index t = 0; t < frames; ++t) {
    if (!track.voiced[t]) continue;
    if (prev < 0) {
      filled.head(t + 1).setConstant(track.f0_hz[t]);
    } else {
      for (Eigen::Index g = prev + 1; g <= t; ++g) {
        const double w = static_cast<double>(g - prev) / static_cast<double>(t - prev);
        filled[g] = (1.0 - w) * track.f0_hz[prev] + w * track.f0_hz[t];
      }
    }
    prev = t;
  }
  filled.tail(frames - prev).setConstant(track.f0_hz[prev]);

  const Eigen::RowVectorXd d1 = delta(filled);
  const Eigen::RowVectorXd d2 = delta(d1);
  const Eigen::Index n = track.voiced_count();
  Eigen::RowVectorXd b0(n), b1(n), b2(n);
  Eigen::Index k = 0;
  for (Eigen::Index t = 0; t < frames; ++t) {
    if (!track.voiced[t]) continue;
    b0[k] = filled[t];
    b1[k] = d1[t];
    b2[k] = d2[t];
    ++k;
  }
  return summarize_stats(b0, b1, b2);
}

ClipFeatures assemble_feature_vectors(const audio::AudioClip& clip, const ExtractConfig& config,
                                      const ClipRef& ref) {
  const auto tag = [&ref](const std::string& what) {
    return ref.label.empty() ? what : ref.label + "/" + ref.source + "/" + ref.sample_id + ": " + what;
  };
  try {
    ClipFeatures out;

    const auto mfccs = dsp::mfcc(clip, {config.n_mfcc, config.n_mels, config.frame_length, config.hop});
    out.timbre = {Kind::kTimbre, summarize_with_deltas(mfccs.values), ref};

    const auto loudness = dsp::a_weighted_rms(clip, {config.rms_frame, config.hop});
    out.loudness = {Kind::kLoudness, summarize_with_deltas(loudness.values), ref};

    pitch::PyinConfig pitch_cfg;
    pitch_cfg.fmin = config.fmin;
    pitch_cfg.fmax = config.fmax;
    pitch_cfg.frame_length = config.frame_length;
    pitch_cfg.hop = config.hop;
    const auto track = pitch::pyin_track(clip, pitch_cfg);
    if (auto stats = pitch_statistics(track, config.pitch_deltas)) {
      out.pitch = FeatureVector{Kind::kPitch, std::move(*stats), ref};
    }
    return out;
  } catch (const ConfigError& e) {
    throw ConfigError(tag(e.what()));
  } catch (const InsufficientData& e) {
    throw InsufficientData(tag(e.what()));
  } catch (const Error& e) {
    throw InvalidInput(tag(e.what()));
  }
}

PeakMetrics loudness_peak_metrics(const dsp::FrameSeries<double>& rms) {
  if (rms.frames() == 0 || rms.rows() != 1) throw InvalidInput("peak metrics need a non-empty 1 x T series");
  const auto row = rms.values.row(0);
  const double mean = row.mean();
  if (!(mean > 0.0)) return {0.0, 1.0};
  Eigen::Index peak = 0;
  for (Eigen::Index t = 1; t < row.size(); ++t) {
    if (row[t] > row[peak]) peak = t;
  }
  return {rms.frame_time(peak), row[peak] / mean};
}

}  // namespace erakit::features
