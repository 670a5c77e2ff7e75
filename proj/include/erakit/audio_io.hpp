#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace erakit::audio {

inline constexpr int kCanonicalRate = 22050;

/// Decoded audio before canonicalization: one row per channel, native rate.
struct RawAudio {
  Eigen::MatrixXd channels;  // channels x samples
  int sample_rate = 0;

  Eigen::Index channel_count() const { return channels.rows(); }
  Eigen::Index frame_count() const { return channels.cols(); }
};

/// Mono clip with samples in [-1, 1].
struct AudioClip {
  Eigen::VectorXd samples;
  int sample_rate = kCanonicalRate;

  double duration_s() const {
    return sample_rate > 0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
};

enum class WavEncoding { kPcm16, kPcm24, kFloat32 };

/// Parses a RIFF/WAVE byte stream. Accepts PCM 16/24-bit and IEEE float-32,
/// including WAVE_FORMAT_EXTENSIBLE wrappers of those.
RawAudio decode_wav(std::span<const std::uint8_t> bytes);

/// Writes interleaved RIFF/WAVE. Integer encodings are rounded and clipped.
std::vector<std::uint8_t> encode_wav(const RawAudio& audio, WavEncoding encoding);

RawAudio read_wav_file(const std::filesystem::path& path);
void write_wav_file(const std::filesystem::path& path, const RawAudio& audio,
                    WavEncoding encoding = WavEncoding::kFloat32);

/// Arithmetic mean across channels.
RawAudio mixdown(const RawAudio& raw);

/// Band-limited resampling of mono audio with a Kaiser-windowed sinc kernel.
/// Output length is round(n * target / native); output is clamped to [-1, 1].
AudioClip resample(const RawAudio& mono, int target_rate);

/// decode -> mixdown -> resample.
AudioClip load_canonical(const std::filesystem::path& path, int target_rate = kCanonicalRate);

}  // namespace erakit::audio
