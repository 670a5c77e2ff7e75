#pragma once

// Spectral kernels: STFT power, mel filterbank, MFCC, A-weighting and framewise RMS.
//
// All kernels use the centered-frame convention: the signal is reflect-padded by
// n_fft/2 on both sides, frame t starts at padded index t*hop, and its time stamp
// is t*hop/sample_rate. A signal of n samples therefore yields 1 + floor(n/hop)
// frames.

#include "erakit/audio_io.hpp"
#include "erakit/error.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

namespace erakit::dsp {

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// K rows x T frames of framewise values.
template <typename Scalar>
struct FrameSeries {
  Matrix<Scalar> values;
  int hop = 512;
  int frame_length = 2048;
  int sample_rate = audio::kCanonicalRate;

  Eigen::Index frames() const { return values.cols(); }
  Eigen::Index rows() const { return values.rows(); }
  Scalar frame_time(Eigen::Index t) const {
    return static_cast<Scalar>(t) * static_cast<Scalar>(hop) / static_cast<Scalar>(sample_rate);
  }
};

/// FrameSeries with K = n_fft/2 + 1 bin powers; bin k sits at k*sr/n_fft Hz.
template <typename Scalar>
using PowerSpectrogram = FrameSeries<Scalar>;

struct FrameConfig {
  int frame_length = 2048;
  int hop = 512;
};

inline bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

inline int next_power_of_two(int n) {
  int p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline Eigen::Index frame_count(Eigen::Index n_samples, int hop) { return 1 + n_samples / hop; }

/// numpy-style "reflect" index (edge sample not repeated), for any integer offset.
inline Eigen::Index reflect_index(Eigen::Index i, Eigen::Index n) {
  if (n == 1) return 0;
  const Eigen::Index period = 2 * (n - 1);
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - i;
}

template <typename Scalar>
Vector<Scalar> hann_periodic(int n) {
  Vector<Scalar> w(n);
  for (int i = 0; i < n; ++i) {
    w[i] = static_cast<Scalar>(0.5) -
           static_cast<Scalar>(0.5) * std::cos(2 * std::numbers::pi_v<Scalar> * i / static_cast<Scalar>(n));
  }
  return w;
}

template <typename Scalar>
Vector<Scalar> center_pad_reflect(const Eigen::Ref<const Vector<Scalar>>& x, Eigen::Index pad) {
  const Eigen::Index n = x.size();
  Vector<Scalar> out(n + 2 * pad);
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] = x[reflect_index(i - pad, n)];
  return out;
}

namespace detail {

inline void check_frames(Eigen::Index n_samples, int frame_length, int hop) {
  if (n_samples == 0) throw InvalidInput("empty clip");
  if (frame_length < 2) throw ConfigError("frame length must be at least 2");
  if (hop <= 0 || hop > frame_length) {
    throw ConfigError("hop must be in [1, frame_length], got " + std::to_string(hop));
  }
}

/// Power spectrogram with a Hann window of win_length centered inside an n_fft frame.
template <typename Scalar>
PowerSpectrogram<Scalar> power_frames(const Eigen::Ref<const Vector<Scalar>>& samples, int sample_rate,
                                      int win_length, int n_fft, int hop) {
  check_frames(samples.size(), win_length, hop);
  const Vector<Scalar> padded = center_pad_reflect<Scalar>(samples, n_fft / 2);
  const Vector<Scalar> window = hann_periodic<Scalar>(win_length);
  const int offset = (n_fft - win_length) / 2;
  const Eigen::Index frames = frame_count(samples.size(), hop);
  const int bins = n_fft / 2 + 1;

  PowerSpectrogram<Scalar> out;
  out.hop = hop;
  out.frame_length = n_fft;
  out.sample_rate = sample_rate;
  out.values.resize(bins, frames);

  Eigen::FFT<Scalar> fft;
  fft.SetFlag(Eigen::FFT<Scalar>::HalfSpectrum);
  std::vector<Scalar> frame(n_fft, Scalar(0));
  std::vector<std::complex<Scalar>> spectrum;
  for (Eigen::Index t = 0; t < frames; ++t) {
    const Eigen::Index start = t * hop;
    for (int i = 0; i < win_length; ++i) frame[offset + i] = padded[start + offset + i] * window[i];
    fft.fwd(spectrum, frame);
    for (int k = 0; k < bins; ++k) out.values(k, t) = std::norm(spectrum[k]);
  }
  return out;
}

}  // namespace detail

/// |STFT|^2 with a periodic Hann window and reflect center padding.
template <typename Scalar>
PowerSpectrogram<Scalar> stft_power(const Eigen::Ref<const Vector<Scalar>>& samples, int sample_rate,
                                    FrameConfig cfg = {}) {
  if (!is_power_of_two(cfg.frame_length)) {
    throw ConfigError("frame length must be a power of two, got " + std::to_string(cfg.frame_length));
  }
  return detail::power_frames<Scalar>(samples, sample_rate, cfg.frame_length, cfg.frame_length, cfg.hop);
}

inline PowerSpectrogram<double> stft_power(const audio::AudioClip& clip, FrameConfig cfg = {}) {
  return stft_power<double>(clip.samples, clip.sample_rate, cfg);
}

/// Windowed frame energy sum((w*x)^2) recovered from one column of one-sided bin powers.
template <typename Derived>
typename Derived::Scalar windowed_energy_from_power(const Eigen::MatrixBase<Derived>& column) {
  const Eigen::Index bins = column.size();
  const Eigen::Index n_fft = 2 * (bins - 1);
  const auto interior = column.segment(1, bins - 2).sum();
  return (column(0) + 2 * interior + column(bins - 1)) / static_cast<typename Derived::Scalar>(n_fft);
}

template <typename Scalar>
Scalar hz_to_mel(Scalar f) {
  return Scalar(2595) * std::log10(Scalar(1) + f / Scalar(700));
}

template <typename Scalar>
Scalar mel_to_hz(Scalar m) {
  return Scalar(700) * (std::pow(Scalar(10), m / Scalar(2595)) - Scalar(1));
}

/// Triangular filters with peaks equally spaced on the HTK mel scale, each scaled
/// by 2 / (upper edge - lower edge). Shape n_mels x (n_fft/2 + 1).
template <typename Scalar>
Matrix<Scalar> mel_filterbank(int n_mels, int sample_rate, int n_fft = 2048, Scalar f_lo = 0,
                              Scalar f_hi = -1) {
  if (f_hi < 0) f_hi = static_cast<Scalar>(sample_rate) / 2;
  if (n_mels < 2) throw ConfigError("n_mels must be at least 2");
  if (!(f_lo >= 0 && f_lo < f_hi && f_hi <= static_cast<Scalar>(sample_rate) / 2)) {
    throw ConfigError("mel band edges must satisfy 0 <= f_lo < f_hi <= sr/2");
  }
  const int bins = n_fft / 2 + 1;
  const Scalar bin_hz = static_cast<Scalar>(sample_rate) / static_cast<Scalar>(n_fft);

  const Scalar mel_lo = hz_to_mel(f_lo);
  const Scalar mel_hi = hz_to_mel(f_hi);
  Vector<Scalar> edges(n_mels + 2);
  for (int i = 0; i < n_mels + 2; ++i) {
    edges[i] = mel_to_hz(mel_lo + (mel_hi - mel_lo) * static_cast<Scalar>(i) / static_cast<Scalar>(n_mels + 1));
  }

  Matrix<Scalar> fb = Matrix<Scalar>::Zero(n_mels, bins);
  for (int m = 0; m < n_mels; ++m) {
    const Scalar lower = edges[m];
    const Scalar center = edges[m + 1];
    const Scalar upper = edges[m + 2];
    if (upper - lower < bin_hz) {
      throw ConfigError("mel filter " + std::to_string(m) + " spans less than one FFT bin; reduce n_mels");
    }
    const Scalar norm = Scalar(2) / (upper - lower);
    for (int k = 0; k < bins; ++k) {
      const Scalar f = bin_hz * static_cast<Scalar>(k);
      const Scalar rise = (f - lower) / (center - lower);
      const Scalar fall = (upper - f) / (upper - center);
      fb(m, k) = std::max(Scalar(0), std::min(rise, fall)) * norm;
    }
    if (fb.row(m).sum() <= 0) {
      throw ConfigError("mel filter " + std::to_string(m) + " covers no FFT bin; reduce n_mels");
    }
  }
  return fb;
}

/// Orthonormal DCT-II basis, n_out x n_in.
template <typename Scalar>
Matrix<Scalar> dct_ortho(int n_out, int n_in) {
  Matrix<Scalar> d(n_out, n_in);
  const Scalar pi = std::numbers::pi_v<Scalar>;
  for (int k = 0; k < n_out; ++k) {
    const Scalar s = k == 0 ? std::sqrt(Scalar(1) / n_in) : std::sqrt(Scalar(2) / n_in);
    for (int n = 0; n < n_in; ++n) d(k, n) = s * std::cos(pi * k * (2 * n + 1) / (2 * Scalar(n_in)));
  }
  return d;
}

struct MfccConfig {
  int n_mfcc = 13;
  int n_mels = 128;
  int frame_length = 2048;
  int hop = 512;
};

inline constexpr double kLogFloor = 1e-10;

template <typename Scalar>
FrameSeries<Scalar> mfcc(const Eigen::Ref<const Vector<Scalar>>& samples, int sample_rate, MfccConfig cfg = {}) {
  if (cfg.n_mfcc < 1 || cfg.n_mfcc > cfg.n_mels) throw ConfigError("n_mfcc must be in [1, n_mels]");
  const auto power = stft_power<Scalar>(samples, sample_rate, {cfg.frame_length, cfg.hop});
  const Matrix<Scalar> fb = mel_filterbank<Scalar>(cfg.n_mels, sample_rate, cfg.frame_length);
  const Matrix<Scalar> log_mel =
      (fb * power.values).array().max(static_cast<Scalar>(kLogFloor)).log10() * Scalar(10);

  FrameSeries<Scalar> out;
  out.hop = cfg.hop;
  out.frame_length = cfg.frame_length;
  out.sample_rate = sample_rate;
  out.values = dct_ortho<Scalar>(cfg.n_mfcc, cfg.n_mels) * log_mel;
  return out;
}

inline FrameSeries<double> mfcc(const audio::AudioClip& clip, MfccConfig cfg = {}) {
  return mfcc<double>(clip.samples, clip.sample_rate, cfg);
}

/// IEC 61672 A-weighting in dB.
template <typename Scalar>
Scalar a_weight_gain(Scalar f) {
  if (!(f > 0)) throw InvalidInput("A-weighting is defined for f > 0 only");
  const Scalar f2 = f * f;
  const Scalar c1 = Scalar(20.6) * Scalar(20.6);
  const Scalar c2 = Scalar(107.7) * Scalar(107.7);
  const Scalar c3 = Scalar(737.9) * Scalar(737.9);
  const Scalar c4 = Scalar(12194) * Scalar(12194);
  const Scalar ra = c4 * f2 * f2 / ((f2 + c1) * std::sqrt((f2 + c2) * (f2 + c3)) * (f2 + c4));
  return Scalar(20) * std::log10(ra) + Scalar(2);
}

/// Framewise A-weighted RMS. A frame_length that is not a power of two is
/// zero-padded to the next power of two for the transform.
template <typename Scalar>
FrameSeries<Scalar> a_weighted_rms(const Eigen::Ref<const Vector<Scalar>>& samples, int sample_rate,
                                   FrameConfig cfg = {}) {
  const int n_fft = next_power_of_two(cfg.frame_length);
  const auto power = detail::power_frames<Scalar>(samples, sample_rate, cfg.frame_length, n_fft, cfg.hop);
  const Eigen::Index bins = power.values.rows();

  // Squared linear gain per bin; interior bins doubled for the one-sided spectrum.
  Vector<Scalar> weight(bins);
  weight[0] = 0;
  for (Eigen::Index k = 1; k < bins; ++k) {
    const Scalar f = static_cast<Scalar>(k) * static_cast<Scalar>(sample_rate) / static_cast<Scalar>(n_fft);
    const Scalar g = std::pow(Scalar(10), a_weight_gain(f) / Scalar(20));
    weight[k] = g * g * (k == bins - 1 ? Scalar(1) : Scalar(2));
  }
  const Scalar window_energy = hann_periodic<Scalar>(cfg.frame_length).squaredNorm();
  const Scalar norm = static_cast<Scalar>(n_fft) * window_energy;

  FrameSeries<Scalar> out;
  out.hop = cfg.hop;
  out.frame_length = cfg.frame_length;
  out.sample_rate = sample_rate;
  out.values = ((weight.transpose() * power.values) / norm).array().max(Scalar(0)).sqrt().matrix();
  return out;
}

inline FrameSeries<double> a_weighted_rms(const audio::AudioClip& clip, FrameConfig cfg = {}) {
  return a_weighted_rms<double>(clip.samples, clip.sample_rate, cfg);
}

/// Time-domain framewise RMS over reflect-padded, centered frames.
template <typename Scalar>
FrameSeries<Scalar> rms_series(const Eigen::Ref<const Vector<Scalar>>& samples, int sample_rate,
                               FrameConfig cfg = {}) {
  detail::check_frames(samples.size(), cfg.frame_length, cfg.hop);
  if (cfg.frame_length % 2 != 0) throw ConfigError("RMS frame length must be even");
  const Vector<Scalar> padded = center_pad_reflect<Scalar>(samples, cfg.frame_length / 2);
  const Eigen::Index frames = frame_count(samples.size(), cfg.hop);

  FrameSeries<Scalar> out;
  out.hop = cfg.hop;
  out.frame_length = cfg.frame_length;
  out.sample_rate = sample_rate;
  out.values.resize(1, frames);
  for (Eigen::Index t = 0; t < frames; ++t) {
    out.values(0, t) = std::sqrt(padded.segment(t * cfg.hop, cfg.frame_length).squaredNorm() /
                                 static_cast<Scalar>(cfg.frame_length));
  }
  return out;
}

inline FrameSeries<double> rms_series(const audio::AudioClip& clip, FrameConfig cfg = {}) {
  return rms_series<double>(clip.samples, clip.sample_rate, cfg);
}

}  // namespace erakit::dsp
