#pragma once

#include "erakit/audio_io.hpp"

#include <Eigen/Dense>

#include <span>

namespace erakit::pitch {

/// Cumulative-mean-normalized difference function of one frame.
///
/// Returns d'(tau) for tau = 0..tau_max (index 0 is defined as 1). The raw
/// difference d(tau) is summed over the first floor(frame.size()/2) samples, so
/// the frame must hold at least 2*tau_max samples. Where the running sum of d is
/// zero, d' is 1.
Eigen::VectorXd cmnd(std::span<const double> frame, int tau_max);

struct PyinConfig {
  double fmin = 65.4;
  double fmax = 2093.0;
  int frame_length = 2048;
  int hop = 512;

  int n_thresholds = 100;
  int beta_a = 2;  // threshold prior Beta(a, b)
  int beta_b = 18;
  double boltzmann = 2.0;       // prior over trough order, favoring short periods
  double no_trough_prob = 0.01;  // mass given to the global minimum when no trough passes

  int bins_per_semitone = 20;
  double max_step_cents = 35.0;  // pitch-state transition band per frame
  double switch_prob = 0.01;     // voiced <-> unvoiced
};

/// Per-frame pitch track; f0_hz is NaN on unvoiced frames.
struct F0Track {
  Eigen::VectorXd f0_hz;
  Eigen::Array<bool, Eigen::Dynamic, 1> voiced;
  Eigen::VectorXd voiced_prob;
  int hop = 512;
  int frame_length = 2048;
  int sample_rate = audio::kCanonicalRate;

  Eigen::Index frames() const { return f0_hz.size(); }
  Eigen::Index voiced_count() const { return voiced.count(); }
  double voiced_fraction() const {
    return frames() > 0 ? static_cast<double>(voiced_count()) / static_cast<double>(frames()) : 0.0;
  }
  /// f0 of voiced frames in time order.
  Eigen::VectorXd voiced_f0() const;
};

/// Frame count matches the spectral kernels: 1 + floor(n / hop), centered frames.
F0Track pyin_track(const audio::AudioClip& clip, const PyinConfig& cfg = {});

/// Regularized incomplete beta I_x(a, b) for positive integer a, b.
double beta_cdf(double x, int a, int b);

}  // namespace erakit::pitch
