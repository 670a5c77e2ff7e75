#include "erakit/pitch.hpp"

#include "erakit/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace erakit::pitch {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double p) { return p > 0.0 ? std::log(p) : kNegInf; }

double boltzmann_pmf(int k, double lambda, int n) {
  return (1.0 - std::exp(-lambda)) * std::exp(-lambda * k) / (1.0 - std::exp(-lambda * n));
}

/// Candidate periods and probabilities for one frame, binned on the pitch grid.
class CandidateModel {
 public:
  CandidateModel(const PyinConfig& cfg, int sample_rate)
      : cfg_(cfg), sample_rate_(sample_rate) {
    threshold_probs_.resize(cfg.n_thresholds);
    double prev = 0.0;
    for (int i = 1; i <= cfg.n_thresholds; ++i) {
      const double cdf = beta_cdf(static_cast<double>(i) / cfg.n_thresholds, cfg.beta_a, cfg.beta_b);
      threshold_probs_[i - 1] = cdf - prev;
      prev = cdf;
    }
    min_period_ = std::max(1, static_cast<int>(std::floor(sample_rate / cfg.fmax)));
    max_period_ = static_cast<int>(std::ceil(sample_rate / cfg.fmin));
    bins_ = static_cast<int>(std::floor(12.0 * cfg.bins_per_semitone * std::log2(cfg.fmax / cfg.fmin))) + 1;
  }

  int bins() const { return bins_; }
  int max_period() const { return max_period_; }

  double bin_frequency(int bin) const {
    return cfg_.fmin * std::exp2(static_cast<double>(bin) / (12.0 * cfg_.bins_per_semitone));
  }

  /// Adds candidate mass into `observation` (length bins); returns the total.
  double accumulate(const Eigen::VectorXd& dprime, std::vector<double>& observation) const {
    std::fill(observation.begin(), observation.end(), 0.0);
    const int lo = min_period_;
    const int hi = max_period_;
    const int span = hi - lo + 1;

    std::vector<int> troughs;
    for (int i = 0; i < span; ++i) {
      const int tau = lo + i;
      const double y = dprime[tau];
      bool is_trough;
      if (i == 0) {
        is_trough = span > 1 && y < dprime[tau + 1];
      } else if (i == span - 1) {
        is_trough = y < dprime[tau - 1];
      } else {
        is_trough = y < dprime[tau - 1] && y <= dprime[tau + 1];
      }
      if (is_trough) troughs.push_back(tau);
    }
    if (troughs.empty()) return 0.0;

    const int n_troughs = static_cast<int>(troughs.size());
    std::vector<double> probs(n_troughs, 0.0);
    for (int t = 0; t < cfg_.n_thresholds; ++t) {
      const double threshold = static_cast<double>(t + 1) / cfg_.n_thresholds;
      int below = 0;
      for (int tau : troughs) below += dprime[tau] < threshold;
      if (below == 0) continue;
      int position = 0;
      for (int j = 0; j < n_troughs; ++j) {
        if (dprime[troughs[j]] < threshold) {
          probs[j] += boltzmann_pmf(position++, cfg_.boltzmann, below) * threshold_probs_[t];
        }
      }
    }

    int global_min = 0;
    for (int j = 1; j < n_troughs; ++j) {
      if (dprime[troughs[j]] < dprime[troughs[global_min]]) global_min = j;
    }
    double mass_below_min = 0.0;
    for (int t = 0; t < cfg_.n_thresholds; ++t) {
      if (static_cast<double>(t + 1) / cfg_.n_thresholds <= dprime[troughs[global_min]]) {
        mass_below_min += threshold_probs_[t];
      }
    }
    probs[global_min] += cfg_.no_trough_prob * mass_below_min;

    double total = 0.0;
    for (int j = 0; j < n_troughs; ++j) {
      const int tau = troughs[j];
      const double period = tau + parabolic_shift(dprime, tau);
      const double f0 = sample_rate_ / period;
      const double pos = 12.0 * cfg_.bins_per_semitone * std::log2(f0 / cfg_.fmin);
      const int bin = std::clamp(static_cast<int>(std::lround(pos)), 0, bins_ - 1);
      observation[bin] += probs[j];
      total += probs[j];
    }
    return total;
  }

 private:
  static double parabolic_shift(const Eigen::VectorXd& y, int tau) {
    if (tau < 1 || tau + 1 >= y.size()) return 0.0;
    const double a = y[tau - 1];
    const double b = y[tau];
    const double c = y[tau + 1];
    const double denom = a - 2.0 * b + c;
    if (std::abs(denom) < 1e-12) return 0.0;
    return std::clamp(0.5 * (a - c) / denom, -1.0, 1.0);
  }

  PyinConfig cfg_;
  double sample_rate_;
  std::vector<double> threshold_probs_;
  int min_period_ = 1;
  int max_period_ = 1;
  int bins_ = 1;
};

/// Row-normalized triangular transition band over pitch bins, in log domain.
struct PitchTransitions {
  int width = 0;
  std::vector<double> log_row_norm;  // per source bin

  PitchTransitions(int bins, int band) : width(band), log_row_norm(bins) {
    for (int i = 0; i < bins; ++i) {
      double z = 0.0;
      for (int j = std::max(0, i - band); j <= std::min(bins - 1, i + band); ++j) z += band + 1 - std::abs(i - j);
      log_row_norm[i] = std::log(z);
    }
  }

  double log_prob(int from, int to) const {
    return std::log(static_cast<double>(width + 1 - std::abs(from - to))) - log_row_norm[from];
  }
};

}  // namespace

double beta_cdf(double x, int a, int b) {
  if (a < 1 || b < 1) throw ConfigError("beta_cdf requires positive integer shape parameters");
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  // I_x(a, b) = sum_{j=a}^{n} C(n, j) x^j (1-x)^(n-j), n = a + b - 1.
  const int n = a + b - 1;
  double sum = 0.0;
  for (int j = a; j <= n; ++j) {
    const double log_binom = std::lgamma(n + 1.0) - std::lgamma(j + 1.0) - std::lgamma(n - j + 1.0);
    sum += std::exp(log_binom + j * std::log(x) + (n - j) * std::log1p(-x));
  }
  return std::min(1.0, sum);
}

Eigen::VectorXd cmnd(std::span<const double> frame, int tau_max) {
  if (tau_max < 1) throw InvalidInput("cmnd requires tau_max >= 1");
  if (frame.size() < 2 * static_cast<std::size_t>(tau_max)) {
    throw InvalidInput("frame of " + std::to_string(frame.size()) + " samples is too short for tau_max " +
                       std::to_string(tau_max));
  }
  const std::size_t window = frame.size() / 2;
  Eigen::VectorXd out(tau_max + 1);
  out[0] = 1.0;
  double running = 0.0;
  for (int tau = 1; tau <= tau_max; ++tau) {
    double d = 0.0;
    const double* x = frame.data();
    const double* y = frame.data() + tau;
    for (std::size_t j = 0; j < window; ++j) {
      const double diff = x[j] - y[j];
      d += diff * diff;
    }
    running += d;
    out[tau] = running > 0.0 ? d * tau / running : 1.0;
  }
  return out;
}

Eigen::VectorXd F0Track::voiced_f0() const {
  Eigen::VectorXd out(voiced_count());
  Eigen::Index k = 0;
  for (Eigen::Index t = 0; t < frames(); ++t) {
    if (voiced[t]) out[k++] = f0_hz[t];
  }
  return out;
}

F0Track pyin_track(const audio::AudioClip& clip, const PyinConfig& cfg) {
  if (!(cfg.fmin > 0.0 && cfg.fmin < cfg.fmax)) throw ConfigError("pitch range requires 0 < fmin < fmax");
  if (cfg.hop <= 0 || cfg.frame_length < 2) throw ConfigError("invalid pitch frame configuration");
  if (cfg.n_thresholds < 1 || cfg.bins_per_semitone < 1) throw ConfigError("invalid pitch model configuration");
  if (clip.samples.size() < cfg.frame_length) {
    throw InvalidInput("clip of " + std::to_string(clip.samples.size()) + " samples is shorter than one " +
                       std::to_string(cfg.frame_length) + "-sample pitch frame");
  }

  const CandidateModel model(cfg, clip.sample_rate);
  // Neighbours of the longest period are needed for interpolation.
  const int tau_max = model.max_period() + 1;
  if (2 * tau_max > cfg.frame_length) {
    throw ConfigError("fmin " + std::to_string(cfg.fmin) + " Hz needs a longer pitch frame than " +
                      std::to_string(cfg.frame_length));
  }

  const Eigen::Index n = clip.samples.size();
  const Eigen::Index frames = 1 + n / cfg.hop;
  const Eigen::Index pad = cfg.frame_length / 2;
  Eigen::VectorXd padded = Eigen::VectorXd::Zero(n + 2 * pad);
  padded.segment(pad, n) = clip.samples;

  const int bins = model.bins();
  const int states = 2 * bins;  // [0, bins) voiced, [bins, 2*bins) unvoiced

  // Emission log-probabilities, states x frames.
  Eigen::MatrixXd log_obs(states, frames);
  Eigen::VectorXd voiced_prob(frames);
  std::vector<double> observation(bins);
  for (Eigen::Index t = 0; t < frames; ++t) {
    const std::span<const double> frame(padded.data() + t * cfg.hop, static_cast<std::size_t>(cfg.frame_length));
    const Eigen::VectorXd dprime = cmnd(frame, tau_max);
    const double mass = std::clamp(model.accumulate(dprime, observation), 0.0, 1.0);
    voiced_prob[t] = mass;
    const double unvoiced = safe_log((1.0 - mass) / bins);
    for (int b = 0; b < bins; ++b) {
      log_obs(b, t) = safe_log(observation[b]);
      log_obs(bins + b, t) = unvoiced;
    }
  }

  const int band = std::max(0, static_cast<int>(std::lround(cfg.max_step_cents * cfg.bins_per_semitone / 100.0)));
  const PitchTransitions pitch_tx(bins, band);
  const double log_stay = std::log(1.0 - cfg.switch_prob);
  const double log_switch = safe_log(cfg.switch_prob);

  // Viterbi. Ties resolve to the lowest state index.
  Eigen::VectorXd delta = log_obs.col(0).array() + std::log(1.0 / states);
  Eigen::Matrix<std::int32_t, Eigen::Dynamic, Eigen::Dynamic> back(states, frames);
  Eigen::VectorXd next(states);
  std::vector<double> best_into(states);
  std::vector<std::int32_t> arg_into(states);
  for (Eigen::Index t = 1; t < frames; ++t) {
    // Best predecessor pitch bin within each voicing layer.
    for (int layer = 0; layer < 2; ++layer) {
      const int base = layer * bins;
      for (int j = 0; j < bins; ++j) {
        double best = kNegInf;
        int arg = base + std::max(0, j - band);
        for (int i = std::max(0, j - band); i <= std::min(bins - 1, j + band); ++i) {
          const double v = delta[base + i] + pitch_tx.log_prob(i, j);
          if (v > best) {
            best = v;
            arg = base + i;
          }
        }
        best_into[base + j] = best;
        arg_into[base + j] = arg;
      }
    }
    for (int layer = 0; layer < 2; ++layer) {
      for (int j = 0; j < bins; ++j) {
        const int same = layer * bins + j;
        const int other = (1 - layer) * bins + j;
        const double from_same = best_into[same] + log_stay;
        const double from_other = best_into[other] + log_switch;
        const bool take_other = from_other > from_same || (from_other == from_same && other < same);
        next[same] = (take_other ? from_other : from_same) + log_obs(same, t);
        back(same, t) = take_other ? arg_into[other] : arg_into[same];
      }
    }
    delta.swap(next);
  }

  Eigen::Index state = 0;
  delta.maxCoeff(&state);

  F0Track track;
  track.hop = cfg.hop;
  track.frame_length = cfg.frame_length;
  track.sample_rate = clip.sample_rate;
  track.f0_hz.resize(frames);
  track.voiced.resize(frames);
  track.voiced_prob = voiced_prob;
  for (Eigen::Index t = frames - 1; t >= 0; --t) {
    const bool is_voiced = state < bins;
    track.voiced[t] = is_voiced;
    track.f0_hz[t] = is_voiced ? model.bin_frequency(static_cast<int>(state))
                               : std::numeric_limits<double>::quiet_NaN();
    if (t > 0) state = back(state, t);
  }
  return track;
}

}  // namespace erakit::pitch
