#include "erakit/error.hpp"
#include "erakit/pitch.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <vector>

using namespace erakit;
using namespace erakit::testing;

namespace {

constexpr int kRate = 22050;

Eigen::VectorXd brute_force_cmnd(const Eigen::VectorXd& frame, int tau_max) {
  const Eigen::Index window = frame.size() / 2;
  Eigen::VectorXd d(tau_max + 1);
  for (int tau = 0; tau <= tau_max; ++tau) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < window; ++j) sum += std::pow(frame[j] - frame[j + tau], 2);
    d[tau] = sum;
  }
  Eigen::VectorXd out(tau_max + 1);
  out[0] = 1.0;
  for (int tau = 1; tau <= tau_max; ++tau) {
    const double running = d.segment(1, tau).sum();
    out[tau] = running > 0 ? d[tau] * tau / running : 1.0;
  }
  return out;
}

double median(Eigen::VectorXd v) {
  std::sort(v.begin(), v.end());
  const Eigen::Index n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::span<const double> as_span(const Eigen::VectorXd& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }

}  // namespace

TEST_CASE("cmnd agrees with the brute-force definition") {
  const Eigen::VectorXd frame = sine(150.0, 2048.0 / kRate, kRate, 0.5) + white_noise(2048, 3, 0.05);
  const auto fast = pitch::cmnd(as_span(frame), 400);
  const auto oracle = brute_force_cmnd(frame, 400);
  CHECK((fast - oracle).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("cmnd minimum sits at the period of a 100 Hz sine") {
  const Eigen::VectorXd frame = sine(100.0, 2048.0 / kRate, kRate);
  const auto oracle = brute_force_cmnd(frame, 400);
  Eigen::Index oracle_argmin = 0;
  oracle.tail(400).minCoeff(&oracle_argmin);
  const auto d = pitch::cmnd(as_span(frame), 400);
  Eigen::Index argmin = 0;
  d.tail(400).minCoeff(&argmin);
  const Eigen::Index tau = argmin + 1;
  CHECK((tau == 220 || tau == 221));
  CHECK(argmin == oracle_argmin);
}

TEST_CASE("cmnd of a constant frame is identically one") {
  const Eigen::VectorXd frame = Eigen::VectorXd::Constant(1024, 0.3);
  CHECK((pitch::cmnd(as_span(frame), 300).array() == 1.0).all());
}

TEST_CASE("cmnd of white noise shows no periodicity") {
  int above = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const Eigen::VectorXd frame = white_noise(2048, 1000 + seed);
    above += pitch::cmnd(as_span(frame), 338).tail(338).minCoeff() > 0.3;
  }
  CHECK(above == 100);
}

TEST_CASE("cmnd rejects short frames") {
  const Eigen::VectorXd frame = Eigen::VectorXd::Zero(100);
  CHECK_THROWS_AS(pitch::cmnd(as_span(frame), 51), InvalidInput);
  CHECK_NOTHROW(pitch::cmnd(as_span(frame), 50));
}

TEST_CASE("beta threshold prior matches numerical integration") {
  // Beta(2, 18) density is 342 x (1-x)^17.
  for (double x : {0.05, 0.1, 0.2, 0.5}) {
    const int steps = 20000;
    double integral = 0.0;
    for (int i = 0; i < steps; ++i) {
      const double u = (i + 0.5) * x / steps;
      integral += 342.0 * u * std::pow(1.0 - u, 17) * x / steps;
    }
    CHECK(pitch::beta_cdf(x, 2, 18) == doctest::Approx(integral).epsilon(1e-6));
  }
  CHECK(pitch::beta_cdf(0.0, 2, 18) == 0.0);
  CHECK(pitch::beta_cdf(1.0, 2, 18) == 1.0);
}

TEST_CASE("pyin tracks a 440 Hz sine") {
  const auto track = pitch::pyin_track(clip_of(sine(440.0, 3.0, kRate, 0.5)));
  CHECK(track.frames() == 1 + 3 * kRate / 512);
  CHECK(track.voiced_fraction() >= 0.9);
  const double m = median(track.voiced_f0());
  CHECK(m >= 438.7);
  CHECK(m <= 441.3);
}

TEST_CASE("pyin finds nothing in digital silence") {
  const auto track = pitch::pyin_track(clip_of(Eigen::VectorXd::Zero(10 * kRate)));
  CHECK(track.voiced_count() == 0);
  CHECK(track.voiced_f0().size() == 0);
  CHECK((track.voiced_prob.array() == 0.0).all());
}

TEST_CASE("pyin on a tone followed by silence") {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(4 * kRate);
  x.head(2 * kRate) = sine(220.0, 2.0, kRate, 0.5);
  const auto track = pitch::pyin_track(clip_of(x));
  const Eigen::Index half = track.frames() / 2;
  const Eigen::Index first = track.voiced.head(half).count();
  const Eigen::Index second = track.voiced.tail(track.frames() - half).count();
  CHECK(first >= static_cast<Eigen::Index>(0.9 * half));
  CHECK(second <= 3);
  CHECK(std::abs(cents(median(track.voiced_f0()), 220.0)) <= 10.0);
}

TEST_CASE("pyin has no systematic octave errors on pure tones") {
  for (double f : {70.0, 130.0, 311.0, 700.0, 1500.0, 2000.0}) {
    CAPTURE(f);
    const auto track = pitch::pyin_track(clip_of(sine(f, 2.0, kRate, 0.3)));
    const auto voiced = track.voiced_f0();
    REQUIRE(voiced.size() > 0);
    Eigen::Index close = 0;
    for (double v : voiced) close += std::abs(cents(v, f)) <= 60.0;
    CHECK(static_cast<double>(close) >= 0.95 * static_cast<double>(voiced.size()));
    CHECK(track.voiced_fraction() >= 0.9);
  }
}

TEST_CASE("pyin voiced frames respect the pitch range") {
  const auto track = pitch::pyin_track(clip_of(sine(523.0, 1.0, kRate, 0.2) + white_noise(kRate, 77, 0.05)));
  for (Eigen::Index t = 0; t < track.frames(); ++t) {
    CHECK(track.voiced_prob[t] >= 0.0);
    CHECK(track.voiced_prob[t] <= 1.0);
    if (track.voiced[t]) {
      CHECK(track.f0_hz[t] >= 65.4);
      CHECK(track.f0_hz[t] <= 2093.0);
    } else {
      CHECK(std::isnan(track.f0_hz[t]));
    }
  }
}

TEST_CASE("pyin voiced fraction is robust to a one-hop shift") {
  const Eigen::VectorXd x = sine(330.0, 4.0, kRate, 0.4);
  Eigen::VectorXd shifted = Eigen::VectorXd::Zero(x.size());
  shifted.tail(x.size() - 512) = x.head(x.size() - 512);
  const auto a = pitch::pyin_track(clip_of(x));
  const auto b = pitch::pyin_track(clip_of(shifted));
  CHECK(std::abs(a.voiced_fraction() - b.voiced_fraction()) < 0.05);
}

TEST_CASE("pyin is deterministic") {
  const Eigen::VectorXd x = sine(196.0, 1.5, kRate, 0.3) + white_noise(static_cast<Eigen::Index>(1.5 * kRate), 5, 0.1);
  const auto a = pitch::pyin_track(clip_of(x));
  const auto b = pitch::pyin_track(clip_of(x));
  CHECK((a.voiced == b.voiced).all());
  CHECK(std::memcmp(a.f0_hz.data(), b.f0_hz.data(), sizeof(double) * static_cast<std::size_t>(a.frames())) == 0);
  CHECK(a.voiced_prob == b.voiced_prob);
}

TEST_CASE("pyin preconditions") {
  CHECK_THROWS_AS(pitch::pyin_track(clip_of(Eigen::VectorXd::Zero(1000))), InvalidInput);
  pitch::PyinConfig bad;
  bad.fmin = 3000.0;
  CHECK_THROWS_AS(pitch::pyin_track(clip_of(Eigen::VectorXd::Zero(4096)), bad), ConfigError);
  pitch::PyinConfig too_low;
  too_low.fmin = 15.0;
  CHECK_THROWS_AS(pitch::pyin_track(clip_of(Eigen::VectorXd::Zero(4096)), too_low), ConfigError);
}
