#include "erakit/error.hpp"
#include "erakit/features.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <numeric>
#include <random>

using namespace erakit;
using namespace erakit::testing;

namespace {
constexpr int kRate = 22050;
}

TEST_CASE("delta of a constant row vanishes") {
  const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(2, 20, 4.5);
  CHECK(features::delta(x).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("delta of a ramp is its slope away from the edges") {
  Eigen::MatrixXd x(1, 30);
  for (int t = 0; t < 30; ++t) x(0, t) = 3.0 * t;
  const auto d = features::delta(x);
  for (int t = 4; t < 26; ++t) CHECK(d(0, t) == doctest::Approx(3.0));
  CHECK(d(0, 0) < 3.0);  // edge replication flattens the ends
}

TEST_CASE("delta of a single frame is zero") {
  Eigen::MatrixXd x(3, 1);
  x << 1.0, -2.0, 7.0;
  CHECK(features::delta(x).isZero(0.0));
}

TEST_CASE("summarize_stats ordering and population std") {
  Eigen::MatrixXd base(1, 3);
  base << 1.0, 2.0, 3.0;
  const Eigen::MatrixXd zeros = Eigen::MatrixXd::Zero(1, 3);
  const auto s = features::summarize_stats(base, zeros, zeros);
  REQUIRE(s.size() == 12);
  CHECK(s[0] == doctest::Approx(2.0));
  CHECK(s[1] == doctest::Approx(0.81650).epsilon(1e-5));
  CHECK(s[2] == 1.0);
  CHECK(s[3] == 3.0);
  CHECK(s.tail(8).isZero(0.0));
}

TEST_CASE("summarize_stats dimensions and single frame") {
  const Eigen::MatrixXd m = Eigen::MatrixXd::Random(13, 40);
  CHECK(features::summarize_stats(m, m, m).size() == 156);

  Eigen::MatrixXd one(1, 1);
  one << 0.7;
  const auto s = features::summarize_stats(one, one, one);
  CHECK(s[0] == 0.7);
  CHECK(s[1] == 0.0);
  CHECK(s[2] == 0.7);
  CHECK(s[3] == 0.7);
  CHECK_THROWS_AS(features::summarize_stats(Eigen::MatrixXd(1, 0), Eigen::MatrixXd(1, 0), Eigen::MatrixXd(1, 0)),
                  InvalidInput);
}

TEST_CASE("summarize_stats of base block is invariant to frame permutation") {
  std::mt19937 rng(4);
  Eigen::MatrixXd base = Eigen::MatrixXd::Random(3, 25);
  std::vector<int> order(25);
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  Eigen::MatrixXd permuted(3, 25);
  for (int t = 0; t < 25; ++t) permuted.col(t) = base.col(order[static_cast<std::size_t>(t)]);
  const Eigen::MatrixXd z = Eigen::MatrixXd::Zero(3, 25);
  const auto a = features::summarize_stats(base, z, z);
  const auto b = features::summarize_stats(permuted, z, z);
  CHECK((a.head(12) - b.head(12)).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("assembled vectors for a 10 s tone") {
  const auto f = features::assemble_feature_vectors(clip_of(sine(440.0, 10.0, kRate, 0.5)), {});
  REQUIRE(f.pitch.has_value());
  CHECK(f.pitch->dim() == 12);
  CHECK(std::abs(f.pitch->values[0] - 440.0) <= 2.0);
  CHECK(f.pitch->values[1] < 5.0);
  CHECK(f.loudness.dim() == 12);
  CHECK(f.timbre.dim() == 156);
  CHECK(f.timbre.values.allFinite());
  CHECK(f.loudness.values.allFinite());
}

TEST_CASE("silence has no pitch vector and zero loudness") {
  const auto f = features::assemble_feature_vectors(clip_of(Eigen::VectorXd::Zero(10 * kRate)), {});
  CHECK_FALSE(f.pitch.has_value());
  REQUIRE(f.loudness.dim() == 12);
  CHECK(f.loudness.values.isZero(0.0));
  CHECK(f.timbre.dim() == 156);
}

TEST_CASE("timbre vector responds to gain only through c0 base statistics") {
  const Eigen::VectorXd x = white_noise(3 * kRate, 21, 0.2) + sine(300.0, 3.0, kRate, 0.1);
  const auto a = features::assemble_feature_vectors(clip_of(x), {});
  const auto b = features::assemble_feature_vectors(clip_of(2.0 * x), {});
  const Eigen::VectorXd diff = (b.timbre.values - a.timbre.values).cwiseAbs();
  // Base block row 0 occupies indices 0..3 (mean, std, min, max).
  CHECK(diff[0] > 1.0);
  CHECK(diff[2] > 1.0);
  CHECK(diff[3] > 1.0);
  CHECK(diff[1] < 1e-3);
  CHECK(diff.tail(152).maxCoeff() < 1e-3);
}

TEST_CASE("pitch statistics with gap interpolation") {
  pitch::F0Track track;
  track.f0_hz.resize(6);
  track.voiced.resize(6);
  const double nan = std::numeric_limits<double>::quiet_NaN();
  track.f0_hz << nan, 100.0, nan, nan, 130.0, nan;
  track.voiced << false, true, false, false, true, false;

  const auto voiced_only = features::pitch_statistics(track, features::PitchDeltaMode::kVoicedOnly);
  const auto interpolated = features::pitch_statistics(track, features::PitchDeltaMode::kInterpolateThenMask);
  REQUIRE(voiced_only.has_value());
  REQUIRE(interpolated.has_value());
  CHECK((*voiced_only)[0] == doctest::Approx(115.0));
  CHECK((*interpolated)[0] == doctest::Approx(115.0));
  // Closed gaps: delta over [100, 130] only; interpolated: a smoother ramp over six frames.
  CHECK((*voiced_only)[4] == doctest::Approx((4.0 * 30.0 + 3.0 * 30.0 + 2.0 * 30.0 + 30.0) / 60.0));
  Eigen::RowVectorXd filled(6);
  filled << 100.0, 100.0, 110.0, 120.0, 130.0, 130.0;
  const Eigen::RowVectorXd d1 = features::delta(filled);
  CHECK((*interpolated)[4] == doctest::Approx(0.5 * (d1[1] + d1[4])));

  track.voiced.setConstant(false);
  CHECK_FALSE(features::pitch_statistics(track, features::PitchDeltaMode::kVoicedOnly).has_value());
}

TEST_CASE("loudness peak metrics") {
  dsp::FrameSeries<double> rms;
  rms.values = Eigen::MatrixXd::Constant(1, 431, 0.1);

  SUBCASE("constant series ties to the first frame") {
    const auto p = features::loudness_peak_metrics(rms);
    CHECK(p.peak_time_s == 0.0);
    CHECK(p.relative_magnitude == doctest::Approx(1.0));
  }
  SUBCASE("single spike at 3 s") {
    const auto spike = static_cast<Eigen::Index>(std::lround(3.0 * kRate / 512));
    rms.values(0, spike) = 0.5;
    const auto p = features::loudness_peak_metrics(rms);
    CHECK(std::abs(p.peak_time_s - 3.0) <= 512.0 / kRate);
    CHECK(p.relative_magnitude == doctest::Approx(0.5 / ((430 * 0.1 + 0.5) / 431)));
    CHECK(p.relative_magnitude == doctest::Approx(4.954).epsilon(1e-4));
  }
  SUBCASE("silence") {
    rms.values.setZero();
    const auto p = features::loudness_peak_metrics(rms);
    CHECK(p.peak_time_s == 0.0);
    CHECK(p.relative_magnitude == 1.0);
  }
}

TEST_CASE("loudness peak metrics are amplitude invariant") {
  dsp::FrameSeries<double> rms;
  rms.values = white_noise(431, 8, 1.0).cwiseAbs().transpose();
  const auto base = features::loudness_peak_metrics(rms);
  CHECK(base.relative_magnitude >= 1.0);
  for (double c : {0.25, 2.0, 8.0}) {
    dsp::FrameSeries<double> scaled = rms;
    scaled.values *= c;
    const auto p = features::loudness_peak_metrics(scaled);
    CHECK(p.peak_time_s == base.peak_time_s);
    CHECK(p.relative_magnitude == base.relative_magnitude);
  }
  dsp::FrameSeries<double> scaled = rms;
  scaled.values *= 3.7;
  const auto p = features::loudness_peak_metrics(scaled);
  CHECK(p.peak_time_s == base.peak_time_s);
  CHECK(p.relative_magnitude == doctest::Approx(base.relative_magnitude).epsilon(1e-12));
}

TEST_CASE("feature kinds round trip through their names") {
  for (auto kind : features::kAllKinds) CHECK(features::parse_kind(features::kind_name(kind)) == kind);
  CHECK_THROWS_AS(features::parse_kind("rhythm"), ConfigError);
}
