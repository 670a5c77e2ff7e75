#include "erakit/audio_io.hpp"

#include "erakit/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

namespace erakit::audio {
namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t read_u16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xFF));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int shift = 0; shift < 32; shift += 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

void put_tag(std::vector<std::uint8_t>& out, const char* tag) { out.insert(out.end(), tag, tag + 4); }

bool tag_is(std::span<const std::uint8_t> b, std::size_t at, const char* tag) {
  return std::memcmp(b.data() + at, tag, 4) == 0;
}

struct Format {
  std::uint16_t tag = 0;
  std::uint16_t channels = 0;
  std::uint32_t sample_rate = 0;
  std::uint16_t bits = 0;
};

double bessel_i0(double x) {
  // Power series; converges quickly for the beta values used here.
  double sum = 1.0;
  double term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

/// Tabulated Kaiser-windowed sinc, indexed in zero-crossing units on [0, zero_crossings].
class SincTable {
 public:
  SincTable(int zero_crossings, int oversample, double beta)
      : zero_crossings_(zero_crossings), oversample_(oversample) {
    const int n = zero_crossings * oversample + 2;
    values_.resize(n);
    const double i0_beta = bessel_i0(beta);
    for (int i = 0; i < n; ++i) {
      const double u = static_cast<double>(i) / oversample;
      const double r = u / zero_crossings;
      const double window = r < 1.0 ? bessel_i0(beta * std::sqrt(1.0 - r * r)) / i0_beta : 0.0;
      const double sinc = u == 0.0 ? 1.0 : std::sin(std::numbers::pi * u) / (std::numbers::pi * u);
      values_[i] = sinc * window;
    }
  }

  double operator()(double u) const {
    u = std::abs(u);
    if (u >= zero_crossings_) return 0.0;
    const double pos = u * oversample_;
    const auto i = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(i);
    return values_[i] + frac * (values_[i + 1] - values_[i]);
  }

  int zero_crossings() const { return zero_crossings_; }

 private:
  int zero_crossings_;
  int oversample_;
  std::vector<double> values_;
};

const SincTable& resampler_kernel() {
  static const SincTable table(/*zero_crossings=*/32, /*oversample=*/1024, /*beta=*/9.0);
  return table;
}

}  // namespace

RawAudio decode_wav(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 12 || !tag_is(bytes, 0, "RIFF") || !tag_is(bytes, 8, "WAVE")) {
    throw InvalidInput("not a RIFF/WAVE stream");
  }

  Format fmt;
  bool have_fmt = false;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::uint32_t size = read_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (tag_is(bytes, pos, "fmt ")) {
      if (size < 16 || body + size > bytes.size()) {
        throw InvalidInput("malformed fmt chunk at byte offset " + std::to_string(pos));
      }
      fmt.tag = read_u16(bytes, body);
      fmt.channels = read_u16(bytes, body + 2);
      fmt.sample_rate = read_u32(bytes, body + 4);
      fmt.bits = read_u16(bytes, body + 14);
      if (fmt.tag == kFormatExtensible) {
        if (size < 40) throw InvalidInput("malformed WAVE_FORMAT_EXTENSIBLE fmt chunk");
        fmt.tag = read_u16(bytes, body + 24);  // first two bytes of the subformat GUID
      }
      have_fmt = true;
    } else if (tag_is(bytes, pos, "data")) {
      if (!have_fmt) throw InvalidInput("data chunk precedes fmt chunk");
      const bool pcm = fmt.tag == kFormatPcm && (fmt.bits == 16 || fmt.bits == 24);
      const bool flt = fmt.tag == kFormatFloat && fmt.bits == 32;
      if (!pcm && !flt) {
        throw InvalidInput("unsupported encoding " + std::to_string(fmt.tag) + " (" +
                           std::to_string(fmt.bits) + "-bit)");
      }
      if (fmt.channels == 0) throw InvalidInput("wav declares zero channels");
      if (fmt.sample_rate == 0) throw InvalidInput("wav declares zero sample rate");
      if (body + size > bytes.size()) {
        throw InvalidInput("truncated data chunk: declares " + std::to_string(size) +
                           " bytes at byte offset " + std::to_string(body) + " but stream ends at " +
                           std::to_string(bytes.size()));
      }
      const std::size_t width = fmt.bits / 8;
      const std::size_t frame_bytes = width * fmt.channels;
      const std::size_t frames = size / frame_bytes;

      RawAudio out;
      out.sample_rate = static_cast<int>(fmt.sample_rate);
      out.channels.resize(fmt.channels, static_cast<Eigen::Index>(frames));
      for (std::size_t f = 0; f < frames; ++f) {
        for (std::size_t c = 0; c < fmt.channels; ++c) {
          const std::size_t at = body + f * frame_bytes + c * width;
          double v = 0.0;
          if (flt) {
            v = std::bit_cast<float>(read_u32(bytes, at));
          } else if (fmt.bits == 16) {
            v = static_cast<std::int16_t>(read_u16(bytes, at)) / 32768.0;
          } else {
            std::int32_t s = bytes[at] | (bytes[at + 1] << 8) | (bytes[at + 2] << 16);
            if (s & 0x800000) s -= 0x1000000;
            v = s / 8388608.0;
          }
          out.channels(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(f)) = v;
        }
      }
      return out;
    }
    pos = body + size + (size & 1u);
  }
  throw InvalidInput(have_fmt ? "wav has no data chunk" : "wav has no fmt chunk");
}

std::vector<std::uint8_t> encode_wav(const RawAudio& audio, WavEncoding encoding) {
  const auto channels = static_cast<std::uint16_t>(audio.channel_count());
  const auto frames = static_cast<std::size_t>(audio.frame_count());
  const std::uint16_t bits = encoding == WavEncoding::kPcm16 ? 16 : encoding == WavEncoding::kPcm24 ? 24 : 32;
  const std::uint16_t block = static_cast<std::uint16_t>(channels * bits / 8);
  const auto data_size = static_cast<std::uint32_t>(frames * block);

  std::vector<std::uint8_t> out;
  out.reserve(44 + data_size);
  put_tag(out, "RIFF");
  put_u32(out, 36 + data_size);
  put_tag(out, "WAVE");
  put_tag(out, "fmt ");
  put_u32(out, 16);
  put_u16(out, encoding == WavEncoding::kFloat32 ? kFormatFloat : kFormatPcm);
  put_u16(out, channels);
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * block);
  put_u16(out, block);
  put_u16(out, bits);
  put_tag(out, "data");
  put_u32(out, data_size);

  for (std::size_t f = 0; f < frames; ++f) {
    for (std::size_t c = 0; c < channels; ++c) {
      const double v = audio.channels(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(f));
      switch (encoding) {
        case WavEncoding::kFloat32:
          put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
          break;
        case WavEncoding::kPcm16: {
          const double s = std::clamp(std::round(v * 32768.0), -32768.0, 32767.0);
          put_u16(out, static_cast<std::uint16_t>(static_cast<std::int16_t>(s)));
          break;
        }
        case WavEncoding::kPcm24: {
          const double s = std::clamp(std::round(v * 8388608.0), -8388608.0, 8388607.0);
          const auto u = static_cast<std::uint32_t>(static_cast<std::int32_t>(s));
          out.push_back(static_cast<std::uint8_t>(u));
          out.push_back(static_cast<std::uint8_t>(u >> 8));
          out.push_back(static_cast<std::uint8_t>(u >> 16));
          break;
        }
      }
    }
  }
  return out;
}

RawAudio read_wav_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInput("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_wav(bytes);
  } catch (const InvalidInput& e) {
    throw InvalidInput(path.string() + ": " + e.what());
  }
}

void write_wav_file(const std::filesystem::path& path, const RawAudio& audio, WavEncoding encoding) {
  const auto bytes = encode_wav(audio, encoding);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidInput("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

RawAudio mixdown(const RawAudio& raw) {
  if (raw.channel_count() == 0) throw InvalidInput("mixdown of audio with zero channels");
  if (raw.channel_count() == 1) return raw;
  RawAudio mono;
  mono.sample_rate = raw.sample_rate;
  mono.channels = raw.channels.colwise().mean();
  return mono;
}

AudioClip resample(const RawAudio& mono, int target_rate) {
  if (mono.channel_count() != 1) throw InvalidInput("resample expects mono input");
  if (target_rate <= 0 || mono.sample_rate <= 0) throw ConfigError("sample rates must be positive");

  const Eigen::VectorXd x = mono.channels.row(0).transpose();
  AudioClip clip;
  clip.sample_rate = target_rate;
  if (mono.sample_rate == target_rate) {
    clip.samples = x.cwiseMax(-1.0).cwiseMin(1.0);
    return clip;
  }

  const auto native = static_cast<std::int64_t>(mono.sample_rate);
  const auto target = static_cast<std::int64_t>(target_rate);
  const std::int64_t n_in = x.size();
  const std::int64_t n_out = (2 * n_in * target + native) / (2 * native);

  // Cutoff in cycles per input sample, a little below the lower Nyquist.
  constexpr double kRolloff = 0.94;
  const double ratio = static_cast<double>(target) / static_cast<double>(native);
  const double cutoff = 0.5 * std::min(1.0, ratio) * kRolloff;
  const double scale = 2.0 * cutoff;  // input samples -> zero-crossing units
  const SincTable& kernel = resampler_kernel();
  const double reach = kernel.zero_crossings() / scale;

  clip.samples.resize(n_out);
  for (std::int64_t n = 0; n < n_out; ++n) {
    const double t = static_cast<double>(n) * static_cast<double>(native) / static_cast<double>(target);
    const auto lo = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(t - reach)));
    const auto hi = std::min<std::int64_t>(n_in - 1, static_cast<std::int64_t>(std::floor(t + reach)));
    double acc = 0.0;
    for (std::int64_t k = lo; k <= hi; ++k) acc += x[k] * kernel((t - static_cast<double>(k)) * scale);
    clip.samples[n] = std::clamp(acc * scale, -1.0, 1.0);
  }
  return clip;
}

AudioClip load_canonical(const std::filesystem::path& path, int target_rate) {
  return resample(mixdown(read_wav_file(path)), target_rate);
}

}  // namespace erakit::audio
