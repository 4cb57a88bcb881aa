#include "diva/image.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "diva/error.hpp"
#include "diva/rng.hpp"

namespace diva {

namespace {

std::uint8_t clamp_u8(double v) { return static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0)); }

void check_geometry(int width, int height, int channels) {
  if (width <= 0 || height <= 0) throw Error(ErrorKind::InvalidArgument, "image dimensions must be positive");
  if (channels != 1 && channels != 3) throw Error(ErrorKind::InvalidArgument, "images have 1 or 3 channels");
}

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  // Skips whitespace and '#' comments, then reads a decimal integer.
  long next_int() {
    for (;;) {
      while (pos_ < bytes_.size() && std::isspace(bytes_[pos_])) ++pos_;
      if (pos_ < bytes_.size() && bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
        continue;
      }
      break;
    }
    if (pos_ >= bytes_.size() || !std::isdigit(bytes_[pos_])) {
      throw Error(ErrorKind::CorruptHeader, "expected a number in PNM header");
    }
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_++] - '0');
      if (v > 1'000'000'000) throw Error(ErrorKind::CorruptHeader, "PNM header value too large");
    }
    return v;
  }

  // Exactly one whitespace byte separates maxval from the raster.
  void end_of_header() {
    if (pos_ >= bytes_.size() || !std::isspace(bytes_[pos_])) {
      throw Error(ErrorKind::CorruptHeader, "missing separator after PNM header");
    }
    ++pos_;
  }

  std::size_t pos() const noexcept { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 2;
};

double bilinear_sample(const ImageBuffer& img, double fx, double fy, int c) {
  // Sample centres sit at integer + 0.5; anything outside reads as white.
  const double sx = fx - 0.5;
  const double sy = fy - 0.5;
  const double x0f = std::floor(sx);
  const double y0f = std::floor(sy);
  const double tx = sx - x0f;
  const double ty = sy - y0f;
  const int x0 = static_cast<int>(x0f);
  const int y0 = static_cast<int>(y0f);
  auto px = [&](int x, int y) -> double {
    if (x < 0 || y < 0 || x >= img.width() || y >= img.height()) return 255.0;
    return img.at(x, y, c);
  };
  const double top = px(x0, y0) * (1.0 - tx) + px(x0 + 1, y0) * tx;
  const double bottom = px(x0, y0 + 1) * (1.0 - tx) + px(x0 + 1, y0 + 1) * tx;
  return top * (1.0 - ty) + bottom * ty;
}

ImageBuffer rotate_quarter(const ImageBuffer& img, int quarters) {
  quarters = ((quarters % 4) + 4) % 4;
  if (quarters == 0) return img;
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  const bool swap = quarters % 2 == 1;
  ImageBuffer out(swap ? h : w, swap ? w : h, ch);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      int sx = 0, sy = 0;
      switch (quarters) {
        case 1: sx = w - 1 - y; sy = x; break;
        case 2: sx = w - 1 - x; sy = h - 1 - y; break;
        default: sx = y; sy = h - 1 - x; break;
      }
      for (int c = 0; c < ch; ++c) out.at(x, y, c) = img.at(sx, sy, c);
    }
  }
  return out;
}

}  // namespace

ImageBuffer::ImageBuffer(int width, int height, int channels, std::uint8_t fill)
    : width_(width), height_(height), channels_(channels) {
  check_geometry(width, height, channels);
  pixels_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

ImageBuffer::ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
  check_geometry(width, height, channels);
  if (pixels_.size() != static_cast<std::size_t>(width) * height * channels) {
    throw Error(ErrorKind::InvalidArgument, "sample count does not match image geometry");
  }
}

ImageBuffer decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P') throw Error(ErrorKind::UnsupportedFormat, "not a PNM file");
  int channels = 0;
  if (bytes[1] == '5') {
    channels = 1;
  } else if (bytes[1] == '6') {
    channels = 3;
  } else {
    throw Error(ErrorKind::UnsupportedFormat, "only binary P5/P6 images are supported");
  }
  HeaderReader header(bytes);
  const long width = header.next_int();
  const long height = header.next_int();
  const long maxval = header.next_int();
  if (width <= 0 || height <= 0) throw Error(ErrorKind::CorruptHeader, "image dimensions must be positive");
  if (maxval != 255) throw Error(ErrorKind::UnsupportedFormat, "maxval " + std::to_string(maxval) + " (only 255)");
  header.end_of_header();
  const std::size_t need = static_cast<std::size_t>(width) * static_cast<std::size_t>(height) * channels;
  if (bytes.size() - header.pos() < need) throw Error(ErrorKind::CorruptHeader, "truncated pixel payload");
  const auto* first = bytes.data() + header.pos();
  return ImageBuffer(static_cast<int>(width), static_cast<int>(height), channels,
                     std::vector<std::uint8_t>(first, first + need));
}

std::vector<std::uint8_t> encode_pnm(const ImageBuffer& img) {
  std::ostringstream head;
  head << (img.channels() == 1 ? "P5" : "P6") << '\n' << img.width() << ' ' << img.height() << "\n255\n";
  const std::string h = head.str();
  std::vector<std::uint8_t> out(h.begin(), h.end());
  out.insert(out.end(), img.samples().begin(), img.samples().end());
  return out;
}

ImageBuffer read_image(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pnm(bytes);
}

void write_image(const ImageBuffer& img, const std::filesystem::path& path) {
  const auto bytes = encode_pnm(img);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

ImageBuffer gaussian_noise(const ImageBuffer& img, double intensity, std::uint64_t seed) {
  if (!(intensity > 0.0 && intensity <= 1.0)) {
    throw Error(ErrorKind::IntensityOutOfRange, "gaussian intensity must be in (0, 1]");
  }
  const double sigma = intensity * 255.0;
  Rng rng(seed);
  ImageBuffer out = img;
  for (auto& s : out.samples()) s = clamp_u8(s + std::round(rng.normal() * sigma));
  return out;
}

ImageBuffer salt_pepper(const ImageBuffer& img, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::ProbabilityOutOfRange, "salt-and-pepper p must be in [0, 1]");
  Rng rng(seed);
  ImageBuffer out = img;
  auto samples = out.samples();
  const auto ch = static_cast<std::size_t>(img.channels());
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    if (!rng.bernoulli(p)) continue;
    const std::uint8_t v = rng.below(2) == 0 ? 0 : 255;
    std::fill_n(samples.begin() + static_cast<std::ptrdiff_t>(i * ch), ch, v);
  }
  return out;
}

ImageBuffer speckle(const ImageBuffer& img, double intensity, std::uint64_t seed) {
  if (!(intensity > 0.0) || !std::isfinite(intensity)) {
    throw Error(ErrorKind::IntensityOutOfRange, "speckle intensity must be positive");
  }
  Rng rng(seed);
  ImageBuffer out = img;
  for (auto& s : out.samples()) s = clamp_u8(s * (1.0 + rng.normal() * intensity));
  return out;
}

std::vector<double> gaussian_kernel(double sigma) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw Error(ErrorKind::SigmaOutOfRange, "blur sigma must be positive");
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> k(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double w = std::exp(-(i * i) / (2.0 * sigma * sigma));
    k[static_cast<std::size_t>(i + radius)] = w;
    sum += w;
  }
  for (auto& w : k) w /= sum;
  return k;
}

ImageBuffer blur(const ImageBuffer& img, double sigma) {
  const auto kernel = gaussian_kernel(sigma);
  const int radius = static_cast<int>(kernel.size() / 2);
  const int w = img.width();
  const int h = img.height();
  const int ch = img.channels();
  auto idx = [&](int x, int y, int c) { return (static_cast<std::size_t>(y) * w + x) * ch + c; };

  std::vector<double> horiz(img.samples().size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          acc += kernel[static_cast<std::size_t>(t + radius)] * img.at(std::clamp(x + t, 0, w - 1), y, c);
        }
        horiz[idx(x, y, c)] = acc;
      }
    }
  }
  ImageBuffer out(w, h, ch);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double acc = 0.0;
        for (int t = -radius; t <= radius; ++t) {
          acc += kernel[static_cast<std::size_t>(t + radius)] * horiz[idx(x, std::clamp(y + t, 0, h - 1), c)];
        }
        out.at(x, y, c) = clamp_u8(acc);
      }
    }
  }
  return out;
}

ImageBuffer rotate(const ImageBuffer& img, double degrees, RotateMode mode) {
  if (!std::isfinite(degrees)) throw Error(ErrorKind::InvalidArgument, "rotation angle must be finite");
  if (mode == RotateMode::Exact90) {
    const double quarters = degrees / 90.0;
    if (std::fmod(degrees, 90.0) != 0.0) {
      throw Error(ErrorKind::ModeMismatch, "exact90 rotation needs a multiple of 90 degrees");
    }
    return rotate_quarter(img, static_cast<int>(std::fmod(quarters, 4.0)));
  }

  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double w = img.width();
  const double h = img.height();
  const int out_w = std::max(1, static_cast<int>(std::ceil(std::abs(w * cs) + std::abs(h * sn) - 1e-9)));
  const int out_h = std::max(1, static_cast<int>(std::ceil(std::abs(w * sn) + std::abs(h * cs) - 1e-9)));
  ImageBuffer out(out_w, out_h, img.channels());
  const double ocx = out_w / 2.0;
  const double ocy = out_h / 2.0;
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      const double u = x + 0.5 - ocx;
      const double v = y + 0.5 - ocy;
      // Inverse map: output offset (u, v) comes from input offset (dx, dy).
      const double dx = cs * u - sn * v;
      const double dy = sn * u + cs * v;
      for (int c = 0; c < img.channels(); ++c) {
        out.at(x, y, c) = clamp_u8(bilinear_sample(img, dx + w / 2.0, dy + h / 2.0, c));
      }
    }
  }
  return out;
}

PerturbResult apply_recipe(const ImageBuffer& img, const Recipe& recipe, std::uint64_t seed) {
  double noise = 0.0;
  int step = 0;
  bool both = false;
  if (const auto* r = std::get_if<ImageAndTextPerturb>(&recipe)) {
    noise = r->noise_intensity;
    step = r->rotation_multiple_deg;
    both = r->combine == Combine::And;
  } else if (const auto* r2 = std::get_if<ImagePerturbOnly>(&recipe)) {
    noise = r2->noise_intensity;
    step = r2->rotation_multiple_deg;
  } else {
    return {img, "none"};
  }

  Rng choice(derive_seed(seed, 0xC401CEull));
  const bool do_noise = both || choice.below(2) == 0;
  const bool do_rotate = both || !do_noise;

  PerturbResult result{img, ""};
  if (do_noise) {
    result.image = gaussian_noise(result.image, noise, derive_seed(seed, 0x9A055ull));
    std::ostringstream os;
    os << "gaussian(" << noise << ")";
    result.applied = os.str();
  }
  if (do_rotate) {
    const int max_multiple = 359 / step;
    const int angle = step * (1 + static_cast<int>(choice.below(static_cast<std::uint64_t>(max_multiple))));
    const RotateMode mode = angle % 90 == 0 ? RotateMode::Exact90 : RotateMode::Bilinear;
    result.image = rotate(result.image, angle, mode);
    if (!result.applied.empty()) result.applied += " + ";
    result.applied += "rotate(" + std::to_string(angle) + (mode == RotateMode::Exact90 ? ", exact90)" : ", bilinear)");
  }
  return result;
}

}  // namespace diva
