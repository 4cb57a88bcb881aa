#pragma once

// 8-bit raster images, binary PGM/PPM I/O, and the seeded perturbations used
// by the image variant recipes.

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "diva/variants.hpp"

namespace diva {

class ImageBuffer {
 public:
  /// InvalidArgument for zero dimensions or channels other than 1 or 3.
  ImageBuffer(int width, int height, int channels, std::uint8_t fill = 0);
  /// InvalidArgument also when the sample count does not match.
  ImageBuffer(int width, int height, int channels, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return static_cast<std::size_t>(width_) * height_; }

  std::span<const std::uint8_t> samples() const noexcept { return pixels_; }
  std::span<std::uint8_t> samples() noexcept { return pixels_; }

  std::uint8_t at(int x, int y, int c = 0) const noexcept { return pixels_[index(x, y, c)]; }
  std::uint8_t& at(int x, int y, int c = 0) noexcept { return pixels_[index(x, y, c)]; }

  bool operator==(const ImageBuffer&) const = default;

 private:
  std::size_t index(int x, int y, int c) const noexcept {
    return (static_cast<std::size_t>(y) * width_ + x) * channels_ + c;
  }

  int width_;
  int height_;
  int channels_;
  std::vector<std::uint8_t> pixels_;
};

// Binary PNM (P5 gray, P6 RGB), maxval 255 only.
ImageBuffer decode_pnm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> encode_pnm(const ImageBuffer& img);
ImageBuffer read_image(const std::filesystem::path& path);
void write_image(const ImageBuffer& img, const std::filesystem::path& path);

/// Additive noise, sigma = intensity * 255. intensity in (0, 1].
ImageBuffer gaussian_noise(const ImageBuffer& img, double intensity, std::uint64_t seed);

/// Each pixel (all channels together) becomes black or white with probability p.
ImageBuffer salt_pepper(const ImageBuffer& img, double p, std::uint64_t seed);

/// Multiplicative noise s * (1 + n), n ~ N(0, intensity).
ImageBuffer speckle(const ImageBuffer& img, double intensity, std::uint64_t seed);

/// Separable Gaussian blur, radius ceil(3 sigma), clamp-to-edge.
ImageBuffer blur(const ImageBuffer& img, double sigma);

/// Normalized 1-D blur kernel of length 2 * ceil(3 sigma) + 1.
std::vector<double> gaussian_kernel(double sigma);

enum class RotateMode { Exact90, Bilinear };

/// Counter-clockwise rotation as displayed. Exact90 remaps indices losslessly
/// and needs a multiple of 90 degrees; Bilinear rotates about the centre onto
/// the rotated bounding box with a white background.
ImageBuffer rotate(const ImageBuffer& img, double degrees, RotateMode mode);

struct PerturbResult {
  ImageBuffer image;
  std::string applied;  // human-readable list of the operations performed
};

/// Applies the image part of a variant recipe. AND recipes apply noise then
/// rotation; OR recipes pick one of the two from the seed. The rotation angle
/// is a seeded nonzero multiple of the recipe step below 360 degrees.
/// Recipes without an image part return the input unchanged.
PerturbResult apply_recipe(const ImageBuffer& img, const Recipe& recipe, std::uint64_t seed);

}  // namespace diva
