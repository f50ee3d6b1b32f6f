#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace opstego {

/// 8-bit grayscale raster, row-major. Any positive size is representable;
/// operations that need a minimum size (8x8 blocks, 3-wide windows) check it
/// themselves.
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::uint8_t fill = 0);
  GrayImage(int width, int height, std::vector<std::uint8_t> pixels);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return pixels_.size(); }
  bool empty() const noexcept { return pixels_.empty(); }

  std::uint8_t at(int row, int col) const { return pixels_[index(row, col)]; }
  std::uint8_t& at(int row, int col) { return pixels_[index(row, col)]; }

  /// Mirror-padded access: out-of-range coordinates reflect about the border
  /// with the edge sample repeated (d c b a | a b c d | d c b a).
  std::uint8_t mirrored(int row, int col) const;

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  std::size_t index(int row, int col) const noexcept {
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(width_) + static_cast<std::size_t>(col);
  }

  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> pixels_;
};

/// Reflects an out-of-range index into [0, n) using symmetric padding.
int reflect_index(int i, int n) noexcept;

/// Round half away from zero, then clamp to [0, 255].
std::uint8_t to_pixel(double v) noexcept;

// PGM (binary P5, maxval 255).
GrayImage load_pgm(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> save_pgm(const GrayImage& img);
GrayImage read_pgm_file(const std::string& path);
void write_pgm_file(const std::string& path, const GrayImage& img);

/// PSNR of identical images. Finite so it survives JSON and CSV.
inline constexpr double kPsnrInfinity = 999.0;

struct PairStats {
  double modification_ratio = 0.0;
  double psnr_db = kPsnrInfinity;
};

double modification_ratio(const GrayImage& a, const GrayImage& b);
double psnr(const GrayImage& a, const GrayImage& b);
PairStats pair_stats(const GrayImage& a, const GrayImage& b);

/// Deterministic synthetic corpus: gradient + sinusoid texture + Gaussian
/// noise per image. Image i depends only on (seed, i).
std::vector<GrayImage> synth_corpus(int count, int width, int height, std::uint64_t seed);
GrayImage synth_image(int width, int height, std::uint64_t seed, std::uint64_t index);

/// Half-size image; each output pixel is the rounded mean of a 2x2 block.
GrayImage downsample2(const GrayImage& img);

/// Centered crop to at most size x size.
GrayImage center_crop(const GrayImage& img, int size);

}  // namespace opstego
