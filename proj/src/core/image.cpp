#include "image.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <numbers>

#include "error.hpp"
#include "parallel.hpp"
#include "rng.hpp"

namespace opstego {

GrayImage::GrayImage(int width, int height, std::uint8_t fill)
    : GrayImage(width, height,
                std::vector<std::uint8_t>(width > 0 && height > 0 ? std::size_t(width) * std::size_t(height) : 0,
                                          fill)) {}

GrayImage::GrayImage(int width, int height, std::vector<std::uint8_t> pixels)
    : width_(width), height_(height), pixels_(std::move(pixels)) {
  if (width <= 0 || height <= 0) fail(ErrorCode::InvalidArgument, "image dimensions must be positive");
  if (pixels_.size() != std::size_t(width) * std::size_t(height))
    fail(ErrorCode::InvalidArgument, "pixel buffer size does not match width*height");
}

int reflect_index(int i, int n) noexcept {
  if (n == 1) return 0;
  const int period = 2 * n;
  i %= period;
  if (i < 0) i += period;
  return i < n ? i : period - 1 - i;
}

std::uint8_t GrayImage::mirrored(int row, int col) const {
  return at(reflect_index(row, height_), reflect_index(col, width_));
}

std::uint8_t to_pixel(double v) noexcept {
  const double r = std::round(v);
  if (!(r > 0.0)) return 0;
  if (r >= 255.0) return 255;
  return static_cast<std::uint8_t>(r);
}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto c = bytes_[pos_];
      if (c == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* field) {
    skip_space_and_comments();
    const auto* first = reinterpret_cast<const char*>(bytes_.data()) + pos_;
    const auto* last = reinterpret_cast<const char*>(bytes_.data()) + bytes_.size();
    long value = 0;
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr == first) fail(ErrorCode::Parse, std::string("malformed PGM header: bad ") + field);
    pos_ += static_cast<std::size_t>(ptr - first);
    return value;
  }

  std::size_t pos() const { return pos_; }
  void advance() { ++pos_; }
  bool at_space() const { return pos_ < bytes_.size() && std::isspace(bytes_[pos_]); }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

GrayImage load_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5')
    fail(ErrorCode::Parse, "malformed PGM header: missing P5 magic");
  HeaderReader reader(bytes.subspan(2));
  const long width = reader.number("width");
  const long height = reader.number("height");
  const long maxval = reader.number("maxval");
  if (width <= 0 || height <= 0 || width > (1L << 20) || height > (1L << 20))
    fail(ErrorCode::Parse, "malformed PGM header: invalid dimensions");
  if (maxval != 255) fail(ErrorCode::Parse, "unsupported maxval " + std::to_string(maxval));
  if (!reader.at_space()) fail(ErrorCode::Parse, "malformed PGM header: missing separator after maxval");
  reader.advance();
  const std::size_t offset = 2 + reader.pos();
  const std::size_t count = std::size_t(width) * std::size_t(height);
  if (bytes.size() - offset < count) fail(ErrorCode::Parse, "truncated PGM payload");
  std::vector<std::uint8_t> pixels(bytes.begin() + long(offset), bytes.begin() + long(offset + count));
  return GrayImage(int(width), int(height), std::move(pixels));
}

std::vector<std::uint8_t> save_pgm(const GrayImage& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

GrayImage read_pgm_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return load_pgm(bytes);
}

void write_pgm_file(const std::string& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot write " + path);
  const auto bytes = save_pgm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write failed for " + path);
}

namespace {

void require_same_shape(const GrayImage& a, const GrayImage& b) {
  if (a.width() != b.width() || a.height() != b.height())
    fail(ErrorCode::DimensionMismatch, "images differ in size");
}

}  // namespace

double modification_ratio(const GrayImage& a, const GrayImage& b) {
  require_same_shape(a, b);
  std::size_t changed = 0;
  for (std::size_t i = 0; i < a.size(); ++i) changed += a.pixels()[i] != b.pixels()[i];
  return double(changed) / double(a.size());
}

double psnr(const GrayImage& a, const GrayImage& b) {
  require_same_shape(a, b);
  std::uint64_t sse = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const int d = int(a.pixels()[i]) - int(b.pixels()[i]);
    sse += std::uint64_t(d * d);
  }
  if (sse == 0) return kPsnrInfinity;
  const double mse = double(sse) / double(a.size());
  return 10.0 * std::log10(255.0 * 255.0 / mse);
}

PairStats pair_stats(const GrayImage& a, const GrayImage& b) { return {modification_ratio(a, b), psnr(a, b)}; }

GrayImage synth_image(int width, int height, std::uint64_t seed, std::uint64_t index) {
  if (width <= 0 || height <= 0) fail(ErrorCode::InvalidArgument, "corpus dimensions must be positive");
  Rng rng(derive_seed(seed, index));
  constexpr double two_pi = 2.0 * std::numbers::pi;

  // Gradient component.
  const double base = rng.uniform(70.0, 185.0);
  const double grad_angle = rng.uniform(0.0, two_pi);
  const double grad_span = rng.uniform(0.0, 90.0);
  const double gx = std::cos(grad_angle) * grad_span / width;
  const double gy = std::sin(grad_angle) * grad_span / height;

  // Texture: 3..8 oriented sinusoids, low to mid spatial frequency.
  struct Wave {
    double fx, fy, phase, amplitude;
  };
  const int n_waves = 3 + int(rng.below(6));
  std::vector<Wave> waves(static_cast<std::size_t>(n_waves));
  for (auto& w : waves) {
    const double period = std::exp(rng.uniform(std::log(6.0), std::log(160.0)));
    const double theta = rng.uniform(0.0, two_pi);
    w.fx = std::cos(theta) * two_pi / period;
    w.fy = std::sin(theta) * two_pi / period;
    w.phase = rng.uniform(0.0, two_pi);
    w.amplitude = rng.uniform(3.0, 28.0) * std::min(1.0, period / 24.0);
  }
  // Textured region: sinusoid amplitude modulated by a soft random disc.
  const double cx = rng.uniform(0.0, width), cy = rng.uniform(0.0, height);
  const double radius = rng.uniform(0.2, 0.7) * std::min(width, height);
  const double texture_floor = rng.uniform(0.3, 1.0);
  const double sigma = rng.uniform(1.0, 4.0);

  GrayImage img(width, height);
  for (int r = 0; r < height; ++r) {
    for (int c = 0; c < width; ++c) {
      double texture = 0.0;
      for (const auto& w : waves) texture += w.amplitude * std::sin(w.fx * c + w.fy * r + w.phase);
      const double dist = std::hypot(c - cx, r - cy) / radius;
      const double weight = texture_floor + (1.0 - texture_floor) / (1.0 + dist * dist * dist * dist);
      const double v = base + gx * (c - width / 2.0) + gy * (r - height / 2.0) + weight * texture + sigma * rng.normal();
      img.at(r, c) = to_pixel(v);
    }
  }
  return img;
}

std::vector<GrayImage> synth_corpus(int count, int width, int height, std::uint64_t seed) {
  if (count < 1) fail(ErrorCode::InvalidArgument, "corpus count must be >= 1");
  std::vector<GrayImage> out(static_cast<std::size_t>(count));
  parallel_for(out.size(), [&](std::size_t i) { out[i] = synth_image(width, height, seed, i); });
  return out;
}

GrayImage downsample2(const GrayImage& img) {
  if (img.width() % 2 != 0 || img.height() % 2 != 0)
    fail(ErrorCode::InvalidArgument, "downsample2 requires even dimensions");
  GrayImage out(img.width() / 2, img.height() / 2);
  for (int r = 0; r < out.height(); ++r)
    for (int c = 0; c < out.width(); ++c) {
      const int sum = img.at(2 * r, 2 * c) + img.at(2 * r, 2 * c + 1) + img.at(2 * r + 1, 2 * c) +
                      img.at(2 * r + 1, 2 * c + 1);
      out.at(r, c) = to_pixel(sum / 4.0);
    }
  return out;
}

GrayImage center_crop(const GrayImage& img, int size) {
  if (size <= 0) fail(ErrorCode::InvalidArgument, "crop size must be positive");
  const int w = std::min(size, img.width()), h = std::min(size, img.height());
  const int c0 = (img.width() - w) / 2, r0 = (img.height() - h) / 2;
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out.at(r, c) = img.at(r0 + r, c0 + c);
  return out;
}

}  // namespace opstego
