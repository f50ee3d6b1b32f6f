#include "ops.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>

#include "error.hpp"
#include "rng.hpp"

namespace opstego {

namespace {

constexpr std::array<std::string_view, 11> kKindNames = {"GC", "HE", "UM", "MeanF", "GF", "MedF",
                                                         "WF", "Sca", "Rot", "JPEG", "JP2"};

void require_hsize(int hsize) {
  if (hsize != 3 && hsize != 5 && hsize != 7) fail(ErrorCode::InvalidArgument, "hsize must be 3, 5 or 7");
}

template <class T>
const T& params_as(const OperationSpec& spec) {
  const auto* p = std::get_if<T>(&spec.params);
  if (!p) fail(ErrorCode::InvalidArgument, "parameters do not match operation " + std::string(to_string(spec.kind)));
  return *p;
}

/// Real-valued correlation with symmetric padding. Kernel taps are summed in
/// fixed row-major order.
std::vector<double> correlate(const GrayImage& img, const Kernel& kernel) {
  const int side = static_cast<int>(std::lround(std::sqrt(double(kernel.size()))));
  if (side * side != int(kernel.size()) || side % 2 == 0)
    fail(ErrorCode::InvalidArgument, "kernel must be square with odd side");
  const int half = side / 2;
  const int w = img.width(), h = img.height();
  // Padded copy so the inner loop needs no reflection.
  const int pw = w + 2 * half;
  std::vector<double> padded(std::size_t(pw) * std::size_t(h + 2 * half));
  for (int r = -half; r < h + half; ++r)
    for (int c = -half; c < w + half; ++c)
      padded[std::size_t(r + half) * pw + std::size_t(c + half)] = img.mirrored(r, c);

  std::vector<double> out(img.size());
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      double acc = 0.0;
      for (int kr = 0; kr < side; ++kr) {
        const double* row = &padded[std::size_t(r + kr) * pw + std::size_t(c)];
        const double* k = &kernel[std::size_t(kr) * side];
        for (int kc = 0; kc < side; ++kc) acc += k[kc] * row[kc];
      }
      out[std::size_t(r) * w + std::size_t(c)] = acc;
    }
  return out;
}

GrayImage from_real(int w, int h, const std::vector<double>& values) {
  GrayImage out(w, h);
  for (std::size_t i = 0; i < values.size(); ++i) out.pixels()[i] = to_pixel(values[i]);
  return out;
}

double bilinear(const GrayImage& img, double x, double y) {
  x = std::clamp(x, 0.0, double(img.width() - 1));
  y = std::clamp(y, 0.0, double(img.height() - 1));
  const int x0 = int(std::floor(x)), y0 = int(std::floor(y));
  const int x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
  const double fx = x - x0, fy = y - y0;
  const double top = (1.0 - fx) * img.at(y0, x0) + fx * img.at(y0, x1);
  const double bottom = (1.0 - fx) * img.at(y1, x0) + fx * img.at(y1, x1);
  return (1.0 - fy) * top + fy * bottom;
}

void require_output_size(int out_w, int out_h, const GrayImage& img) {
  if (out_w < std::min(8, img.width()) || out_h < std::min(8, img.height()))
    fail(ErrorCode::InvalidArgument, "resampled image would be smaller than 8x8");
}

constexpr std::array<int, 64> kLuminanceTable = {
    16, 11, 10, 16, 24,  40,  51,  61,  12, 12, 14, 19, 26,  58,  60,  55,  14, 13, 16, 24, 40,  57,
    69, 56, 14, 17, 22,  29,  51,  87,  80, 62, 18, 22, 37,  56,  68,  109, 103, 77, 24, 35, 55, 64,
    81, 104, 113, 92, 49, 64, 78, 87, 103, 121, 120, 101, 72, 92, 95, 98, 112, 100, 103, 99};

struct DctBasis {
  // cosines[u][x] = a(u) * cos((2x + 1) u pi / 16), orthonormal 1-D basis.
  std::array<std::array<double, 8>, 8> cosines{};
  DctBasis() {
    for (int u = 0; u < 8; ++u)
      for (int x = 0; x < 8; ++x) {
        const double a = u == 0 ? std::sqrt(0.125) : 0.5;
        cosines[u][x] = a * std::cos((2 * x + 1) * u * std::numbers::pi / 16.0);
      }
  }
};

const DctBasis& dct_basis() {
  static const DctBasis basis;
  return basis;
}

std::array<double, 64> dct8x8(const std::array<double, 64>& in) {
  const auto& b = dct_basis().cosines;
  std::array<double, 64> tmp{}, out{};
  for (int y = 0; y < 8; ++y)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int x = 0; x < 8; ++x) acc += b[u][x] * in[y * 8 + x];
      tmp[y * 8 + u] = acc;
    }
  for (int v = 0; v < 8; ++v)
    for (int u = 0; u < 8; ++u) {
      double acc = 0.0;
      for (int y = 0; y < 8; ++y) acc += b[v][y] * tmp[y * 8 + u];
      out[v * 8 + u] = acc;
    }
  return out;
}

std::array<double, 64> idct8x8(const std::array<double, 64>& in) {
  const auto& b = dct_basis().cosines;
  std::array<double, 64> tmp{}, out{};
  for (int v = 0; v < 8; ++v)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int u = 0; u < 8; ++u) acc += b[u][x] * in[v * 8 + u];
      tmp[v * 8 + x] = acc;
    }
  for (int y = 0; y < 8; ++y)
    for (int x = 0; x < 8; ++x) {
      double acc = 0.0;
      for (int v = 0; v < 8; ++v) acc += b[v][y] * tmp[v * 8 + x];
      out[y * 8 + x] = acc;
    }
  return out;
}

// Reversible CDF 5/3 lifting on a strided 1-D signal of even length n.
int mirror53(int i, int n) {
  if (i < 0) return -i;
  if (i >= n) return 2 * (n - 1) - i;
  return i;
}

void lift53_forward(int* x, int n, int stride, std::vector<int>& scratch) {
  scratch.assign(std::size_t(n), 0);
  for (int i = 0; i < n; ++i) scratch[std::size_t(i)] = x[i * stride];
  auto at = [&](int i) { return scratch[std::size_t(mirror53(i, n))]; };
  for (int i = 1; i < n; i += 2) scratch[std::size_t(i)] -= (at(i - 1) + at(i + 1)) >> 1;
  for (int i = 0; i < n; i += 2) scratch[std::size_t(i)] += (at(i - 1) + at(i + 1) + 2) >> 2;
  const int half = n / 2;
  for (int i = 0; i < half; ++i) {
    x[i * stride] = scratch[std::size_t(2 * i)];
    x[(half + i) * stride] = scratch[std::size_t(2 * i + 1)];
  }
}

void lift53_inverse(int* x, int n, int stride, std::vector<int>& scratch) {
  scratch.assign(std::size_t(n), 0);
  const int half = n / 2;
  for (int i = 0; i < half; ++i) {
    scratch[std::size_t(2 * i)] = x[i * stride];
    scratch[std::size_t(2 * i + 1)] = x[(half + i) * stride];
  }
  auto at = [&](int i) { return scratch[std::size_t(mirror53(i, n))]; };
  for (int i = 0; i < n; i += 2) scratch[std::size_t(i)] -= (at(i - 1) + at(i + 1) + 2) >> 2;
  for (int i = 1; i < n; i += 2) scratch[std::size_t(i)] += (at(i - 1) + at(i + 1)) >> 1;
  for (int i = 0; i < n; ++i) x[i * stride] = scratch[std::size_t(i)];
}

GrayImage pad_to_multiple(const GrayImage& img, int m) {
  const int w = (img.width() + m - 1) / m * m, h = (img.height() + m - 1) / m * m;
  if (w == img.width() && h == img.height()) return img;
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out.at(r, c) = img.at(std::min(r, img.height() - 1), std::min(c, img.width() - 1));
  return out;
}

GrayImage crop_to(const GrayImage& img, int w, int h) {
  if (img.width() == w && img.height() == h) return img;
  GrayImage out(w, h);
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) out.at(r, c) = img.at(r, c);
  return out;
}

}  // namespace

std::string_view to_string(OpKind kind) { return kKindNames[static_cast<std::size_t>(kind)]; }

std::optional<OpKind> parse_op_kind(std::string_view name) {
  for (std::size_t i = 0; i < kKindNames.size(); ++i)
    if (kKindNames[i] == name) return static_cast<OpKind>(i);
  return std::nullopt;
}

std::string spec_to_json(const OperationSpec& spec) {
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  std::visit(
      [&](const auto& p) {
        using T = std::decay_t<decltype(p)>;
        if constexpr (std::is_same_v<T, params::Gamma>) {
          params["gamma"] = p.gamma;
        } else if constexpr (std::is_same_v<T, params::Unsharp>) {
          params["sigma"] = p.sigma;
          params["lambda"] = p.lambda;
        } else if constexpr (std::is_same_v<T, params::Window>) {
          params["hsize"] = p.hsize;
        } else if constexpr (std::is_same_v<T, params::Gaussian>) {
          params["hsize"] = p.hsize;
          params["sigma"] = p.sigma;
        } else if constexpr (std::is_same_v<T, params::Scale>) {
          params["factor"] = p.factor;
        } else if constexpr (std::is_same_v<T, params::Rotate>) {
          params["degrees"] = p.degrees;
        } else if constexpr (std::is_same_v<T, params::Jpeg>) {
          params["quality"] = p.quality;
        } else if constexpr (std::is_same_v<T, params::Jp2>) {
          params["ratio"] = p.ratio;
        }
      },
      spec.params);
  nlohmann::ordered_json j;
  j["kind"] = std::string(to_string(spec.kind));
  j["params"] = std::move(params);
  return j.dump();
}

OperationSpec spec_from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::Parse, std::string("operation spec: ") + e.what());
  }
  if (!j.is_object() || !j.contains("kind") || !j["kind"].is_string())
    fail(ErrorCode::Parse, "operation spec: missing \"kind\"");
  const auto kind = parse_op_kind(j["kind"].get<std::string>());
  if (!kind) fail(ErrorCode::Parse, "operation spec: unknown kind " + j["kind"].get<std::string>());
  const nlohmann::json p = j.value("params", nlohmann::json::object());
  auto num = [&](const char* key) -> double {
    if (!p.contains(key) || !p[key].is_number()) fail(ErrorCode::Parse, std::string("operation spec: missing ") + key);
    return p[key].get<double>();
  };
  auto integer = [&](const char* key) -> int {
    if (!p.contains(key) || !p[key].is_number_integer())
      fail(ErrorCode::Parse, std::string("operation spec: missing integer ") + key);
    return p[key].get<int>();
  };
  OperationSpec spec{*kind, params::HistEq{}};
  switch (*kind) {
    case OpKind::GC: spec.params = params::Gamma{num("gamma")}; break;
    case OpKind::HE: break;
    case OpKind::UM: spec.params = params::Unsharp{num("sigma"), num("lambda")}; break;
    case OpKind::MeanF:
    case OpKind::MedF:
    case OpKind::WF: spec.params = params::Window{integer("hsize")}; break;
    case OpKind::GF: spec.params = params::Gaussian{integer("hsize"), num("sigma")}; break;
    case OpKind::Sca: spec.params = params::Scale{num("factor")}; break;
    case OpKind::Rot: spec.params = params::Rotate{num("degrees")}; break;
    case OpKind::JPEG: spec.params = params::Jpeg{integer("quality")}; break;
    case OpKind::JP2: spec.params = params::Jp2{num("ratio")}; break;
  }
  return spec;
}

GrayImage gamma_correct(const GrayImage& img, double gamma) {
  if (!(gamma > 0.0) || !std::isfinite(gamma)) fail(ErrorCode::InvalidArgument, "gamma must be positive");
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) lut[std::size_t(v)] = to_pixel(255.0 * std::pow(v / 255.0, gamma));
  GrayImage out = img;
  for (auto& p : out.pixels()) p = lut[p];
  return out;
}

GrayImage hist_equalize(const GrayImage& img) {
  std::array<std::uint64_t, 256> hist{};
  for (auto p : img.pixels()) ++hist[p];
  std::array<std::uint8_t, 256> lut{};
  std::uint64_t cumulative = 0;
  const double total = double(img.size());
  for (std::size_t v = 0; v < 256; ++v) {
    cumulative += hist[v];
    lut[v] = to_pixel(255.0 * double(cumulative) / total);
  }
  GrayImage out = img;
  for (auto& p : out.pixels()) p = lut[p];
  return out;
}

Kernel mean_kernel(int hsize) {
  if (hsize < 1 || hsize % 2 == 0) fail(ErrorCode::InvalidArgument, "kernel side must be odd");
  return Kernel(std::size_t(hsize * hsize), 1.0 / double(hsize * hsize));
}

Kernel gaussian_kernel(int hsize, double sigma) {
  if (hsize < 1 || hsize % 2 == 0) fail(ErrorCode::InvalidArgument, "kernel side must be odd");
  if (!(sigma > 0.0)) fail(ErrorCode::InvalidArgument, "sigma must be positive");
  const int half = hsize / 2;
  Kernel k(std::size_t(hsize * hsize));
  double sum = 0.0;
  for (int r = -half; r <= half; ++r)
    for (int c = -half; c <= half; ++c) {
      const double v = std::exp(-(r * r + c * c) / (2.0 * sigma * sigma));
      k[std::size_t((r + half) * hsize + (c + half))] = v;
      sum += v;
    }
  for (auto& v : k) v /= sum;
  return k;
}

GrayImage linear_filter(const GrayImage& img, const Kernel& kernel) {
  double sum = 0.0;
  for (double v : kernel) sum += v;
  if (std::abs(sum - 1.0) > 1e-9) fail(ErrorCode::InvalidArgument, "kernel must sum to 1");
  return from_real(img.width(), img.height(), correlate(img, kernel));
}

GrayImage mean_filter(const GrayImage& img, int hsize) {
  require_hsize(hsize);
  return linear_filter(img, mean_kernel(hsize));
}

GrayImage gaussian_filter(const GrayImage& img, int hsize, double sigma) {
  require_hsize(hsize);
  return linear_filter(img, gaussian_kernel(hsize, sigma));
}

GrayImage unsharp_mask(const GrayImage& img, double sigma, double lambda) {
  if (!(sigma > 0.0) || !(lambda > 0.0)) fail(ErrorCode::InvalidArgument, "unsharp mask needs sigma > 0 and lambda > 0");
  const int hsize = 2 * int(std::ceil(2.0 * sigma)) + 1;
  const auto blurred = correlate(img, gaussian_kernel(hsize, sigma));
  std::vector<double> out(img.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double v = img.pixels()[i];
    out[i] = v + lambda * (v - blurred[i]);
  }
  return from_real(img.width(), img.height(), out);
}

GrayImage median_filter(const GrayImage& img, int hsize) {
  require_hsize(hsize);
  const int half = hsize / 2;
  GrayImage out(img.width(), img.height());
  std::vector<std::uint8_t> window(static_cast<std::size_t>(hsize * hsize));
  const auto mid = window.begin() + long(window.size() / 2);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) {
      std::size_t n = 0;
      for (int dr = -half; dr <= half; ++dr)
        for (int dc = -half; dc <= half; ++dc) window[n++] = img.mirrored(r + dr, c + dc);
      std::nth_element(window.begin(), mid, window.end());
      out.at(r, c) = *mid;
    }
  return out;
}

GrayImage wiener_filter(const GrayImage& img, int hsize) {
  require_hsize(hsize);
  const int half = hsize / 2;
  const double area = double(hsize * hsize);
  const std::size_t n = img.size();
  std::vector<double> mean(n), var(n);
  for (int r = 0; r < img.height(); ++r)
    for (int c = 0; c < img.width(); ++c) {
      double s = 0.0, s2 = 0.0;
      for (int dr = -half; dr <= half; ++dr)
        for (int dc = -half; dc <= half; ++dc) {
          const double v = img.mirrored(r + dr, c + dc);
          s += v;
          s2 += v * v;
        }
      const std::size_t i = std::size_t(r) * std::size_t(img.width()) + std::size_t(c);
      mean[i] = s / area;
      var[i] = std::max(0.0, s2 / area - mean[i] * mean[i]);
    }
  double noise = 0.0;
  for (double v : var) noise += v;
  noise /= double(n);

  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double denom = std::max(var[i], noise);
    const double gain = denom > 0.0 ? std::max(0.0, var[i] - noise) / denom : 0.0;
    out[i] = mean[i] + gain * (img.pixels()[i] - mean[i]);
  }
  return from_real(img.width(), img.height(), out);
}

GrayImage scale_image(const GrayImage& img, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) fail(ErrorCode::InvalidArgument, "scale factor must be positive");
  const int out_w = int(std::round(factor * img.width()));
  const int out_h = int(std::round(factor * img.height()));
  require_output_size(out_w, out_h, img);
  const double sx = double(img.width()) / out_w, sy = double(img.height()) / out_h;
  GrayImage out(out_w, out_h);
  for (int r = 0; r < out_h; ++r)
    for (int c = 0; c < out_w; ++c) out.at(r, c) = to_pixel(bilinear(img, (c + 0.5) * sx - 0.5, (r + 0.5) * sy - 0.5));
  return out;
}

std::pair<int, int> rotated_crop_size(int width, int height, double degrees) {
  // Pixel centers span (n - 1) in each axis.
  const double w = width - 1.0, h = height - 1.0;
  const double angle = degrees * std::numbers::pi / 180.0;
  const double sin_a = std::abs(std::sin(angle)), cos_a = std::abs(std::cos(angle));
  const bool width_longer = w >= h;
  const double side_long = width_longer ? w : h, side_short = width_longer ? h : w;
  double wr, hr;
  if (side_short <= 2.0 * sin_a * cos_a * side_long || std::abs(sin_a - cos_a) < 1e-10) {
    const double x = 0.5 * side_short;
    wr = width_longer ? x / sin_a : x / cos_a;
    hr = width_longer ? x / cos_a : x / sin_a;
  } else {
    const double cos_2a = cos_a * cos_a - sin_a * sin_a;
    wr = (w * cos_a - h * sin_a) / cos_2a;
    hr = (h * cos_a - w * sin_a) / cos_2a;
  }
  return {int(std::floor(wr + 1e-9)) + 1, int(std::floor(hr + 1e-9)) + 1};
}

GrayImage rotate_image(const GrayImage& img, double degrees) {
  if (!std::isfinite(degrees)) fail(ErrorCode::InvalidArgument, "rotation angle must be finite");
  const auto [out_w, out_h] = rotated_crop_size(img.width(), img.height(), degrees);
  require_output_size(out_w, out_h, img);
  const double angle = degrees * std::numbers::pi / 180.0;
  const double cos_t = std::cos(angle), sin_t = std::sin(angle);
  const double src_cx = (img.width() - 1) / 2.0, src_cy = (img.height() - 1) / 2.0;
  const double dst_cx = (out_w - 1) / 2.0, dst_cy = (out_h - 1) / 2.0;
  GrayImage out(out_w, out_h);
  for (int r = 0; r < out_h; ++r)
    for (int c = 0; c < out_w; ++c) {
      const double u = c - dst_cx, v = r - dst_cy;
      out.at(r, c) = to_pixel(bilinear(img, src_cx + u * cos_t - v * sin_t, src_cy + u * sin_t + v * cos_t));
    }
  return out;
}

std::array<int, 64> jpeg_quant_table(int quality) {
  if (quality < 1 || quality > 100) fail(ErrorCode::InvalidArgument, "JPEG quality must be in [1, 100]");
  const int scale = quality < 50 ? 5000 / quality : 200 - 2 * quality;
  std::array<int, 64> table{};
  for (std::size_t i = 0; i < 64; ++i) table[i] = std::clamp((kLuminanceTable[i] * scale + 50) / 100, 1, 255);
  return table;
}

std::array<double, 64> jpeg_quantize_block(const std::array<double, 64>& block, const std::array<int, 64>& table) {
  auto coeffs = dct8x8(block);
  for (std::size_t i = 0; i < 64; ++i) coeffs[i] = std::round(coeffs[i] / table[i]) * table[i];
  return coeffs;
}

GrayImage jpeg_proxy(const GrayImage& img, int quality) {
  const auto table = jpeg_quant_table(quality);
  GrayImage padded = pad_to_multiple(img, 8);
  GrayImage out(padded.width(), padded.height());
  std::array<double, 64> block{};
  for (int br = 0; br < padded.height(); br += 8)
    for (int bc = 0; bc < padded.width(); bc += 8) {
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) block[std::size_t(y * 8 + x)] = padded.at(br + y, bc + x) - 128.0;
      const auto restored = idct8x8(jpeg_quantize_block(block, table));
      for (int y = 0; y < 8; ++y)
        for (int x = 0; x < 8; ++x) out.at(br + y, bc + x) = to_pixel(restored[std::size_t(y * 8 + x)] + 128.0);
    }
  return crop_to(out, img.width(), img.height());
}

int jp2_step(double ratio) {
  if (!(ratio >= 1.0) || !std::isfinite(ratio)) fail(ErrorCode::InvalidArgument, "JP2 ratio must be >= 1");
  return int(std::round(ratio));
}

GrayImage jp2_proxy(const GrayImage& img, double ratio) {
  const int step = jp2_step(ratio);
  const int w = img.width(), h = img.height();
  if (w % 4 != 0 || h % 4 != 0) fail(ErrorCode::InvalidArgument, "JP2 proxy needs dimensions divisible by 4");
  std::vector<int> coeffs(img.pixels().begin(), img.pixels().end());
  std::vector<int> scratch;
  constexpr int kLevels = 2;
  for (int level = 0, lw = w, lh = h; level < kLevels; ++level, lw /= 2, lh /= 2) {
    for (int r = 0; r < lh; ++r) lift53_forward(&coeffs[std::size_t(r) * w], lw, 1, scratch);
    for (int c = 0; c < lw; ++c) lift53_forward(&coeffs[std::size_t(c)], lh, w, scratch);
  }
  // Dead-zone quantization of every detail subband; LL of the last level is kept.
  const int ll_w = w >> kLevels, ll_h = h >> kLevels;
  for (int r = 0; r < h; ++r)
    for (int c = 0; c < w; ++c) {
      if (r < ll_h && c < ll_w) continue;
      int& v = coeffs[std::size_t(r) * w + std::size_t(c)];
      const int magnitude = std::abs(v) / step;
      const int restored = magnitude == 0 ? 0 : magnitude * step + step / 2;
      v = v < 0 ? -restored : restored;
    }
  for (int level = kLevels - 1; level >= 0; --level) {
    const int lw = w >> level, lh = h >> level;
    for (int c = 0; c < lw; ++c) lift53_inverse(&coeffs[std::size_t(c)], lh, w, scratch);
    for (int r = 0; r < lh; ++r) lift53_inverse(&coeffs[std::size_t(r) * w], lw, 1, scratch);
  }
  GrayImage out(w, h);
  for (std::size_t i = 0; i < coeffs.size(); ++i) out.pixels()[i] = std::uint8_t(std::clamp(coeffs[i], 0, 255));
  return out;
}

OperationSpec sample_spec(OpKind kind, std::uint64_t seed) {
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(kind)));
  auto pick = [&](const auto& values) { return values[rng.below(values.size())]; };
  OperationSpec spec{kind, params::HistEq{}};
  switch (kind) {
    case OpKind::GC: spec.params = params::Gamma{pick(kGammaValues)}; break;
    case OpKind::HE: break;
    case OpKind::UM: {
      const double sigma = rng.uniform(0.5, 1.5);
      spec.params = params::Unsharp{sigma, rng.uniform(0.5, 1.5)};
      break;
    }
    case OpKind::MeanF:
    case OpKind::MedF:
    case OpKind::WF: spec.params = params::Window{pick(kWindowSizes)}; break;
    case OpKind::GF: {
      const int hsize = pick(kWindowSizes);
      spec.params = params::Gaussian{hsize, rng.uniform(0.8, 1.6)};
      break;
    }
    case OpKind::Sca: {
      const auto i = rng.below(kUpscalePercent.size() + kDownscalePercent.size());
      const double factor = i < kUpscalePercent.size() ? 1.0 + kUpscalePercent[i] / 100.0
                                                       : 1.0 - kDownscalePercent[i - kUpscalePercent.size()] / 100.0;
      spec.params = params::Scale{factor};
      break;
    }
    case OpKind::Rot: spec.params = params::Rotate{double(pick(kRotationDegrees))}; break;
    case OpKind::JPEG: spec.params = params::Jpeg{75 + int(rng.below(25))}; break;
    case OpKind::JP2: spec.params = params::Jp2{rng.uniform(2.0, 8.0)}; break;
  }
  return spec;
}

GrayImage apply(const OperationSpec& spec, const GrayImage& img) {
  switch (spec.kind) {
    case OpKind::GC: return gamma_correct(img, params_as<params::Gamma>(spec).gamma);
    case OpKind::HE: return hist_equalize(img);
    case OpKind::UM: {
      const auto& p = params_as<params::Unsharp>(spec);
      return unsharp_mask(img, p.sigma, p.lambda);
    }
    case OpKind::MeanF: return mean_filter(img, params_as<params::Window>(spec).hsize);
    case OpKind::GF: {
      const auto& p = params_as<params::Gaussian>(spec);
      return gaussian_filter(img, p.hsize, p.sigma);
    }
    case OpKind::MedF: return median_filter(img, params_as<params::Window>(spec).hsize);
    case OpKind::WF: return wiener_filter(img, params_as<params::Window>(spec).hsize);
    case OpKind::Sca: return scale_image(img, params_as<params::Scale>(spec).factor);
    case OpKind::Rot: return rotate_image(img, params_as<params::Rotate>(spec).degrees);
    case OpKind::JPEG: return jpeg_proxy(img, params_as<params::Jpeg>(spec).quality);
    case OpKind::JP2: {
      const double ratio = params_as<params::Jp2>(spec).ratio;
      const GrayImage padded = pad_to_multiple(img, 4);
      return crop_to(jp2_proxy(padded, ratio), img.width(), img.height());
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown operation kind");
}

}  // namespace opstego
