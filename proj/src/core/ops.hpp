#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "image.hpp"

namespace opstego {

/// Operation kinds in table order. Class labels in datasets are
/// 1 (original) followed by these, so kind k has label int(k) + 2.
enum class OpKind { GC, HE, UM, MeanF, GF, MedF, WF, Sca, Rot, JPEG, JP2 };

inline constexpr std::array<OpKind, 11> kAllOpKinds = {OpKind::GC,  OpKind::HE,  OpKind::UM,   OpKind::MeanF,
                                                       OpKind::GF,  OpKind::MedF, OpKind::WF,  OpKind::Sca,
                                                       OpKind::Rot, OpKind::JPEG, OpKind::JP2};

std::string_view to_string(OpKind kind);
std::optional<OpKind> parse_op_kind(std::string_view name);
inline int class_label(OpKind kind) { return static_cast<int>(kind) + 2; }

namespace params {
struct Gamma { double gamma = 1.0; };
struct HistEq {};
struct Unsharp { double sigma = 1.0; double lambda = 1.0; };
struct Window { int hsize = 3; };
struct Gaussian { int hsize = 3; double sigma = 1.0; };
struct Scale { double factor = 1.0; };
struct Rotate { double degrees = 0.0; };
struct Jpeg { int quality = 75; };
struct Jp2 { double ratio = 1.0; };
}  // namespace params

using OpParams = std::variant<params::Gamma, params::HistEq, params::Unsharp, params::Window, params::Gaussian,
                              params::Scale, params::Rotate, params::Jpeg, params::Jp2>;

struct OperationSpec {
  OpKind kind = OpKind::GC;
  OpParams params = params::Gamma{};
};

/// {"kind": "GC", "params": {"gamma": 0.5}}
std::string spec_to_json(const OperationSpec& spec);
OperationSpec spec_from_json(std::string_view json);

// Point operations.
GrayImage gamma_correct(const GrayImage& img, double gamma);
GrayImage hist_equalize(const GrayImage& img);

// Window operations; borders use symmetric padding.
using Kernel = std::vector<double>;  // square, row-major, odd side
Kernel mean_kernel(int hsize);
Kernel gaussian_kernel(int hsize, double sigma);
GrayImage linear_filter(const GrayImage& img, const Kernel& kernel);
GrayImage mean_filter(const GrayImage& img, int hsize);
GrayImage gaussian_filter(const GrayImage& img, int hsize, double sigma);
GrayImage unsharp_mask(const GrayImage& img, double sigma, double lambda);
GrayImage median_filter(const GrayImage& img, int hsize);
GrayImage wiener_filter(const GrayImage& img, int hsize);

// Geometric resampling, bilinear.
GrayImage scale_image(const GrayImage& img, double factor);
GrayImage rotate_image(const GrayImage& img, double degrees);

/// Size (width, height) of the largest centered axis-aligned rectangle of
/// pixel centers that stays inside a width x height source after rotation.
std::pair<int, int> rotated_crop_size(int width, int height, double degrees);

// Lossy compression proxies.
std::array<int, 64> jpeg_quant_table(int quality);
/// Forward DCT, quantize, dequantize for one level-shifted 8x8 block. Returns
/// the dequantized coefficients (integer multiples of the table steps).
std::array<double, 64> jpeg_quantize_block(const std::array<double, 64>& block, const std::array<int, 64>& table);
GrayImage jpeg_proxy(const GrayImage& img, int quality);

int jp2_step(double ratio);
GrayImage jp2_proxy(const GrayImage& img, double ratio);

/// Parameters drawn uniformly from the table ranges for `kind`.
OperationSpec sample_spec(OpKind kind, std::uint64_t seed);

GrayImage apply(const OperationSpec& spec, const GrayImage& img);

// Parameter sets used by sample_spec.
inline constexpr std::array<double, 10> kGammaValues = {0.5, 0.6, 0.7, 0.8, 0.9, 1.2, 1.4, 1.6, 1.8, 2.0};
inline constexpr std::array<int, 12> kUpscalePercent = {1, 3, 5, 10, 20, 30, 40, 50, 60, 70, 80, 90};
inline constexpr std::array<int, 11> kDownscalePercent = {1, 3, 5, 10, 15, 20, 25, 30, 35, 40, 45};
inline constexpr std::array<int, 11> kRotationDegrees = {1, 3, 5, 10, 15, 20, 25, 30, 35, 40, 45};
inline constexpr std::array<int, 3> kWindowSizes = {3, 5, 7};

}  // namespace opstego
