#define OPSTEGO_BUILD 1
#include "opstego/opstego.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <new>
#include <string>

#include "core/classify.hpp"
#include "core/diag.hpp"
#include "core/error.hpp"
#include "core/features.hpp"
#include "core/image.hpp"
#include "core/ops.hpp"
#include "core/parallel.hpp"
#include "core/pipeline.hpp"

struct opstego_image {
  opstego::GrayImage img;
};

struct opstego_model {
  opstego::PairwiseModel model;
};

namespace {

thread_local std::string g_last_error;

opstego_status status_of(opstego::ErrorCode code) {
  switch (code) {
    case opstego::ErrorCode::InvalidArgument: return OPSTEGO_E_INVALID_ARGUMENT;
    case opstego::ErrorCode::Parse: return OPSTEGO_E_PARSE;
    case opstego::ErrorCode::Io: return OPSTEGO_E_IO;
    case opstego::ErrorCode::DimensionMismatch: return OPSTEGO_E_DIMENSION;
    case opstego::ErrorCode::Degenerate: return OPSTEGO_E_DEGENERATE;
  }
  return OPSTEGO_E_INTERNAL;
}

template <class F>
opstego_status guarded(F&& body) {
  try {
    g_last_error.clear();
    body();
    return OPSTEGO_OK;
  } catch (const opstego::Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return OPSTEGO_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return OPSTEGO_E_INTERNAL;
  }
}

void require(bool ok, const char* what) {
  if (!ok) opstego::fail(opstego::ErrorCode::InvalidArgument, what);
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

opstego::FeatureSet feature_set_of(const char* name) {
  require(name != nullptr, "feature set name is null");
  const auto set = opstego::parse_feature_set(name);
  if (!set) opstego::fail(opstego::ErrorCode::InvalidArgument, std::string("unknown feature set ") + name);
  return *set;
}

void emit(opstego_image** out, opstego::GrayImage img) {
  require(out != nullptr, "output handle is null");
  *out = new opstego_image{std::move(img)};
}

}  // namespace

extern "C" {

const char* opstego_version(void) { return "1.0.0"; }
const char* opstego_last_error(void) { return g_last_error.c_str(); }
void opstego_string_free(char* s) { std::free(s); }
void opstego_set_threads(unsigned threads) { opstego::set_worker_threads(threads); }

opstego_status opstego_image_create(int width, int height, const uint8_t* pixels, opstego_image** out) {
  return guarded([&] {
    require(pixels != nullptr, "pixels is null");
    require(width > 0 && height > 0, "image dimensions must be positive");
    const std::size_t n = std::size_t(width) * std::size_t(height);
    emit(out, opstego::GrayImage(width, height, std::vector<std::uint8_t>(pixels, pixels + n)));
  });
}

opstego_status opstego_image_load_pgm(const char* path, opstego_image** out) {
  return guarded([&] {
    require(path != nullptr, "path is null");
    emit(out, opstego::read_pgm_file(path));
  });
}

opstego_status opstego_image_decode_pgm(const uint8_t* bytes, size_t len, opstego_image** out) {
  return guarded([&] {
    require(bytes != nullptr || len == 0, "bytes is null");
    emit(out, opstego::load_pgm(std::span<const std::uint8_t>(bytes, len)));
  });
}

opstego_status opstego_image_save_pgm(const opstego_image* img, const char* path) {
  return guarded([&] {
    require(img != nullptr && path != nullptr, "null argument");
    opstego::write_pgm_file(path, img->img);
  });
}

void opstego_image_destroy(opstego_image* img) { delete img; }
int opstego_image_width(const opstego_image* img) { return img ? img->img.width() : 0; }
int opstego_image_height(const opstego_image* img) { return img ? img->img.height() : 0; }
const uint8_t* opstego_image_pixels(const opstego_image* img) { return img ? img->img.pixels().data() : nullptr; }

opstego_status opstego_synth_image(int width, int height, uint64_t seed, uint64_t index, opstego_image** out) {
  return guarded([&] { emit(out, opstego::synth_image(width, height, seed, index)); });
}

opstego_status opstego_pair_stats(const opstego_image* a, const opstego_image* b, double* modification_ratio,
                                  double* psnr_db) {
  return guarded([&] {
    require(a && b, "image is null");
    const auto s = opstego::pair_stats(a->img, b->img);
    if (modification_ratio) *modification_ratio = s.modification_ratio;
    if (psnr_db) *psnr_db = s.psnr_db;
  });
}

opstego_status opstego_sample_spec(const char* kind, uint64_t seed, char** spec_json) {
  return guarded([&] {
    require(kind != nullptr && spec_json != nullptr, "null argument");
    const auto k = opstego::parse_op_kind(kind);
    if (!k) opstego::fail(opstego::ErrorCode::InvalidArgument, std::string("unknown operation kind ") + kind);
    *spec_json = dup_string(opstego::spec_to_json(opstego::sample_spec(*k, seed)));
  });
}

opstego_status opstego_apply(const opstego_image* img, const char* spec_json, opstego_image** out) {
  return guarded([&] {
    require(img != nullptr && spec_json != nullptr, "null argument");
    emit(out, opstego::apply(opstego::spec_from_json(spec_json), img->img));
  });
}

opstego_status opstego_jointprob_csv(const opstego_image* img, int bound, char** csv) {
  return guarded([&] {
    require(img != nullptr && csv != nullptr, "null argument");
    *csv = dup_string(opstego::export_jointprob(opstego::joint_probability(img->img, bound)));
  });
}

opstego_status opstego_extrema_ratio(const opstego_image* img, double* ratio) {
  return guarded([&] {
    require(img != nullptr && ratio != nullptr, "null argument");
    *ratio = opstego::extrema_ratio(img->img);
  });
}

opstego_status opstego_feature_dim(const char* feature_set, size_t* dim) {
  return guarded([&] {
    require(dim != nullptr, "dim is null");
    *dim = std::size_t(opstego::feature_dim(feature_set_of(feature_set)));
  });
}

opstego_status opstego_extract(const opstego_image* img, const char* feature_set, double* out, size_t capacity,
                               size_t* dim) {
  return guarded([&] {
    require(img != nullptr, "image is null");
    const auto set = feature_set_of(feature_set);
    const auto n = std::size_t(opstego::feature_dim(set));
    if (dim) *dim = n;
    require(out != nullptr, "output buffer is null");
    if (capacity < n) opstego::fail(opstego::ErrorCode::DimensionMismatch, "output buffer too small for feature vector");
    const auto fv = opstego::extract(set, img->img);
    std::copy(fv.values.begin(), fv.values.end(), out);
  });
}

opstego_status opstego_model_load(const char* path, opstego_model** out) {
  return guarded([&] {
    require(path != nullptr && out != nullptr, "null argument");
    *out = new opstego_model{opstego::model_from_json(opstego::read_text_file(path))};
  });
}

void opstego_model_destroy(opstego_model* model) { delete model; }
int opstego_model_classes(const opstego_model* model) { return model ? model->model.k_plus_1 : 0; }
size_t opstego_model_dim(const opstego_model* model) { return model ? model->model.dim : 0; }
size_t opstego_model_pair_count(const opstego_model* model) { return model ? model->model.pairs.size() : 0; }

opstego_status opstego_model_predict(const opstego_model* model, const double* features, size_t dim, int* label) {
  return guarded([&] {
    require(model != nullptr && features != nullptr && label != nullptr, "null argument");
    *label = opstego::pairwise_predict(model->model, std::span<const double>(features, dim));
  });
}

opstego_status opstego_config_normalize(const char* config_json, char** normalized_json) {
  return guarded([&] {
    require(config_json != nullptr && normalized_json != nullptr, "null argument");
    *normalized_json = dup_string(opstego::config_to_json(opstego::config_from_json(config_json)));
  });
}

opstego_status opstego_gen(const char* config_json) {
  return guarded([&] {
    require(config_json != nullptr, "config is null");
    opstego::cmd_gen(opstego::config_from_json(config_json));
  });
}

opstego_status opstego_apply_file(const char* input_pgm, const char* spec_json, const char* output_pgm) {
  return guarded([&] {
    require(input_pgm && spec_json && output_pgm, "null argument");
    opstego::cmd_apply(input_pgm, opstego::spec_from_json(spec_json), output_pgm);
  });
}

opstego_status opstego_stats(const char* manifest_path, const char* out_dir) {
  return guarded([&] {
    require(manifest_path && out_dir, "null argument");
    opstego::cmd_stats(manifest_path, out_dir);
  });
}

opstego_status opstego_diag(const char* manifest_path, int class_label, int bound, const char* out_dir) {
  return guarded([&] {
    require(manifest_path && out_dir, "null argument");
    opstego::cmd_diag(manifest_path, class_label, bound, out_dir);
  });
}

opstego_status opstego_extract_manifest(const char* manifest_path, const char* feature_set, const char* out_dir) {
  return guarded([&] {
    require(manifest_path && out_dir, "null argument");
    opstego::cmd_extract(manifest_path, feature_set_of(feature_set), out_dir);
  });
}

opstego_status opstego_train(const char* feature_path, const char* config_json, const char* out_dir,
                             char** report_json) {
  return guarded([&] {
    require(feature_path && config_json && out_dir, "null argument");
    const auto report = opstego::cmd_train(feature_path, opstego::config_from_json(config_json), out_dir);
    if (report_json) *report_json = dup_string(report);
  });
}

opstego_status opstego_eval(const char* model_path, const char* feature_path, int trials, const char* out_dir,
                            char** metrics_json) {
  return guarded([&] {
    require(model_path && feature_path && out_dir, "null argument");
    const auto metrics = opstego::cmd_eval(model_path, feature_path,
                                           trials > 0 ? std::optional<int>(trials) : std::nullopt, out_dir);
    if (metrics_json) *metrics_json = dup_string(metrics);
  });
}

}  // extern "C"
