/*
 * opstego: detection and identification of image processing operations
 * with steganalytic features.
 *
 * C interface. Objects are opaque handles created and destroyed by the
 * library. Every fallible call returns an opstego_status; on failure,
 * opstego_last_error() describes the error for the calling thread.
 * Strings returned through char** are owned by the caller and released with
 * opstego_string_free().
 */
#ifndef OPSTEGO_OPSTEGO_H
#define OPSTEGO_OPSTEGO_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(OPSTEGO_BUILD)
#    define OPSTEGO_API __declspec(dllexport)
#  else
#    define OPSTEGO_API __declspec(dllimport)
#  endif
#else
#  define OPSTEGO_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum opstego_status {
  OPSTEGO_OK = 0,
  OPSTEGO_E_INVALID_ARGUMENT = 1,
  OPSTEGO_E_PARSE = 2,
  OPSTEGO_E_IO = 3,
  OPSTEGO_E_DIMENSION = 4,
  OPSTEGO_E_DEGENERATE = 5,
  OPSTEGO_E_INTERNAL = 6
} opstego_status;

/* PSNR reported for identical images. */
#define OPSTEGO_PSNR_INFINITY 999.0

typedef struct opstego_image opstego_image;
typedef struct opstego_model opstego_model;

OPSTEGO_API const char* opstego_version(void);
OPSTEGO_API const char* opstego_last_error(void);
OPSTEGO_API void opstego_string_free(char* s);

/* Worker threads for data-parallel stages; 0 = hardware concurrency.
 * Results do not depend on this setting. */
OPSTEGO_API void opstego_set_threads(unsigned threads);

/* Images (8-bit grayscale, row-major). */
OPSTEGO_API opstego_status opstego_image_create(int width, int height, const uint8_t* pixels, opstego_image** out);
OPSTEGO_API opstego_status opstego_image_load_pgm(const char* path, opstego_image** out);
OPSTEGO_API opstego_status opstego_image_decode_pgm(const uint8_t* bytes, size_t len, opstego_image** out);
OPSTEGO_API opstego_status opstego_image_save_pgm(const opstego_image* img, const char* path);
OPSTEGO_API void opstego_image_destroy(opstego_image* img);
OPSTEGO_API int opstego_image_width(const opstego_image* img);
OPSTEGO_API int opstego_image_height(const opstego_image* img);
OPSTEGO_API const uint8_t* opstego_image_pixels(const opstego_image* img);

OPSTEGO_API opstego_status opstego_synth_image(int width, int height, uint64_t seed, uint64_t index,
                                               opstego_image** out);
OPSTEGO_API opstego_status opstego_pair_stats(const opstego_image* a, const opstego_image* b,
                                              double* modification_ratio, double* psnr_db);

/* Operations. Specs are JSON: {"kind": "MedF", "params": {"hsize": 3}}. */
OPSTEGO_API opstego_status opstego_sample_spec(const char* kind, uint64_t seed, char** spec_json);
OPSTEGO_API opstego_status opstego_apply(const opstego_image* img, const char* spec_json, opstego_image** out);

/* Backward/forward difference joint probability as a CSV grid. */
OPSTEGO_API opstego_status opstego_jointprob_csv(const opstego_image* img, int bound, char** csv);
OPSTEGO_API opstego_status opstego_extrema_ratio(const opstego_image* img, double* ratio);

/* Features. feature_set is "spam686" or "minirm". *dim always receives the
 * vector length; a buffer shorter than that fails with OPSTEGO_E_DIMENSION. */
OPSTEGO_API opstego_status opstego_feature_dim(const char* feature_set, size_t* dim);
OPSTEGO_API opstego_status opstego_extract(const opstego_image* img, const char* feature_set, double* out,
                                           size_t capacity, size_t* dim);

/* Trained pairwise models. Labels are 1..k+1. */
OPSTEGO_API opstego_status opstego_model_load(const char* path, opstego_model** out);
OPSTEGO_API void opstego_model_destroy(opstego_model* model);
OPSTEGO_API int opstego_model_classes(const opstego_model* model);
OPSTEGO_API size_t opstego_model_dim(const opstego_model* model);
OPSTEGO_API size_t opstego_model_pair_count(const opstego_model* model);
OPSTEGO_API opstego_status opstego_model_predict(const opstego_model* model, const double* features, size_t dim,
                                                 int* label);

/* Pipeline stages. Outputs use fixed names inside out_dir: manifest.json,
 * corpus.txt, stats.csv, jointprob_<label>.csv, features_<set>.bin,
 * model_<set>.json, confusion.csv, metrics.json. */
OPSTEGO_API opstego_status opstego_config_normalize(const char* config_json, char** normalized_json);
OPSTEGO_API opstego_status opstego_gen(const char* config_json);
OPSTEGO_API opstego_status opstego_apply_file(const char* input_pgm, const char* spec_json, const char* output_pgm);
OPSTEGO_API opstego_status opstego_stats(const char* manifest_path, const char* out_dir);
OPSTEGO_API opstego_status opstego_diag(const char* manifest_path, int class_label, int bound, const char* out_dir);
OPSTEGO_API opstego_status opstego_extract_manifest(const char* manifest_path, const char* feature_set,
                                                    const char* out_dir);
/* report_json (optional) receives the per-pair L, d_sub and OOB error. */
OPSTEGO_API opstego_status opstego_train(const char* feature_path, const char* config_json, const char* out_dir,
                                         char** report_json);
/* trials <= 0 uses the count stored in the model. */
OPSTEGO_API opstego_status opstego_eval(const char* model_path, const char* feature_path, int trials,
                                        const char* out_dir, char** metrics_json);

#ifdef __cplusplus
}
#endif

#endif /* OPSTEGO_OPSTEGO_H */
