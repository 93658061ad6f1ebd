/* C interface to the edgeal library.
 *
 * Every function returns an edgeal_status. On failure the thread-local
 * message from edgeal_last_error() describes the cause. Objects are opaque
 * handles owned by the caller and released with the matching *_free call;
 * passing NULL to a *_free function is a no-op. */
#ifndef EDGEAL_EDGEAL_H
#define EDGEAL_EDGEAL_H

#include <stddef.h>
#include <stdint.h>

#if defined(EDGEAL_BUILDING_LIBRARY)
#define EDGEAL_API __attribute__((visibility("default")))
#else
#define EDGEAL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum edgeal_status {
  EDGEAL_OK = 0,
  EDGEAL_INVALID_ARGUMENT = 1,
  EDGEAL_IO = 2,
  EDGEAL_FORMAT = 3,
  EDGEAL_DIMENSION = 4,
  EDGEAL_RANGE = 5,
  EDGEAL_STATE = 6,
  EDGEAL_INTERNAL = 7
} edgeal_status;

typedef enum edgeal_dtype { EDGEAL_U8 = 0, EDGEAL_F32 = 1 } edgeal_dtype;

typedef struct edgeal_tensor edgeal_tensor;
typedef struct edgeal_superpixels edgeal_superpixels;
typedef struct edgeal_config edgeal_config;

EDGEAL_API const char* edgeal_version(void);
EDGEAL_API const char* edgeal_status_name(edgeal_status status);
/* Message for the most recent failure on this thread; "" if none. */
EDGEAL_API const char* edgeal_last_error(void);

/* Tensors: rank 2 (H,W) or rank 3 (C,H,W), row-major. */
EDGEAL_API edgeal_status edgeal_tensor_create_u8(size_t rank, const uint32_t* dims, const uint8_t* data,
                                                 edgeal_tensor** out);
EDGEAL_API edgeal_status edgeal_tensor_create_f32(size_t rank, const uint32_t* dims, const float* data,
                                                  edgeal_tensor** out);
EDGEAL_API edgeal_status edgeal_tensor_read(const char* path, edgeal_tensor** out);
EDGEAL_API edgeal_status edgeal_tensor_write(const edgeal_tensor* tensor, const char* path);
EDGEAL_API void edgeal_tensor_free(edgeal_tensor* tensor);
EDGEAL_API edgeal_dtype edgeal_tensor_dtype(const edgeal_tensor* tensor);
EDGEAL_API size_t edgeal_tensor_rank(const edgeal_tensor* tensor);
/* 0 when axis is out of range. */
EDGEAL_API uint32_t edgeal_tensor_dim(const edgeal_tensor* tensor, size_t axis);
EDGEAL_API size_t edgeal_tensor_element_count(const edgeal_tensor* tensor);
/* NULL when the dtype does not match. */
EDGEAL_API const uint8_t* edgeal_tensor_data_u8(const edgeal_tensor* tensor);
EDGEAL_API const float* edgeal_tensor_data_f32(const edgeal_tensor* tensor);

/* Min-max normalised Sobel magnitude of an image (u8 scaled by 1/255, or f32). */
EDGEAL_API edgeal_status edgeal_edges(const edgeal_tensor* image, edgeal_tensor** out_edges);

/* Edge entropy and edge divergence maps from D stochastic passes (each C,H,W
 * f32). Either output pointer may be NULL. */
EDGEAL_API edgeal_status edgeal_score(const edgeal_tensor* image, const edgeal_tensor* const* passes,
                                      size_t pass_count, edgeal_tensor** out_entropy,
                                      edgeal_tensor** out_divergence);

EDGEAL_API edgeal_status edgeal_superpixels_compute(const edgeal_tensor* image, size_t target_count,
                                                    size_t iterations, uint64_t seed,
                                                    edgeal_superpixels** out);
EDGEAL_API edgeal_status edgeal_superpixels_read(const char* path, edgeal_superpixels** out);
EDGEAL_API edgeal_status edgeal_superpixels_write(const edgeal_superpixels* sp, const char* path);
EDGEAL_API void edgeal_superpixels_free(edgeal_superpixels* sp);
EDGEAL_API size_t edgeal_superpixels_region_count(const edgeal_superpixels* sp);
EDGEAL_API size_t edgeal_superpixels_height(const edgeal_superpixels* sp);
EDGEAL_API size_t edgeal_superpixels_width(const edgeal_superpixels* sp);
/* Copies height*width region ids into `labels`; fails if capacity is short. */
EDGEAL_API edgeal_status edgeal_superpixels_labels(const edgeal_superpixels* sp, uint32_t* labels,
                                                   size_t capacity);

/* Dice between two u8 class maps. `per_class` (length `classes`) may be NULL;
 * classes absent from both maps are reported as NaN. */
EDGEAL_API edgeal_status edgeal_dice(const edgeal_tensor* prediction, const edgeal_tensor* truth, size_t classes,
                                     double* out_mean, double* per_class);

/* Evaluates a saved model on one split ("train", "val" or "test") of a
 * dataset. Feature standardisation uses the train split. */
EDGEAL_API edgeal_status edgeal_evaluate_model(const char* dataset_root, const char* model_path,
                                               const char* split, double* out_mean, double* per_class,
                                               size_t per_class_capacity);

EDGEAL_API edgeal_status edgeal_synth(const char* root, size_t images, size_t height, size_t width,
                                      size_t classes, double noise, uint64_t seed);

/* Experiment configuration. Keys accept '-' or '_' separators. */
EDGEAL_API edgeal_status edgeal_config_create(edgeal_config** out);
EDGEAL_API void edgeal_config_free(edgeal_config* config);
EDGEAL_API edgeal_status edgeal_config_load(edgeal_config* config, const char* path);
EDGEAL_API edgeal_status edgeal_config_set(edgeal_config* config, const char* key, const char* value);
EDGEAL_API edgeal_status edgeal_config_validate(const edgeal_config* config);

typedef void (*edgeal_log_fn)(const char* line, void* user);

/* Runs the active-learning loop; writes curves.csv and summary.csv under the
 * configured output directory. `log` may be NULL. */
EDGEAL_API edgeal_status edgeal_run(const edgeal_config* config, edgeal_log_fn log, void* user);

/* Reads a curves.csv, optionally writes summary CSV, and renders the aligned
 * text table into `buffer`. `needed` receives the table length plus the
 * terminator; pass buffer=NULL to query it. */
EDGEAL_API edgeal_status edgeal_summarize(const char* curves_csv, const char* summary_csv, char* buffer,
                                          size_t capacity, size_t* needed);

#ifdef __cplusplus
}
#endif

#endif
