#ifndef OMNISPLAT_CAPI_H
#define OMNISPLAT_CAPI_H

/* C interface to the omnidirectional Gaussian splatting core. All functions
 * return osplat_status; on failure, osplat_last_error() describes the problem
 * for the calling thread. Handles are opaque and freed with their _free
 * function (NULL is always accepted). */

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum osplat_status {
    OSPLAT_OK = 0,
    OSPLAT_ERR_INVALID_ARGUMENT = 1,
    OSPLAT_ERR_IO = 2,
    OSPLAT_ERR_PARSE = 3,
    OSPLAT_ERR_VALIDATION = 4,
    OSPLAT_ERR_UNSUPPORTED = 5,
    OSPLAT_ERR_RUNTIME = 6
} osplat_status;

typedef struct osplat_cloud osplat_cloud;
typedef struct osplat_dataset osplat_dataset;
typedef struct osplat_config osplat_config;
typedef struct osplat_image osplat_image;
typedef struct osplat_report osplat_report;

const char* osplat_version(void);
/* Message for the last failing call on this thread; empty string if none. */
const char* osplat_last_error(void);
/* Worker threads used by rendering and training; n <= 0 restores the
 * default (OMNISPLAT_THREADS env var, else hardware concurrency). */
void osplat_set_threads(int n);

/* ---- Gaussian clouds (checkpoints) ---- */
osplat_status osplat_cloud_load(const char* path, osplat_cloud** out);
osplat_status osplat_cloud_save(const osplat_cloud* cloud, const char* path);
size_t osplat_cloud_count(const osplat_cloud* cloud);
void osplat_cloud_free(osplat_cloud* cloud);

/* ---- Datasets (manifest + images + points) ---- */
osplat_status osplat_dataset_load(const char* manifest_path, osplat_dataset** out);
size_t osplat_dataset_frame_count(const osplat_dataset* dataset);
size_t osplat_dataset_train_count(const osplat_dataset* dataset);
size_t osplat_dataset_test_count(const osplat_dataset* dataset);
osplat_status osplat_dataset_dims(const osplat_dataset* dataset, int* width, int* height);
/* Row-major 4x4 world-to-camera transform of frame `index`. */
osplat_status osplat_dataset_pose(const osplat_dataset* dataset, size_t index,
                                  double transform_cw[16]);
void osplat_dataset_free(osplat_dataset* dataset);

/* ---- Training configuration ---- */
osplat_status osplat_config_create(osplat_config** out); /* defaults */
osplat_status osplat_config_load(const char* path, osplat_config** out);
/* Sets one field by name, e.g. ("iterations", "2000"). Unknown keys fail. */
osplat_status osplat_config_set(osplat_config* config, const char* key, const char* value);
void osplat_config_free(osplat_config* config);

/* ---- Training ---- */
typedef void (*osplat_progress_fn)(void* user, long iteration, double loss, size_t gaussians);
/* Runs the reconstruction loop on the dataset's train split. Writes
 * checkpoints, the optimizer-state sidecar and a metrics log under
 * output_dir. progress may be NULL. On success *out (if not NULL) receives
 * the final cloud. */
osplat_status osplat_train(const osplat_dataset* dataset, const osplat_config* config,
                           const char* output_dir, osplat_progress_fn progress, void* user,
                           osplat_cloud** out);

/* ---- Rendering ---- */
osplat_status osplat_render(const osplat_cloud* cloud, const double transform_cw[16], int width,
                            int height, osplat_image** out);
/* Resamples an equirectangular panorama into a pinhole view. yaw/pitch in
 * radians; yaw turns toward +X, positive pitch looks up. */
osplat_status osplat_perspective_crop(const osplat_image* pano, double fx, double fy, double cx,
                                      double cy, int width, int height, double yaw, double pitch,
                                      osplat_image** out);

/* ---- Images ---- */
osplat_status osplat_image_load(const char* path, osplat_image** out);
osplat_status osplat_image_save(const osplat_image* image, const char* path);
int osplat_image_width(const osplat_image* image);
int osplat_image_height(const osplat_image* image);
/* Row-major H x W x 3 doubles in [0, 1]. Valid until the image is freed. */
const double* osplat_image_pixels(const osplat_image* image);
void osplat_image_free(osplat_image* image);

/* PSNR (dB, capped at 99) and SSIM between two images of equal size. */
osplat_status osplat_metrics(const osplat_image* a, const osplat_image* b, double* out_psnr,
                             double* out_ssim);

/* ---- Evaluation ---- */
/* split: "test", "train" or "all". perspective_crop != 0 evaluates on the 6
 * cube faces of each view instead of the panorama. */
osplat_status osplat_eval(const osplat_cloud* cloud, const osplat_dataset* dataset,
                          const char* split, int perspective_crop, osplat_report** out);
size_t osplat_report_view_count(const osplat_report* report);
osplat_status osplat_report_view(const osplat_report* report, size_t index, int* frame_index,
                                 double* psnr, double* ssim);
osplat_status osplat_report_mean(const osplat_report* report, double* psnr, double* ssim,
                                 double* seconds_per_frame, double* fps);
const char* osplat_report_mode(const osplat_report* report);
void osplat_report_free(osplat_report* report);

/* ---- COLMAP conversion ---- */
osplat_status osplat_convert_colmap(const char* colmap_text_dir, const char* images_dir,
                                    const char* out_manifest_path);

#ifdef __cplusplus
}
#endif

#endif /* OMNISPLAT_CAPI_H */
