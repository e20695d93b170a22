#include "omnisplat/capi.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>

#include "omnisplat/colmap.hpp"
#include "omnisplat/dataio.hpp"
#include "omnisplat/eval.hpp"
#include "omnisplat/metrics.hpp"
#include "omnisplat/parallel.hpp"
#include "omnisplat/rasterizer.hpp"
#include "omnisplat/trainer.hpp"

namespace fs = std::filesystem;
using namespace omnisplat;

struct osplat_cloud {
    GaussianCloud cloud;
};
struct osplat_dataset {
    SceneManifest manifest;
    TrainDataset data;
    std::vector<ColoredPoint> points;
};
struct osplat_config {
    TrainConfig cfg;
};
struct osplat_image {
    Image image;
};
struct osplat_report {
    EvalReport report;
};

namespace {

thread_local std::string t_last_error;

osplat_status map_code(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParseError:
        case ErrorCode::MissingProperty:
        case ErrorCode::DecodeError:
            return OSPLAT_ERR_PARSE;
        case ErrorCode::ValidationError:
        case ErrorCode::DimensionMismatch:
        case ErrorCode::StateMismatch:
        case ErrorCode::EmptyPointCloud:
        case ErrorCode::EmptySplit:
            return OSPLAT_ERR_VALIDATION;
        case ErrorCode::UnsupportedFormat:
        case ErrorCode::VersionMismatch:
            return OSPLAT_ERR_UNSUPPORTED;
        case ErrorCode::IoError:
            return OSPLAT_ERR_IO;
        case ErrorCode::ZeroRadius:
        case ErrorCode::PoleDegenerate:
        case ErrorCode::OutOfBounds:
        case ErrorCode::BehindCamera:
        case ErrorCode::InvalidArgument:
            return OSPLAT_ERR_INVALID_ARGUMENT;
    }
    return OSPLAT_ERR_RUNTIME;
}

template <typename Fn>
osplat_status wrap(Fn&& fn) {
    try {
        fn();
        t_last_error.clear();
        return OSPLAT_OK;
    } catch (const Error& e) {
        t_last_error = std::string(error_code_name(e.code())) + ": " + e.what();
        return map_code(e.code());
    } catch (const std::exception& e) {
        t_last_error = e.what();
        return OSPLAT_ERR_RUNTIME;
    }
}

osplat_status invalid(const char* message) {
    t_last_error = message;
    return OSPLAT_ERR_INVALID_ARGUMENT;
}

Pose pose_from_rowmajor(const double t[16]) {
    Pose pose;
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) pose.rotation(r, c) = t[r * 4 + c];
        pose.translation[r] = t[r * 4 + 3];
    }
    return pose;
}

}  // namespace

extern "C" {

const char* osplat_version(void) { return "0.1.0"; }

const char* osplat_last_error(void) { return t_last_error.c_str(); }

void osplat_set_threads(int n) { set_thread_count(n); }

/* ---- clouds ---- */

osplat_status osplat_cloud_load(const char* path, osplat_cloud** out) {
    if (!path || !out) return invalid("osplat_cloud_load: null argument");
    return wrap([&] { *out = new osplat_cloud{load_checkpoint(path)}; });
}

osplat_status osplat_cloud_save(const osplat_cloud* cloud, const char* path) {
    if (!cloud || !path) return invalid("osplat_cloud_save: null argument");
    return wrap([&] { save_checkpoint(cloud->cloud, path); });
}

size_t osplat_cloud_count(const osplat_cloud* cloud) { return cloud ? cloud->cloud.size() : 0; }

void osplat_cloud_free(osplat_cloud* cloud) { delete cloud; }

/* ---- datasets ---- */

osplat_status osplat_dataset_load(const char* manifest_path, osplat_dataset** out) {
    if (!manifest_path || !out) return invalid("osplat_dataset_load: null argument");
    return wrap([&] {
        auto handle = std::make_unique<osplat_dataset>();
        handle->manifest = load_manifest(manifest_path);
        handle->data = load_dataset(handle->manifest);
        if (!handle->manifest.points_path.empty())
            handle->points = load_ply(handle->manifest.points_path);
        *out = handle.release();
    });
}

size_t osplat_dataset_frame_count(const osplat_dataset* d) {
    return d ? d->data.images.size() : 0;
}
size_t osplat_dataset_train_count(const osplat_dataset* d) {
    return d ? d->data.train_indices.size() : 0;
}
size_t osplat_dataset_test_count(const osplat_dataset* d) {
    return d ? d->data.test_indices.size() : 0;
}

osplat_status osplat_dataset_dims(const osplat_dataset* d, int* width, int* height) {
    if (!d) return invalid("osplat_dataset_dims: null dataset");
    if (width) *width = d->data.cam.width;
    if (height) *height = d->data.cam.height;
    return OSPLAT_OK;
}

osplat_status osplat_dataset_pose(const osplat_dataset* d, size_t index, double t[16]) {
    if (!d || !t) return invalid("osplat_dataset_pose: null argument");
    if (index >= d->data.poses.size()) return invalid("osplat_dataset_pose: index out of range");
    const Pose& pose = d->data.poses[index];
    for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) t[r * 4 + c] = pose.rotation(r, c);
        t[r * 4 + 3] = pose.translation[r];
    }
    t[12] = t[13] = t[14] = 0.0;
    t[15] = 1.0;
    return OSPLAT_OK;
}

void osplat_dataset_free(osplat_dataset* d) { delete d; }

/* ---- config ---- */

osplat_status osplat_config_create(osplat_config** out) {
    if (!out) return invalid("osplat_config_create: null argument");
    return wrap([&] { *out = new osplat_config{}; });
}

osplat_status osplat_config_load(const char* path, osplat_config** out) {
    if (!path || !out) return invalid("osplat_config_load: null argument");
    return wrap([&] { *out = new osplat_config{load_train_config(path)}; });
}

osplat_status osplat_config_set(osplat_config* config, const char* key, const char* value) {
    if (!config || !key || !value) return invalid("osplat_config_set: null argument");
    return wrap([&] { set_train_config_field(config->cfg, key, value); });
}

void osplat_config_free(osplat_config* config) { delete config; }

/* ---- training ---- */

osplat_status osplat_train(const osplat_dataset* dataset, const osplat_config* config,
                           const char* output_dir, osplat_progress_fn progress, void* user,
                           osplat_cloud** out) {
    if (!dataset || !config || !output_dir) return invalid("osplat_train: null argument");
    return wrap([&] {
        if (dataset->points.empty())
            throw Error(ErrorCode::EmptyPointCloud, "dataset has no sparse points to train from");
        fs::create_directories(output_dir);
        const TrainConfig& cfg = config->cfg;
        std::string metrics_path = (fs::path(output_dir) / "metrics.jsonl").string();
        std::ofstream(metrics_path, std::ios::trunc).close();

        int heldout = dataset->data.test_indices.empty() ? dataset->data.train_indices[0]
                                                         : dataset->data.test_indices[0];

        Trainer trainer(dataset->data, dataset->points, cfg);
        trainer.run([&](const IterationInfo& info, const GaussianCloud& cloud) {
            bool log_now = cfg.log_interval > 0 && (info.iteration % cfg.log_interval == 0 ||
                                                    info.iteration == cfg.iterations);
            if (log_now) {
                RenderSettings settings;
                settings.background = cfg.background;
                RenderOutput view =
                    render(cloud, dataset->data.poses[heldout], dataset->data.cam, settings);
                double view_psnr = psnr(view.color, dataset->data.images[heldout]);
                append_metrics_line(metrics_path, info.iteration, info.loss_value, view_psnr,
                                    info.gaussian_count);
                if (progress) progress(user, info.iteration, info.loss_value, info.gaussian_count);
            }
            if (cfg.checkpoint_interval > 0 && info.iteration % cfg.checkpoint_interval == 0 &&
                info.iteration != cfg.iterations) {
                char name[64];
                std::snprintf(name, sizeof(name), "checkpoint_%06ld.ply", info.iteration);
                save_checkpoint(cloud, (fs::path(output_dir) / name).string());
            }
        });

        std::string final_ply = (fs::path(output_dir) / "final.ply").string();
        save_checkpoint(trainer.cloud(), final_ply);
        save_optimizer_state(trainer.state(), trainer.iteration(),
                             trainer.cloud().basis_count(),
                             (fs::path(output_dir) / "final.adam").string());
        if (out) *out = new osplat_cloud{trainer.take_cloud()};
    });
}

/* ---- rendering ---- */

osplat_status osplat_render(const osplat_cloud* cloud, const double transform_cw[16], int width,
                            int height, osplat_image** out) {
    if (!cloud || !transform_cw || !out) return invalid("osplat_render: null argument");
    if (width < 2 || height < 2) return invalid("osplat_render: image size must be >= 2x2");
    return wrap([&] {
        Pose pose = pose_from_rowmajor(transform_cw);
        if (!pose.is_valid())
            throw Error(ErrorCode::ValidationError, "pose rotation is not orthonormal");
        RenderOutput r = render(cloud->cloud, pose, EquirectCamera{width, height});
        *out = new osplat_image{std::move(r.color)};
    });
}

osplat_status osplat_perspective_crop(const osplat_image* pano, double fx, double fy, double cx,
                                      double cy, int width, int height, double yaw, double pitch,
                                      osplat_image** out) {
    if (!pano || !out) return invalid("osplat_perspective_crop: null argument");
    return wrap([&] {
        CropSpec spec;
        spec.cam = PerspectiveCamera{fx, fy, cx, cy, width, height};
        if (fx <= 0 || fy <= 0 || width < 1 || height < 1)
            throw Error(ErrorCode::InvalidArgument, "invalid pinhole intrinsics");
        spec.yaw = yaw;
        spec.pitch = pitch;
        *out = new osplat_image{perspective_crop(pano->image, spec)};
    });
}

/* ---- images ---- */

osplat_status osplat_image_load(const char* path, osplat_image** out) {
    if (!path || !out) return invalid("osplat_image_load: null argument");
    return wrap([&] { *out = new osplat_image{load_image(path)}; });
}

osplat_status osplat_image_save(const osplat_image* image, const char* path) {
    if (!image || !path) return invalid("osplat_image_save: null argument");
    return wrap([&] { save_image(image->image, path); });
}

int osplat_image_width(const osplat_image* image) { return image ? image->image.width : 0; }
int osplat_image_height(const osplat_image* image) { return image ? image->image.height : 0; }

const double* osplat_image_pixels(const osplat_image* image) {
    return image ? image->image.data.data() : nullptr;
}

void osplat_image_free(osplat_image* image) { delete image; }

osplat_status osplat_metrics(const osplat_image* a, const osplat_image* b, double* out_psnr,
                             double* out_ssim) {
    if (!a || !b) return invalid("osplat_metrics: null argument");
    return wrap([&] {
        if (out_psnr) *out_psnr = psnr(a->image, b->image);
        if (out_ssim) *out_ssim = ssim(a->image, b->image);
    });
}

/* ---- evaluation ---- */

osplat_status osplat_eval(const osplat_cloud* cloud, const osplat_dataset* dataset,
                          const char* split, int perspective_crop_mode, osplat_report** out) {
    if (!cloud || !dataset || !out) return invalid("osplat_eval: null argument");
    return wrap([&] {
        std::string s = split ? split : "test";
        *out = new osplat_report{
            run_eval(cloud->cloud, dataset->data, s, perspective_crop_mode != 0)};
    });
}

size_t osplat_report_view_count(const osplat_report* report) {
    return report ? report->report.views.size() : 0;
}

osplat_status osplat_report_view(const osplat_report* report, size_t index, int* frame_index,
                                 double* out_psnr, double* out_ssim) {
    if (!report) return invalid("osplat_report_view: null report");
    if (index >= report->report.views.size())
        return invalid("osplat_report_view: index out of range");
    const EvalView& v = report->report.views[index];
    if (frame_index) *frame_index = v.frame_index;
    if (out_psnr) *out_psnr = v.psnr;
    if (out_ssim) *out_ssim = v.ssim;
    return OSPLAT_OK;
}

osplat_status osplat_report_mean(const osplat_report* report, double* out_psnr, double* out_ssim,
                                 double* seconds_per_frame, double* fps) {
    if (!report) return invalid("osplat_report_mean: null report");
    if (out_psnr) *out_psnr = report->report.mean_psnr;
    if (out_ssim) *out_ssim = report->report.mean_ssim;
    if (seconds_per_frame) *seconds_per_frame = report->report.seconds_per_frame;
    if (fps) *fps = report->report.fps;
    return OSPLAT_OK;
}

const char* osplat_report_mode(const osplat_report* report) {
    return report ? report->report.mode.c_str() : "";
}

void osplat_report_free(osplat_report* report) { delete report; }

/* ---- colmap ---- */

osplat_status osplat_convert_colmap(const char* colmap_text_dir, const char* images_dir,
                                    const char* out_manifest_path) {
    if (!colmap_text_dir || !images_dir || !out_manifest_path)
        return invalid("osplat_convert_colmap: null argument");
    return wrap([&] { convert_colmap(colmap_text_dir, images_dir, out_manifest_path); });
}

}  // extern "C"
