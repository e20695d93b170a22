// Command-line front end. Talks to the core exclusively through the C API in
// omnisplat/capi.h. Exit codes: 0 success, 1 runtime failure, 2 usage or
// input error.

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "omnisplat/capi.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

int exit_code_for(osplat_status status) {
    switch (status) {
        case OSPLAT_OK: return kExitOk;
        case OSPLAT_ERR_RUNTIME: return kExitRuntime;
        default: return kExitUsage;
    }
}

int fail(osplat_status status) {
    std::fprintf(stderr, "error: %s\n", osplat_last_error());
    return exit_code_for(status);
}

// Every TrainConfig field is exposed as a --key flag; values are forwarded as
// strings to osplat_config_set.
const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "lambda_ssim", "iterations", "densify_until", "densify_interval",
        "opacity_reset_interval", "densify_grad_threshold", "scale_split_threshold",
        "split_factor", "prune_opacity", "prune_scale_world", "prune_radius_px",
        "opacity_reset_ceiling", "lr_position_init", "lr_position_final", "lr_sh_dc",
        "lr_sh_rest", "lr_opacity", "lr_scale", "lr_rotation", "mask_bottom_fraction",
        "sh_degree", "sh_warmup_interval", "seed", "checkpoint_interval", "log_interval"};
    return keys;
}

bool parse_pose(const std::string& text, double out[16]) {
    std::string cleaned = text;
    for (char& c : cleaned)
        if (c == ',') c = ' ';
    std::istringstream in(cleaned);
    for (int i = 0; i < 16; ++i)
        if (!(in >> out[i])) return false;
    double tail;
    return !(in >> tail);
}

struct CloudGuard {
    osplat_cloud* p = nullptr;
    ~CloudGuard() { osplat_cloud_free(p); }
};
struct DatasetGuard {
    osplat_dataset* p = nullptr;
    ~DatasetGuard() { osplat_dataset_free(p); }
};
struct ConfigGuard {
    osplat_config* p = nullptr;
    ~ConfigGuard() { osplat_config_free(p); }
};
struct ImageGuard {
    osplat_image* p = nullptr;
    ~ImageGuard() { osplat_image_free(p); }
};
struct ReportGuard {
    osplat_report* p = nullptr;
    ~ReportGuard() { osplat_report_free(p); }
};

int run_train(const std::string& config_path, const std::string& manifest,
              const std::string& out_dir, const std::vector<std::pair<std::string, std::string>>& overrides,
              bool quiet) {
    ConfigGuard config;
    osplat_status st = config_path.empty() ? osplat_config_create(&config.p)
                                           : osplat_config_load(config_path.c_str(), &config.p);
    if (st != OSPLAT_OK) return fail(st);
    for (const auto& [key, value] : overrides) {
        st = osplat_config_set(config.p, key.c_str(), value.c_str());
        if (st != OSPLAT_OK) return fail(st);
    }

    DatasetGuard dataset;
    st = osplat_dataset_load(manifest.c_str(), &dataset.p);
    if (st != OSPLAT_OK) return fail(st);

    auto progress = [](void* user, long iteration, double loss, size_t gaussians) {
        if (user) return;  // quiet
        std::printf("iter %6ld  loss %.6f  gaussians %zu\n", iteration, loss, gaussians);
        std::fflush(stdout);
    };
    CloudGuard cloud;
    st = osplat_train(dataset.p, config.p, out_dir.c_str(), progress,
                      quiet ? reinterpret_cast<void*>(1) : nullptr, &cloud.p);
    if (st != OSPLAT_OK) return fail(st);
    std::printf("trained %zu gaussians; final checkpoint in %s\n", osplat_cloud_count(cloud.p),
                out_dir.c_str());
    return kExitOk;
}

int save_or_fail(osplat_image* img, const std::string& path) {
    osplat_status st = osplat_image_save(img, path.c_str());
    if (st != OSPLAT_OK) return fail(st);
    std::printf("wrote %s\n", path.c_str());
    return kExitOk;
}

int run_render(const std::string& checkpoint, const std::string& manifest,
               const std::string& pose_text, int width, int height, const std::string& out_dir,
               const std::vector<double>& perspective, int cube_size) {
    CloudGuard cloud;
    osplat_status st = osplat_cloud_load(checkpoint.c_str(), &cloud.p);
    if (st != OSPLAT_OK) return fail(st);

    std::vector<std::pair<std::string, std::vector<double>>> jobs;  // name -> pose
    if (!pose_text.empty()) {
        std::vector<double> t(16);
        if (!parse_pose(pose_text, t.data())) {
            std::fprintf(stderr, "error: --pose expects 16 numbers\n");
            return kExitUsage;
        }
        jobs.emplace_back("render", t);
    } else {
        DatasetGuard dataset;
        st = osplat_dataset_load(manifest.c_str(), &dataset.p);
        if (st != OSPLAT_OK) return fail(st);
        osplat_dataset_dims(dataset.p, &width, &height);
        size_t n = osplat_dataset_frame_count(dataset.p);
        for (size_t i = 0; i < n; ++i) {
            std::vector<double> t(16);
            osplat_dataset_pose(dataset.p, i, t.data());
            char name[32];
            std::snprintf(name, sizeof(name), "frame_%04zu", i);
            jobs.emplace_back(name, t);
        }
    }

    for (const auto& [name, t] : jobs) {
        ImageGuard pano;
        st = osplat_render(cloud.p, t.data(), width, height, &pano.p);
        if (st != OSPLAT_OK) return fail(st);
        int rc = save_or_fail(pano.p, out_dir + "/" + name + ".png");
        if (rc != kExitOk) return rc;

        if (!perspective.empty()) {
            ImageGuard crop;
            st = osplat_perspective_crop(pano.p, perspective[0], perspective[1], perspective[2],
                                         perspective[3], static_cast<int>(perspective[4]),
                                         static_cast<int>(perspective[5]), perspective[6],
                                         perspective[7], &crop.p);
            if (st != OSPLAT_OK) return fail(st);
            int rc2 = save_or_fail(crop.p, out_dir + "/" + name + "_persp.png");
            if (rc2 != kExitOk) return rc2;
        } else if (cube_size > 0) {
            // The 6 cube-map orientations at 90 degree FoV.
            const double pi = 3.14159265358979323846;
            const double f = cube_size * 0.5;
            struct Face { const char* tag; double yaw, pitch; };
            const Face faces[6] = {{"front", 0, 0},          {"right", pi / 2, 0},
                                   {"back", pi, 0},          {"left", -pi / 2, 0},
                                   {"up", 0, pi / 2},        {"down", 0, -pi / 2}};
            for (const Face& face : faces) {
                ImageGuard crop;
                st = osplat_perspective_crop(pano.p, f, f, f, f, cube_size, cube_size, face.yaw,
                                             face.pitch, &crop.p);
                if (st != OSPLAT_OK) return fail(st);
                int rc2 = save_or_fail(crop.p, out_dir + "/" + name + "_" + face.tag + ".png");
                if (rc2 != kExitOk) return rc2;
            }
        }
    }
    return kExitOk;
}

int run_eval(const std::string& checkpoint, const std::string& manifest, const std::string& split,
             bool perspective_crop, const std::string& json_out) {
    CloudGuard cloud;
    osplat_status st = osplat_cloud_load(checkpoint.c_str(), &cloud.p);
    if (st != OSPLAT_OK) return fail(st);
    DatasetGuard dataset;
    st = osplat_dataset_load(manifest.c_str(), &dataset.p);
    if (st != OSPLAT_OK) return fail(st);

    ReportGuard report;
    st = osplat_eval(cloud.p, dataset.p, split.c_str(), perspective_crop ? 1 : 0, &report.p);
    if (st != OSPLAT_OK) return fail(st);

    size_t n = osplat_report_view_count(report.p);
    for (size_t i = 0; i < n; ++i) {
        int frame = 0;
        double psnr = 0, ssim = 0;
        osplat_report_view(report.p, i, &frame, &psnr, &ssim);
        std::printf("view %4d  psnr %7.3f dB  ssim %.4f\n", frame, psnr, ssim);
    }
    double psnr = 0, ssim = 0, spf = 0, fps = 0;
    osplat_report_mean(report.p, &psnr, &ssim, &spf, &fps);
    std::printf("mode %s  mean psnr %.3f dB  mean ssim %.4f  render %.1f ms/frame  fps %.2f\n",
                osplat_report_mode(report.p), psnr, ssim, spf * 1000.0, fps);

    if (!json_out.empty()) {
        std::ofstream out(json_out);
        if (!out) {
            std::fprintf(stderr, "error: cannot write %s\n", json_out.c_str());
            return kExitRuntime;
        }
        out << "{\n  \"mode\": \"" << osplat_report_mode(report.p) << "\",\n";
        out << "  \"mean_psnr\": " << psnr << ",\n  \"mean_ssim\": " << ssim << ",\n";
        out << "  \"seconds_per_frame\": " << spf << ",\n  \"fps\": " << fps << ",\n";
        out << "  \"views\": [\n";
        for (size_t i = 0; i < n; ++i) {
            int frame = 0;
            double vp = 0, vs = 0;
            osplat_report_view(report.p, i, &frame, &vp, &vs);
            out << "    {\"frame\": " << frame << ", \"psnr\": " << vp << ", \"ssim\": " << vs
                << "}" << (i + 1 < n ? "," : "") << "\n";
        }
        out << "  ]\n}\n";
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"omnisplat: omnidirectional Gaussian splatting"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "worker threads (default: OMNISPLAT_THREADS or all cores)");

    // train
    auto* train = app.add_subcommand("train", "reconstruct a Gaussian cloud from a dataset");
    std::string config_path, manifest, out_dir = ".";
    bool quiet = false;
    train->add_option("--config", config_path, "train config JSON");
    train->add_option("--manifest", manifest, "scene manifest JSON")->required();
    train->add_option("--out", out_dir, "output directory")->required();
    train->add_flag("--quiet", quiet, "suppress progress lines");
    std::map<std::string, std::string> overrides;
    for (const std::string& key : config_keys())
        train->add_option("--" + key, overrides[key], "override config field " + key);

    // render
    auto* render = app.add_subcommand("render", "render views from a checkpoint");
    std::string checkpoint, render_manifest, pose_text, render_out = ".";
    int width = 0, height = 0, cube_size = 0;
    std::vector<double> perspective;
    render->add_option("--checkpoint", checkpoint, "checkpoint PLY")->required();
    render->add_option("--manifest", render_manifest, "render every frame of this manifest");
    render->add_option("--pose", pose_text, "render one view: 16 row-major numbers (T_cw)");
    render->add_option("--width", width, "panorama width for --pose");
    render->add_option("--height", height, "panorama height for --pose");
    render->add_option("--out", render_out, "output directory")->required();
    render->add_option("--perspective", perspective,
                       "additionally crop each panorama: fx fy cx cy width height yaw pitch")
        ->expected(8);
    render->add_option("--cube", cube_size,
                       "additionally crop each panorama into 6 cube faces of this size");

    // eval
    auto* eval = app.add_subcommand("eval", "PSNR/SSIM on a manifest split");
    std::string eval_checkpoint, eval_manifest, split = "test", json_out;
    bool crop = false;
    eval->add_option("--checkpoint", eval_checkpoint, "checkpoint PLY")->required();
    eval->add_option("--manifest", eval_manifest, "scene manifest JSON")->required();
    eval->add_option("--split", split, "test | train | all (default test)");
    eval->add_flag("--perspective-crop", crop, "evaluate on 6 cube-face crops per view");
    eval->add_option("--json", json_out, "also write the report as JSON");

    // convert-colmap
    auto* convert = app.add_subcommand("convert-colmap", "COLMAP text export -> manifest + PLY");
    std::string colmap_dir, images_dir, out_manifest;
    convert->add_option("--colmap", colmap_dir, "directory with cameras/images/points3D.txt")
        ->required();
    convert->add_option("--images", images_dir, "directory with the image files")->required();
    convert->add_option("--out", out_manifest, "output manifest path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : kExitUsage;
    }

    if (threads > 0) osplat_set_threads(threads);

    if (train->parsed()) {
        std::vector<std::pair<std::string, std::string>> set;
        for (const auto& [key, value] : overrides)
            if (!value.empty()) set.emplace_back(key, value);
        return run_train(config_path, manifest, out_dir, set, quiet);
    }
    if (render->parsed()) {
        if (pose_text.empty() && render_manifest.empty()) {
            std::fprintf(stderr, "error: render needs --manifest or --pose\n");
            return kExitUsage;
        }
        if (!pose_text.empty() && (width < 2 || height < 2)) {
            std::fprintf(stderr, "error: --pose requires --width and --height\n");
            return kExitUsage;
        }
        return run_render(checkpoint, render_manifest, pose_text, width, height, render_out,
                          perspective, cube_size);
    }
    if (eval->parsed()) return run_eval(eval_checkpoint, eval_manifest, split, crop, json_out);
    if (convert->parsed()) {
        osplat_status st =
            osplat_convert_colmap(colmap_dir.c_str(), images_dir.c_str(), out_manifest.c_str());
        if (st != OSPLAT_OK) return fail(st);
        std::printf("wrote %s\n", out_manifest.c_str());
        return kExitOk;
    }
    return kExitUsage;
}
