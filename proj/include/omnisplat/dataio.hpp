#pragma once

// Scene manifests (JSON), sparse point clouds and checkpoints (PLY), images
// (PNG/JPEG in, PNG out) and the optimizer-state sidecar file.

#include <string>
#include <vector>

#include "omnisplat/camera.hpp"
#include "omnisplat/image.hpp"
#include "omnisplat/scene.hpp"
#include "omnisplat/trainer.hpp"

namespace omnisplat {

struct ManifestFrame {
    std::string image_path;  // resolved against the manifest directory
    Pose pose;               // world -> camera
};

struct SceneManifest {
    int width = 0;
    int height = 0;
    std::string points_path;  // empty when the manifest carries no points
    std::vector<ManifestFrame> frames;
    std::vector<int> train_split;  // frame indices; all frames when empty
    std::vector<int> test_split;
};

// Parses and validates; relative paths are resolved against the manifest's
// directory and referenced files must exist. Throws ParseError /
// ValidationError naming the offending frame or field.
SceneManifest load_manifest(const std::string& path);
void save_manifest(const SceneManifest& manifest, const std::string& path);

// Sparse SfM points: PLY (ASCII or binary little-endian) with float32 x/y/z
// and uint8 red/green/blue. Throws UnsupportedFormat / MissingProperty.
std::vector<ColoredPoint> load_ply(const std::string& path);
void save_ply(const std::vector<ColoredPoint>& points, const std::string& path);

// Checkpoints: binary little-endian PLY, one vertex per Gaussian with float32
// properties x y z nx ny nz f_dc_* f_rest_* opacity scale_* rot_*, plus
// sh_degree and format-version comments. Raw (pre-activation) parameters are
// stored; doubles are narrowed to float32 on save.
void save_checkpoint(const GaussianCloud& cloud, const std::string& path);
GaussianCloud load_checkpoint(const std::string& path);

// Adam moments + step + iteration, stored beside the checkpoint so the
// checkpoint itself stays viewer-compatible.
void save_optimizer_state(const AdamState& state, long iteration, int basis_count,
                          const std::string& path);
AdamState load_optimizer_state(const std::string& path, long& iteration, int& basis_count);

// 8/16-bit PNG and 8-bit JPEG load; 8-bit PNG save with round-half-up
// quantization. Values map linearly to [0, 1]. Throws DecodeError.
Image load_image(const std::string& path);
void save_image(const Image& img, const std::string& path);

// Loads every frame image and builds the render-ready dataset.
TrainDataset load_dataset(const SceneManifest& manifest);

// One JSON object per line: iteration, loss, psnr, gaussians.
void append_metrics_line(const std::string& path, long iteration, double loss_value,
                         double heldout_psnr, std::size_t gaussian_count);

// Train config as a JSON object; unknown keys are rejected. Every field can
// also be set by name from a string (CLI flag overrides).
TrainConfig load_train_config(const std::string& path);
void set_train_config_field(TrainConfig& cfg, const std::string& key, const std::string& value);
void save_train_config(const TrainConfig& cfg, const std::string& path);

}  // namespace omnisplat
