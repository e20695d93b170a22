#pragma once

// Novel-view evaluation: PSNR/SSIM over a manifest split, render timing, and
// the perspective-crop mode that resamples rendered panoramas into pinhole
// views before comparing.

#include <string>
#include <vector>

#include "omnisplat/dataio.hpp"
#include "omnisplat/rasterizer.hpp"

namespace omnisplat {

struct EvalView {
    int frame_index = -1;
    double psnr = 0.0;
    double ssim = 0.0;
};

struct EvalReport {
    std::vector<EvalView> views;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double seconds_per_frame = 0.0;  // forward render time only
    double fps = 0.0;
    std::string mode;  // "omnidirectional" or "perspective-crop"
};

struct CropSpec {
    PerspectiveCamera cam;
    double yaw = 0.0;    // about +Y, radians; positive turns toward +X
    double pitch = 0.0;  // elevation, radians; positive looks up (-Y)
};

// The 6 cube-map orientations at 90 degree field of view.
std::vector<CropSpec> cube_faces(int size);

// Bilinear resampling of an equirectangular panorama into a pinhole view;
// horizontal sampling wraps across the seam.
Image perspective_crop(const Image& pano, const CropSpec& crop);

// split: "test" (default), "train" or "all". Throws EmptySplit.
EvalReport run_eval(const GaussianCloud& cloud, const TrainDataset& dataset,
                    const std::string& split, bool crop_to_perspective,
                    const RenderSettings& settings = {});

}  // namespace omnisplat
