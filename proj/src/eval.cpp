#include "omnisplat/eval.hpp"

#include <chrono>
#include <cmath>

#include "omnisplat/metrics.hpp"

namespace omnisplat {

std::vector<CropSpec> cube_faces(int size) {
    PerspectiveCamera cam;
    cam.width = cam.height = size;
    cam.fx = cam.fy = size * 0.5;  // 90 degree field of view
    cam.cx = cam.cy = size * 0.5;
    std::vector<CropSpec> faces;
    for (int k = 0; k < 4; ++k) faces.push_back({cam, k * kPi / 2.0, 0.0});
    faces.push_back({cam, 0.0, kPi / 2.0});
    faces.push_back({cam, 0.0, -kPi / 2.0});
    return faces;
}

namespace {

inline Vec3 crop_ray(const CropSpec& crop, double px, double py) {
    Vec3 d{(px - crop.cam.cx) / crop.cam.fx, (py - crop.cam.cy) / crop.cam.fy, 1.0};
    // Pitch about X (positive looks toward -Y, i.e. up), then yaw about Y.
    double cp = std::cos(crop.pitch), sp = std::sin(crop.pitch);
    Vec3 dp{d.x, cp * d.y - sp * d.z, sp * d.y + cp * d.z};
    double cy = std::cos(crop.yaw), sy = std::sin(crop.yaw);
    return {cy * dp.x + sy * dp.z, dp.y, -sy * dp.x + cy * dp.z};
}

inline double sample_bilinear(const Image& img, double px, double py, int c) {
    double gx = px - 0.5, gy = py - 0.5;
    int x0 = static_cast<int>(std::floor(gx));
    int y0 = static_cast<int>(std::floor(gy));
    double fx = gx - x0, fy = gy - y0;
    auto wrap_x = [&](int x) { return ((x % img.width) + img.width) % img.width; };
    auto clamp_y = [&](int y) { return std::clamp(y, 0, img.height - 1); };
    double v00 = img.at(wrap_x(x0), clamp_y(y0), c);
    double v10 = img.at(wrap_x(x0 + 1), clamp_y(y0), c);
    double v01 = img.at(wrap_x(x0), clamp_y(y0 + 1), c);
    double v11 = img.at(wrap_x(x0 + 1), clamp_y(y0 + 1), c);
    return (1 - fy) * ((1 - fx) * v00 + fx * v10) + fy * ((1 - fx) * v01 + fx * v11);
}

}  // namespace

Image perspective_crop(const Image& pano, const CropSpec& crop) {
    Image out(crop.cam.width, crop.cam.height);
    EquirectCamera pano_cam{pano.width, pano.height};
    for (int y = 0; y < out.height; ++y) {
        for (int x = 0; x < out.width; ++x) {
            Vec3 dir = crop_ray(crop, x + 0.5, y + 0.5);
            EquirectProjection proj = project_equirect(CameraSpacePoint(dir), pano_cam);
            for (int c = 0; c < 3; ++c)
                out.at(x, y, c) = sample_bilinear(pano, proj.pixel.p.x, proj.pixel.p.y, c);
        }
    }
    return out;
}

EvalReport run_eval(const GaussianCloud& cloud, const TrainDataset& dataset,
                    const std::string& split, bool crop_to_perspective,
                    const RenderSettings& settings) {
    std::vector<int> indices;
    if (split == "train")
        indices = dataset.train_indices;
    else if (split == "all") {
        for (int i = 0; i < static_cast<int>(dataset.images.size()); ++i) indices.push_back(i);
    } else if (split == "test")
        indices = dataset.test_indices;
    else
        throw Error(ErrorCode::InvalidArgument, "unknown split: " + split);
    if (indices.empty()) throw Error(ErrorCode::EmptySplit, "split '" + split + "' is empty");

    EvalReport report;
    report.mode = crop_to_perspective ? "perspective-crop" : "omnidirectional";
    std::vector<CropSpec> faces;
    if (crop_to_perspective) faces = cube_faces(dataset.cam.height / 2);

    double total_seconds = 0.0;
    for (int idx : indices) {
        auto t0 = std::chrono::steady_clock::now();
        RenderOutput out = render(cloud, dataset.poses[idx], dataset.cam, settings);
        auto t1 = std::chrono::steady_clock::now();
        total_seconds += std::chrono::duration<double>(t1 - t0).count();

        EvalView view;
        view.frame_index = idx;
        if (crop_to_perspective) {
            double p = 0.0, s = 0.0;
            for (const CropSpec& face : faces) {
                Image rc = perspective_crop(out.color, face);
                Image gc = perspective_crop(dataset.images[idx], face);
                p += psnr(rc, gc);
                s += ssim(rc, gc);
            }
            view.psnr = p / faces.size();
            view.ssim = s / faces.size();
        } else {
            view.psnr = psnr(out.color, dataset.images[idx]);
            view.ssim = ssim(out.color, dataset.images[idx]);
        }
        report.views.push_back(view);
        report.mean_psnr += view.psnr;
        report.mean_ssim += view.ssim;
    }
    report.mean_psnr /= report.views.size();
    report.mean_ssim /= report.views.size();
    report.seconds_per_frame = total_seconds / report.views.size();
    report.fps = report.seconds_per_frame > 0.0 ? 1.0 / report.seconds_per_frame : 0.0;
    return report;
}

}  // namespace omnisplat
