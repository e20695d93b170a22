#pragma once

// Analytic backward pass: propagates a per-pixel loss gradient through
// alpha-blending, the 2D Gaussian sample, the projected covariance (including
// the second derivatives of the equirectangular projection) and the camera
// model, down to raw Gaussian parameters (through the log-scale, logit-opacity
// and quaternion-normalization activations).

#include "omnisplat/camera.hpp"
#include "omnisplat/image.hpp"
#include "omnisplat/rasterizer.hpp"
#include "omnisplat/scene.hpp"

namespace omnisplat {

struct GradientBuffer {
    // Raw-parameter gradients of the latest backward() call.
    std::vector<Vec3> d_position;
    std::vector<Vec3> d_sh;  // N * basis_count, same layout as GaussianCloud::sh_coeffs
    std::vector<Vec4> d_rotation;
    std::vector<Vec3> d_log_scale;
    std::vector<double> d_opacity_logit;
    // dL/ds in uniform screen units, per Gaussian, for the latest backward().
    std::vector<Vec2> d_screen;

    // Densification statistics, accumulated across backward() calls until
    // reset_screen_stats(): sum of ||dL/ds|| per render in which the Gaussian
    // was visible, and the visibility count.
    std::vector<double> screen_norm_sum;
    std::vector<long> screen_hits;

    std::size_t size() const { return d_position.size(); }
    void resize(std::size_t n, int basis_count);
    void zero_gradients();
    void reset_screen_stats();
};

// Accumulates gradients for every Gaussian that produced instances in
// render_out. Culled Gaussians keep exactly zero gradients. Throws
// StateMismatch when render_out does not correspond to (cloud, pose, cam) or
// d_image has the wrong size. The per-tile contributions are reduced in a
// fixed order, so results do not depend on the thread count.
void backward(const RenderOutput& render_out, const Image& d_image, const GaussianCloud& cloud,
              const Pose& pose, const EquirectCamera& cam, GradientBuffer& buf);

// Running average of ||dL/ds|| over the hits recorded since the last stats
// reset; 0 for a Gaussian that was never hit.
double d_screen_norm(const GradientBuffer& buf, std::size_t gaussian_id);

}  // namespace omnisplat
