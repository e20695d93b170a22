#pragma once

// Shared helpers for the test suites: deterministic random scenes, rotation
// constructors, and a validated central-difference oracle.

#include <functional>
#include <random>

#include "omnisplat/camera.hpp"
#include "omnisplat/scene.hpp"

namespace testutil {

using namespace omnisplat;

inline Mat3 rot_x(double a) {
    Mat3 m;
    m.m = {1, 0, 0, 0, std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a)};
    return m;
}
inline Mat3 rot_y(double a) {
    Mat3 m;
    m.m = {std::cos(a), 0, std::sin(a), 0, 1, 0, -std::sin(a), 0, std::cos(a)};
    return m;
}
inline Mat3 rot_z(double a) {
    Mat3 m;
    m.m = {std::cos(a), -std::sin(a), 0, std::sin(a), std::cos(a), 0, 0, 0, 1};
    return m;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline Vec4 random_unit_quat(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vec4 q{n(rng), n(rng), n(rng), n(rng)};
    return normalized(q);
}

inline Pose random_pose(std::mt19937_64& rng, double center_radius = 0.2) {
    Pose pose;
    pose.rotation = quat_to_rotation(random_unit_quat(rng));
    Vec3 center{uniform(rng, -center_radius, center_radius),
                uniform(rng, -center_radius, center_radius),
                uniform(rng, -center_radius, center_radius)};
    pose.translation = -(pose.rotation * center);
    return pose;
}

struct CloudSpec {
    std::size_t count = 10;
    int sh_degree = 3;
    double min_dist = 1.5, max_dist = 2.5;    // shell around the origin
    double min_scale = 0.15, max_scale = 0.5;
    double min_opacity = 0.3, max_opacity = 0.85;
    double dc_range = 0.4;
    double rest_range = 0.1;
    bool avoid_poles = true;  // keep directions off the camera vertical axis
};

// Gaussians on a shell around the origin; pair with a camera near the origin.
inline GaussianCloud random_cloud(std::mt19937_64& rng, const CloudSpec& spec) {
    GaussianCloud cloud;
    cloud.sh_degree = spec.sh_degree;
    cloud.active_sh_degree = spec.sh_degree;
    cloud.resize(spec.count);
    const int bc = cloud.basis_count();
    std::normal_distribution<double> n(0.0, 1.0);
    for (std::size_t i = 0; i < spec.count; ++i) {
        Vec3 dir;
        do {
            dir = Vec3{n(rng), n(rng), n(rng)}.normalized();
        } while (spec.avoid_poles && std::sqrt(dir.x * dir.x + dir.z * dir.z) < 0.2);
        cloud.positions[i] = dir * uniform(rng, spec.min_dist, spec.max_dist);
        cloud.rotations[i] = random_unit_quat(rng);
        double ls = std::log(uniform(rng, spec.min_scale, spec.max_scale));
        cloud.log_scales[i] = {ls + 0.1 * n(rng), ls + 0.1 * n(rng), ls + 0.1 * n(rng)};
        cloud.opacity_logits[i] = logit(uniform(rng, spec.min_opacity, spec.max_opacity));
        cloud.sh_coeffs[i * bc] = {uniform(rng, -spec.dc_range, spec.dc_range),
                                   uniform(rng, -spec.dc_range, spec.dc_range),
                                   uniform(rng, -spec.dc_range, spec.dc_range)};
        for (int b = 1; b < bc; ++b)
            cloud.sh_coeffs[i * bc + b] = {uniform(rng, -spec.rest_range, spec.rest_range),
                                           uniform(rng, -spec.rest_range, spec.rest_range),
                                           uniform(rng, -spec.rest_range, spec.rest_range)};
    }
    return cloud;
}

struct FdResult {
    double value = 0.0;
    bool ok = false;  // the two step sizes agreed
};

// Central difference with step-halving validation. f is evaluated at x +- h
// and x +- h/2; the half-step estimate is accepted when both agree, retrying
// with smaller steps when they do not (a blend threshold crossing inside the
// stencil makes the estimate meaningless).
inline FdResult validated_central_diff(const std::function<double(double)>& f, double x,
                                       double h0) {
    double h = h0;
    for (int attempt = 0; attempt < 3; ++attempt) {
        double d1 = (f(x + h) - f(x - h)) / (2.0 * h);
        double d2 = (f(x + h / 2) - f(x - h / 2)) / h;
        double scale = std::max({std::abs(d1), std::abs(d2), 1e-8});
        if (std::abs(d1 - d2) <= 1e-4 * scale) return {d2, true};
        h /= 16.0;
    }
    return {0.0, false};
}

inline bool close_rel(double a, double b, double rel, double abs_floor) {
    return std::abs(a - b) <= std::max(rel * std::max(std::abs(a), std::abs(b)), abs_floor);
}

}  // namespace testutil
