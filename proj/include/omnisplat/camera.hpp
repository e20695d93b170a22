#pragma once

// Equirectangular and pinhole camera models.
//
// Conventions (SLAM-style): +X right, +Y down, +Z forward. The camera X-Z
// plane is the equator of the equirectangular projection. A camera-space
// point t projects through three stages:
//
//   (lon, lat) = (atan2(t_x, t_z), asin(t_y / |t|))        spherical angles
//   s          = (lon / pi, 2 lat / pi)                    uniform screen, [-1, 1)
//   p          = ((s_x + 1) W / 2, (s_y + 1) H / 2)        pixel coordinates
//
// Integer pixel index i samples at continuous coordinate i + 0.5.

#include "omnisplat/error.hpp"
#include "omnisplat/vecmath.hpp"

namespace omnisplat {

// World-to-camera rigid transform: t = rotation * m + translation.
struct Pose {
    Mat3 rotation;     // orthonormal, det +1
    Vec3 translation;  // t_cw

    // Camera center in world coordinates, -R^T t.
    Vec3 center() const { return -rotation.transpose_mul(translation); }

    // Checks W^T W = I and det = +1 within tol.
    bool is_valid(double tol = 1e-6) const;
};

struct CameraSpacePoint {
    Vec3 t;
    double t_r = 0.0;  // Euclidean norm of t, cached

    CameraSpacePoint() = default;
    explicit CameraSpacePoint(const Vec3& v) : t(v), t_r(v.norm()) {}
};

struct LonLat {
    double lon = 0.0;  // [-pi, pi)
    double lat = 0.0;  // [-pi/2, pi/2]
};

struct ScreenCoord {
    Vec2 s;  // s_x in [-1, 1), s_y in [-1, 1]
};

struct PixelCoord {
    Vec2 p;  // p_x in [0, W), p_y in [0, H]
};

struct EquirectCamera {
    int width = 2;
    int height = 2;
};

struct PerspectiveCamera {
    double fx = 0.0, fy = 0.0;
    double cx = 0.0, cy = 0.0;
    int width = 0, height = 0;
};

struct EquirectProjection {
    PixelCoord pixel;
    LonLat lonlat;
    ScreenCoord screen;
};

// 2x3 matrix of dp/dt. The degenerate vertical axis (t_x^2 + t_z^2 -> 0) is
// rejected below pole_epsilon * t_r.
using ProjJacobian = Mat23;

inline constexpr double kPoleEpsilon = 1e-4;

// t = W m + t_cw.
CameraSpacePoint world_to_camera(const Vec3& m, const Pose& pose);

// Full projection; returns all three stages so callers can reuse the
// intermediates. Throws ZeroRadius for t_r = 0.
EquirectProjection project_equirect(const CameraSpacePoint& t, const EquirectCamera& cam);

// Analytic dp/dt. Throws PoleDegenerate when sqrt(t_x^2 + t_z^2) <=
// kPoleEpsilon * t_r.
ProjJacobian jacobian_equirect(const CameraSpacePoint& t, const EquirectCamera& cam);

// Second derivatives of the projection: d2p_i / (dt_j dt_k), laid out as
// d[i][j](k) = d(J_ij)/d(t_k). Same precondition as jacobian_equirect.
struct ProjJacobianGrad {
    // grad[i][j] is the 3-vector gradient of J(i, j) with respect to t.
    Vec3 grad[2][3];
};
ProjJacobianGrad jacobian_equirect_grad(const CameraSpacePoint& t, const EquirectCamera& cam);

// Unit ray direction through pixel p. Throws OutOfBounds for p outside
// [0, W] x [0, H].
Vec3 unproject_equirect(const PixelCoord& p, const EquirectCamera& cam);

// Pinhole projection, Throws BehindCamera for t_z <= 0.
PixelCoord project_perspective(const CameraSpacePoint& t, const PerspectiveCamera& cam);

}  // namespace omnisplat
