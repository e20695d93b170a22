#include "omnisplat/camera.hpp"

#include <cmath>

namespace omnisplat {

bool Pose::is_valid(double tol) const {
    const Mat3& w = rotation;
    Mat3 wtw = w.transposed() * w;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double expect = i == j ? 1.0 : 0.0;
            if (std::abs(wtw(i, j) - expect) > tol) return false;
        }
    double det = w(0, 0) * (w(1, 1) * w(2, 2) - w(1, 2) * w(2, 1)) -
                 w(0, 1) * (w(1, 0) * w(2, 2) - w(1, 2) * w(2, 0)) +
                 w(0, 2) * (w(1, 0) * w(2, 1) - w(1, 1) * w(2, 0));
    return std::abs(det - 1.0) <= tol;
}

CameraSpacePoint world_to_camera(const Vec3& m, const Pose& pose) {
    return CameraSpacePoint(pose.rotation * m + pose.translation);
}

EquirectProjection project_equirect(const CameraSpacePoint& t, const EquirectCamera& cam) {
    if (t.t_r <= 0.0) throw Error(ErrorCode::ZeroRadius, "cannot project the camera center");
    double lon = std::atan2(t.t.x, t.t.z);
    if (lon >= kPi) lon -= 2.0 * kPi;  // atan2 returns (-pi, pi]; fold the seam to -pi
    double sine = t.t.y / t.t_r;
    sine = sine < -1.0 ? -1.0 : (sine > 1.0 ? 1.0 : sine);
    double lat = std::asin(sine);

    EquirectProjection out;
    out.lonlat = {lon, lat};
    out.screen.s = {lon / kPi, 2.0 * lat / kPi};
    out.pixel.p = {(out.screen.s.x + 1.0) * cam.width * 0.5,
                   (out.screen.s.y + 1.0) * cam.height * 0.5};
    return out;
}

namespace {

inline void check_pole(const CameraSpacePoint& t, double& u, double& rho) {
    u = t.t.x * t.t.x + t.t.z * t.t.z;
    rho = std::sqrt(u);
    if (rho <= kPoleEpsilon * t.t_r || t.t_r <= 0.0)
        throw Error(ErrorCode::PoleDegenerate, "projection Jacobian is degenerate near the poles");
}

}  // namespace

ProjJacobian jacobian_equirect(const CameraSpacePoint& t, const EquirectCamera& cam) {
    double u, rho;
    check_pole(t, u, rho);
    double tx = t.t.x, ty = t.t.y, tz = t.t.z;
    double r2 = t.t_r * t.t_r;
    double wf = cam.width / (2.0 * kPi);
    double hf = cam.height / kPi;

    ProjJacobian j;
    j(0, 0) = wf * tz / u;
    j(0, 1) = 0.0;
    j(0, 2) = -wf * tx / u;
    j(1, 0) = -hf * tx * ty / (r2 * rho);
    j(1, 1) = hf * rho / r2;
    j(1, 2) = -hf * tz * ty / (r2 * rho);
    return j;
}

ProjJacobianGrad jacobian_equirect_grad(const CameraSpacePoint& t, const EquirectCamera& cam) {
    double u, rho;
    check_pole(t, u, rho);
    double tx = t.t.x, ty = t.t.y, tz = t.t.z;
    double r2 = t.t_r * t.t_r;
    double u2 = u * u;
    double wf = cam.width / (2.0 * kPi);
    double hf = cam.height / kPi;

    ProjJacobianGrad g;

    // Row p_x: entries wf*tz/u, 0, -wf*tx/u depend on (tx, tz) only.
    g.grad[0][0] = {-2.0 * wf * tx * tz / u2, 0.0, wf * (tx * tx - tz * tz) / u2};
    g.grad[0][1] = {0.0, 0.0, 0.0};
    g.grad[0][2] = {wf * (tx * tx - tz * tz) / u2, 0.0, 2.0 * wf * tx * tz / u2};

    // Row p_y. Common factors: base = hf / (r2 * rho).
    double base = hf / (r2 * rho);
    // J10 = -base * tx * ty
    g.grad[1][0] = {
        -base * ty * (1.0 - 2.0 * tx * tx / r2 - tx * tx / u),
        -base * tx * (1.0 - 2.0 * ty * ty / r2),
        base * tx * ty * tz * (2.0 / r2 + 1.0 / u),
    };
    // J11 = hf * rho / r2
    g.grad[1][1] = {
        base * tx * (1.0 - 2.0 * u / r2),
        -2.0 * hf * rho * ty / (r2 * r2),
        base * tz * (1.0 - 2.0 * u / r2),
    };
    // J12 = -base * tz * ty
    g.grad[1][2] = {
        base * tx * ty * tz * (2.0 / r2 + 1.0 / u),
        -base * tz * (1.0 - 2.0 * ty * ty / r2),
        -base * ty * (1.0 - 2.0 * tz * tz / r2 - tz * tz / u),
    };
    return g;
}

Vec3 unproject_equirect(const PixelCoord& p, const EquirectCamera& cam) {
    if (p.p.x < 0.0 || p.p.x > cam.width || p.p.y < 0.0 || p.p.y > cam.height)
        throw Error(ErrorCode::OutOfBounds, "pixel outside the image");
    double sx = 2.0 * p.p.x / cam.width - 1.0;
    double sy = 2.0 * p.p.y / cam.height - 1.0;
    double lon = sx * kPi;
    double lat = sy * kPi * 0.5;
    double cl = std::cos(lat);
    return {cl * std::sin(lon), std::sin(lat), cl * std::cos(lon)};
}

PixelCoord project_perspective(const CameraSpacePoint& t, const PerspectiveCamera& cam) {
    if (t.t.z <= 0.0) throw Error(ErrorCode::BehindCamera, "point behind the pinhole camera");
    return {{cam.fx * t.t.x / t.t.z + cam.cx, cam.fy * t.t.y / t.t.z + cam.cy}};
}

}  // namespace omnisplat
