#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omnisplat/camera.hpp"
#include "test_utils.hpp"

using namespace omnisplat;
using namespace testutil;
using doctest::Approx;

namespace {
const EquirectCamera kCam{2000, 1000};
}

TEST_CASE("world_to_camera basics") {
    Pose identity;
    CameraSpacePoint t = world_to_camera({0, 0, 0}, identity);
    CHECK(t.t.x == 0.0);
    CHECK(t.t_r == 0.0);

    t = world_to_camera({1, 2, 3}, identity);
    CHECK(t.t.x == 1.0);
    CHECK(t.t.y == 2.0);
    CHECK(t.t.z == 3.0);
    CHECK(t.t_r == Approx(std::sqrt(14.0)).epsilon(1e-15));

    // W = +90 degrees about +Y: (1,0,0) lands on (0,0,-1).
    Pose yaw90;
    yaw90.rotation = rot_y(kPi / 2);
    t = world_to_camera({1, 0, 0}, yaw90);
    CHECK(std::abs(t.t.x) < 1e-15);
    CHECK(t.t.y == 0.0);
    CHECK(t.t.z == Approx(-1.0));
}

TEST_CASE("project_equirect reference points") {
    auto p1 = project_equirect(CameraSpacePoint({0, 0, 1}), kCam);
    CHECK(p1.lonlat.lon == 0.0);
    CHECK(p1.lonlat.lat == 0.0);
    CHECK(p1.pixel.p.x == Approx(1000.0));
    CHECK(p1.pixel.p.y == Approx(500.0));

    auto p2 = project_equirect(CameraSpacePoint({1, 0, 0}), kCam);
    CHECK(p2.lonlat.lon == Approx(kPi / 2));
    CHECK(p2.screen.s.x == Approx(0.5));
    CHECK(p2.pixel.p.x == Approx(1500.0));
    CHECK(p2.pixel.p.y == Approx(500.0));

    // +Y is down: lat pi/4 maps to the lower half.
    auto p3 = project_equirect(CameraSpacePoint({0, 1, 1}), kCam);
    CHECK(p3.lonlat.lat == Approx(kPi / 4));
    CHECK(p3.screen.s.y == Approx(0.5));
    CHECK(p3.pixel.p.x == Approx(1000.0));
    CHECK(p3.pixel.p.y == Approx(750.0));
}

TEST_CASE("project_equirect rejects the camera center") {
    CHECK_THROWS_AS(project_equirect(CameraSpacePoint({0, 0, 0}), kCam), Error);
}

TEST_CASE("projection is scale invariant and seam-consistent") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
        Vec3 d;
        std::normal_distribution<double> n;
        do {
            d = Vec3{n(rng), n(rng), n(rng)};
        } while (d.norm() < 1e-3);
        double k = uniform(rng, 0.1, 50.0);
        auto a = project_equirect(CameraSpacePoint(d), kCam);
        auto b = project_equirect(CameraSpacePoint(d * k), kCam);
        CHECK(a.pixel.p.x == Approx(b.pixel.p.x).epsilon(1e-12));
        CHECK(a.pixel.p.y == Approx(b.pixel.p.y).epsilon(1e-12));
    }

    // Longitudes just shy of +-pi land within eps*W/pi of opposite edges.
    double eps = 1e-6;
    auto near_pos = project_equirect(CameraSpacePoint({std::sin(kPi - eps), 0, std::cos(kPi - eps)}), kCam);
    auto near_neg = project_equirect(CameraSpacePoint({std::sin(-kPi + eps), 0, std::cos(-kPi + eps)}), kCam);
    CHECK(kCam.width - near_pos.pixel.p.x <= eps * kCam.width / kPi + 1e-9);
    CHECK(near_neg.pixel.p.x <= eps * kCam.width / kPi + 1e-9);

    // The seam itself folds to the left edge, keeping s_x in [-1, 1).
    auto seam = project_equirect(CameraSpacePoint({0, 0, -1}), kCam);
    CHECK(seam.screen.s.x == Approx(-1.0));
    CHECK(seam.pixel.p.x == Approx(0.0));
}

TEST_CASE("jacobian_equirect reference points") {
    auto j1 = jacobian_equirect(CameraSpacePoint({0, 0, 1}), kCam);
    CHECK(j1(0, 0) == Approx(2000.0 / (2 * kPi)));
    CHECK(j1(1, 1) == Approx(1000.0 / kPi));
    CHECK(j1(0, 1) == 0.0);
    CHECK(j1(0, 2) == Approx(0.0).scale(1.0));
    CHECK(j1(1, 0) == Approx(0.0).scale(1.0));
    CHECK(j1(1, 2) == Approx(0.0).scale(1.0));

    auto j2 = jacobian_equirect(CameraSpacePoint({1, 0, 0}), kCam);
    CHECK(j2(0, 0) == Approx(0.0).scale(1.0));
    CHECK(j2(0, 2) == Approx(-2000.0 / (2 * kPi)));
}

TEST_CASE("jacobian_equirect rejects pole-degenerate input") {
    CHECK_THROWS_AS(jacobian_equirect(CameraSpacePoint({0, 1, 0}), kCam), Error);
    CHECK_THROWS_AS(jacobian_equirect(CameraSpacePoint({1e-6, 1, 1e-6}), kCam), Error);
}

TEST_CASE("jacobian matches finite differences of the projection") {
    std::mt19937_64 rng(11);
    std::normal_distribution<double> n;
    int tested = 0;
    while (tested < 500) {
        Vec3 t{n(rng), n(rng), n(rng)};
        double tr = t.norm();
        if (tr < 0.1) continue;
        t *= 1.0 / tr;  // t_r = 1
        if (std::sqrt(t.x * t.x + t.z * t.z) < 1e-2) continue;
        // Skip directions near the seam, where p_x jumps by W.
        if (std::abs(std::atan2(t.x, t.z)) > kPi - 1e-2) continue;
        ++tested;

        ProjJacobian jac = jacobian_equirect(CameraSpacePoint(t), kCam);
        const double h = 1e-5;
        for (int k = 0; k < 3; ++k) {
            Vec3 tp = t, tm = t;
            tp[k] += h;
            tm[k] -= h;
            auto pp = project_equirect(CameraSpacePoint(tp), kCam);
            auto pm = project_equirect(CameraSpacePoint(tm), kCam);
            double fd_x = (pp.pixel.p.x - pm.pixel.p.x) / (2 * h);
            double fd_y = (pp.pixel.p.y - pm.pixel.p.y) / (2 * h);
            CHECK(close_rel(jac(0, k), fd_x, 1e-4, 1e-4));
            CHECK(close_rel(jac(1, k), fd_y, 1e-4, 1e-4));
        }
    }
}

TEST_CASE("equator rows of the jacobian vanish as expected") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 50; ++i) {
        double lon = uniform(rng, -3.0, 3.0);
        Vec3 t{std::sin(lon), 0.0, std::cos(lon)};
        auto j = jacobian_equirect(CameraSpacePoint(t * uniform(rng, 0.5, 3.0)), kCam);
        CHECK(j(1, 0) == Approx(0.0).scale(1.0));
        CHECK(j(1, 2) == Approx(0.0).scale(1.0));
        CHECK(j(0, 1) == 0.0);
    }
}

TEST_CASE("second derivatives of the projection match finite differences") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> n;
    int tested = 0;
    while (tested < 200) {
        Vec3 t{n(rng), n(rng), n(rng)};
        if (t.norm() < 0.3) continue;
        if (std::sqrt(t.x * t.x + t.z * t.z) < 0.05 * t.norm()) continue;
        ++tested;

        ProjJacobianGrad g = jacobian_equirect_grad(CameraSpacePoint(t), kCam);
        const double h = 1e-6 * t.norm();
        for (int k = 0; k < 3; ++k) {
            Vec3 tp = t, tm = t;
            tp[k] += h;
            tm[k] -= h;
            ProjJacobian jp = jacobian_equirect(CameraSpacePoint(tp), kCam);
            ProjJacobian jm = jacobian_equirect(CameraSpacePoint(tm), kCam);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 3; ++c) {
                    double fd = (jp(r, c) - jm(r, c)) / (2 * h);
                    CHECK(close_rel(g.grad[r][c][k], fd, 1e-3, 1e-3));
                }
        }
    }
}

TEST_CASE("unproject_equirect reference points and round trip") {
    Vec3 d1 = unproject_equirect({{kCam.width / 2.0, kCam.height / 2.0}}, kCam);
    CHECK(d1.x == Approx(0.0).scale(1.0));
    CHECK(d1.y == Approx(0.0).scale(1.0));
    CHECK(d1.z == Approx(1.0));

    Vec3 d2 = unproject_equirect({{kCam.width * 0.75, kCam.height / 2.0}}, kCam);
    CHECK(d2.x == Approx(1.0));
    CHECK(d2.y == Approx(0.0).scale(1.0));
    CHECK(d2.z == Approx(0.0).scale(1.0));

    CHECK_THROWS_AS(unproject_equirect({{-1.0, 0.0}}, kCam), Error);
    CHECK_THROWS_AS(unproject_equirect({{0.0, kCam.height + 1.0}}, kCam), Error);

    std::mt19937_64 rng(23);
    for (int i = 0; i < 1000; ++i) {
        PixelCoord p{{uniform(rng, 0.0, kCam.width - 1e-9), uniform(rng, 1e-3, kCam.height - 1e-3)}};
        Vec3 dir = unproject_equirect(p, kCam);
        CHECK(dir.norm() == Approx(1.0).epsilon(1e-12));
        double r = uniform(rng, 0.1, 10.0);
        auto back = project_equirect(CameraSpacePoint(dir * r), kCam);
        CHECK(std::abs(back.pixel.p.x - p.p.x) < 1e-9);
        CHECK(std::abs(back.pixel.p.y - p.p.y) < 1e-9);
    }
}

TEST_CASE("project_perspective reference points") {
    PerspectiveCamera cam{100, 100, 50, 50, 100, 100};
    auto p1 = project_perspective(CameraSpacePoint({0, 0, 1}), cam);
    CHECK(p1.p.x == Approx(50.0));
    CHECK(p1.p.y == Approx(50.0));

    auto p2 = project_perspective(CameraSpacePoint({1, 0, 1}), cam);
    CHECK(p2.p.x == Approx(150.0));

    PerspectiveCamera cam2{200, 200, 320, 240, 640, 480};
    auto p3 = project_perspective(CameraSpacePoint({0.5, -0.5, 2}), cam2);
    CHECK(p3.p.x == Approx(370.0));
    CHECK(p3.p.y == Approx(190.0));

    CHECK_THROWS_AS(project_perspective(CameraSpacePoint({0, 0, -1}), cam), Error);
    CHECK_THROWS_AS(project_perspective(CameraSpacePoint({1, 1, 0}), cam), Error);
}

TEST_CASE("pose validity check") {
    Pose good;
    good.rotation = rot_z(0.3) * rot_y(1.2);
    CHECK(good.is_valid());

    Pose skewed;
    skewed.rotation(0, 1) = 0.01;
    CHECK_FALSE(skewed.is_valid());

    Pose mirrored;
    mirrored.rotation(0, 0) = -1.0;  // det -1
    CHECK_FALSE(mirrored.is_valid());

    // center() inverts the transform.
    std::mt19937_64 rng(5);
    Pose pose = random_pose(rng, 1.0);
    Vec3 c = pose.center();
    CameraSpacePoint t = world_to_camera(c, pose);
    CHECK(t.t_r == Approx(0.0).scale(1.0).epsilon(1e-12));
}
