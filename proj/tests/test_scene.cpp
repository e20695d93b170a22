#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omnisplat/scene.hpp"
#include "test_utils.hpp"

using namespace omnisplat;
using namespace testutil;
using doctest::Approx;

TEST_CASE("build_covariance3d axis-aligned cases") {
    SymMat3 s1 = build_covariance3d({1, 0, 0, 0}, {1, 1, 1});
    CHECK(s1.xx == Approx(1.0));
    CHECK(s1.yy == Approx(1.0));
    CHECK(s1.zz == Approx(1.0));
    CHECK(s1.xy == Approx(0.0).scale(1.0));

    SymMat3 s2 = build_covariance3d({1, 0, 0, 0}, {2, 1, 1});
    CHECK(s2.xx == Approx(4.0));
    CHECK(s2.yy == Approx(1.0));
    CHECK(s2.zz == Approx(1.0));

    // 90 degrees about Z moves the long axis from X to Y: diag(1, 4, 1).
    double c = std::cos(kPi / 4), s = std::sin(kPi / 4);
    SymMat3 s3 = build_covariance3d({c, 0, 0, s}, {2, 1, 1});
    CHECK(s3.xx == Approx(1.0));
    CHECK(s3.yy == Approx(4.0));
    CHECK(s3.zz == Approx(1.0));
    CHECK(s3.xy == Approx(0.0).scale(1.0));
}

TEST_CASE("covariance eigenstructure matches the scales") {
    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 100; ++trial) {
        Vec4 q = random_unit_quat(rng);
        Vec3 s{uniform(rng, 0.1, 3.0), uniform(rng, 0.1, 3.0), uniform(rng, 0.1, 3.0)};
        Mat3 sigma = build_covariance3d(q, s).to_mat3();
        Mat3 r = quat_to_rotation(q);
        // Each rotated axis is an eigenvector with eigenvalue s_k^2.
        for (int k = 0; k < 3; ++k) {
            Vec3 axis{r(0, k), r(1, k), r(2, k)};
            Vec3 mapped = sigma * axis;
            Vec3 expect = axis * (s[k] * s[k]);
            CHECK((mapped - expect).norm() < 1e-9 * std::max(1.0, s[k] * s[k]));
        }
        // Normalization is internal: scaling the quaternion changes nothing.
        Mat3 sigma2 = build_covariance3d(q * 3.7, s).to_mat3();
        for (int i = 0; i < 9; ++i) CHECK(sigma.m[i] == Approx(sigma2.m[i]).epsilon(1e-12));
    }
}

TEST_CASE("eval_sh constant and zero cases") {
    std::vector<Vec3> coeffs(1, Vec3{0.2, -0.3, 0.1});
    Vec3 c = eval_sh(coeffs.data(), {0, 0, 1}, 0);
    CHECK(c.x == Approx(0.2 * kShC0 + 0.5));
    CHECK(c.y == Approx(-0.3 * kShC0 + 0.5));
    CHECK(c.z == Approx(0.1 * kShC0 + 0.5));

    std::vector<Vec3> zeros(16, Vec3{});
    Vec3 gray = eval_sh(zeros.data(), {0, 1, 0}, 3);
    CHECK(gray.x == Approx(0.5));
    CHECK(gray.y == Approx(0.5));
    CHECK(gray.z == Approx(0.5));
}

TEST_CASE("eval_sh degree-1 y-band is antisymmetric about 0.5") {
    std::vector<Vec3> coeffs(4, Vec3{});
    coeffs[1] = {0.25, 0.25, 0.25};  // the y-proportional band
    Vec3 up = eval_sh(coeffs.data(), {0, 1, 0}, 1);
    Vec3 down = eval_sh(coeffs.data(), {0, -1, 0}, 1);
    CHECK(up.x + down.x == Approx(1.0).epsilon(1e-12));
    CHECK(up.x != Approx(0.5));
}

TEST_CASE("eval_sh is linear in the coefficients before clamping") {
    std::mt19937_64 rng(9);
    std::vector<Vec3> a(16), b(16), sum(16);
    for (int i = 0; i < 16; ++i) {
        a[i] = {uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05)};
        b[i] = {uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05), uniform(rng, -0.05, 0.05)};
        sum[i] = a[i] + b[i];
    }
    std::normal_distribution<double> n;
    for (int trial = 0; trial < 20; ++trial) {
        Vec3 dir = Vec3{n(rng), n(rng), n(rng)}.normalized();
        Vec3 ca = eval_sh(a.data(), dir, 3);
        Vec3 cb = eval_sh(b.data(), dir, 3);
        Vec3 cs = eval_sh(sum.data(), dir, 3);
        // Small coefficients keep everything clear of the clamp; the 0.5
        // offset appears once on each side of the identity.
        CHECK(cs.x == Approx(ca.x + cb.x - 0.5).epsilon(1e-12));
        CHECK(cs.y == Approx(ca.y + cb.y - 0.5).epsilon(1e-12));
        CHECK(cs.z == Approx(ca.z + cb.z - 0.5).epsilon(1e-12));
    }
}

TEST_CASE("init_from_points basics") {
    CHECK_THROWS_AS(init_from_points({}), Error);

    // A single gray point inverts to a zero DC coefficient.
    GaussianCloud one = init_from_points({{{1, 2, 3}, {0.5, 0.5, 0.5}}});
    CHECK(one.size() == 1);
    CHECK(one.sh_coeffs[0].x == Approx(0.0).scale(1.0));
    CHECK(one.activated_opacity(0) == Approx(0.1));
    CHECK(one.rotations[0].w == 1.0);

    // Unit tetrahedron: every point sees the same three neighbor distances.
    double a = 1.0 / std::sqrt(2.0);
    std::vector<ColoredPoint> tetra = {
        {{1, 0, -a}, {1, 0, 0}},
        {{-1, 0, -a}, {0, 1, 0}},
        {{0, 1, a}, {0, 0, 1}},
        {{0, -1, a}, {1, 1, 0}},
    };
    GaussianCloud t = init_from_points(tetra);
    double s0 = t.activated_scale(0).x;
    for (std::size_t i = 0; i < 4; ++i) {
        Vec3 s = t.activated_scale(i);
        CHECK(s.x == Approx(s0).epsilon(1e-12));
        CHECK(s.y == Approx(s.x));
        CHECK(s.z == Approx(s.x));
    }
}

TEST_CASE("init_from_points invariants on random input") {
    std::mt19937_64 rng(21);
    std::vector<ColoredPoint> pts;
    for (int i = 0; i < 500; ++i)
        pts.push_back({{uniform(rng, -5, 5), uniform(rng, -5, 5), uniform(rng, -5, 5)},
                       {uniform(rng, 0, 1), uniform(rng, 0, 1), uniform(rng, 0, 1)}});
    GaussianCloud cloud = init_from_points(pts);
    REQUIRE(cloud.size() == pts.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        Vec3 s = cloud.activated_scale(i);
        CHECK(std::isfinite(s.x));
        CHECK(s.x > 0.0);
        double o = cloud.activated_opacity(i);
        CHECK(o > 0.0);
        CHECK(o < 1.0);
        CHECK(std::abs(normalized(cloud.rotations[i]).norm() - 1.0) < 1e-12);
    }

    // Duplicated points fall back to the minimum-distance clamp.
    std::vector<ColoredPoint> dup(5, {{1, 1, 1}, {0.5, 0.5, 0.5}});
    GaussianCloud d = init_from_points(dup);
    for (std::size_t i = 0; i < d.size(); ++i) {
        CHECK(std::isfinite(d.log_scales[i].x));
        CHECK(d.activated_scale(i).x > 0.0);
    }
}

TEST_CASE("cloud filter keeps order and fields together") {
    std::mt19937_64 rng(31);
    GaussianCloud cloud = random_cloud(rng, CloudSpec{.count = 10});
    GaussianCloud copy = cloud;
    std::vector<char> keep(10, 1);
    keep[2] = keep[7] = 0;
    cloud.filter(keep);
    REQUIRE(cloud.size() == 8);
    int bc = cloud.basis_count();
    std::size_t src = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i, ++src) {
        while (!keep[src]) ++src;
        CHECK(cloud.positions[i].x == copy.positions[src].x);
        CHECK(cloud.opacity_logits[i] == copy.opacity_logits[src]);
        CHECK(cloud.sh_coeffs[i * bc + 5].y == copy.sh_coeffs[src * bc + 5].y);
    }
}
