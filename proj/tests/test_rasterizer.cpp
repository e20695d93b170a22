#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omnisplat/parallel.hpp"
#include "omnisplat/rasterizer.hpp"
#include "test_utils.hpp"

using namespace omnisplat;
using namespace testutil;
using doctest::Approx;

namespace {

GaussianCloud single_gaussian(const Vec3& pos, double scale, double opacity, const Vec3& rgb) {
    GaussianCloud cloud;
    cloud.sh_degree = 0;
    cloud.active_sh_degree = 0;
    cloud.resize(1);
    cloud.positions[0] = pos;
    cloud.log_scales[0] = {std::log(scale), std::log(scale), std::log(scale)};
    cloud.opacity_logits[0] = logit(opacity);
    cloud.sh_coeffs[0] = (rgb - Vec3{0.5, 0.5, 0.5}) * (1.0 / kShC0);
    return cloud;
}

double max_abs_diff(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i)
        m = std::max(m, std::abs(a.data[i] - b.data[i]));
    return m;
}

}  // namespace

TEST_CASE("project_gaussian on the optical axis") {
    EquirectCamera cam{2000, 1000};
    double sigma = 0.01;
    GaussianCloud cloud = single_gaussian({0, 0, 1}, sigma, 0.8, {1, 0, 0});
    auto proj = project_gaussian(cloud, 0, Pose{}, cam);
    REQUIRE(proj.has_value());
    CHECK(proj->p.x == Approx(1000.0));
    CHECK(proj->p.y == Approx(500.0));
    double f = cam.width / (2 * kPi);
    CHECK(proj->cov.a == Approx(f * f * sigma * sigma + kLowpass).epsilon(1e-9));
    CHECK(proj->cov.c == Approx(f * f * sigma * sigma + kLowpass).epsilon(1e-9));
    CHECK(std::abs(proj->cov.b) < 1e-12);
    CHECK(proj->depth == 1.0);
    CHECK(proj->alpha_base == Approx(0.8));
    CHECK(proj->color.x == Approx(1.0));
}

TEST_CASE("project_gaussian culls near-center, pole and transparent splats") {
    EquirectCamera cam{256, 128};
    GaussianCloud near = single_gaussian({0, 0, 1e-9}, 0.1, 0.8, {1, 1, 1});
    CHECK_FALSE(project_gaussian(near, 0, Pose{}, cam).has_value());

    GaussianCloud pole = single_gaussian({0, 2, 0}, 0.1, 0.8, {1, 1, 1});
    CHECK_FALSE(project_gaussian(pole, 0, Pose{}, cam).has_value());

    GaussianCloud faint = single_gaussian({0, 0, 2}, 0.1, 1.0 / 300.0, {1, 1, 1});
    CHECK_FALSE(project_gaussian(faint, 0, Pose{}, cam).has_value());

    // Depth is the Euclidean camera distance.
    GaussianCloud g = single_gaussian({1, 2, -2}, 0.1, 0.8, {1, 1, 1});
    auto proj = project_gaussian(g, 0, Pose{}, cam);
    REQUIRE(proj.has_value());
    CHECK(proj->depth == Approx(3.0));
}

TEST_CASE("bin_to_tiles basics and seam wrap") {
    EquirectCamera cam{2000, 1000};
    SplatProjection small;
    small.gaussian_id = 0;
    small.p = {200.0 + 8.0, 200.0 + 8.0};  // mid-tile for 16 px tiles
    small.radius = 4.0;
    small.depth = 1.0;
    TileGrid grid = bin_to_tiles({small}, cam, 16);
    std::size_t instances = 0;
    for (const auto& t : grid.tiles) instances += t.size();
    CHECK(instances == 1);

    SplatProjection seam = small;
    seam.p = {1.0, 500.0};
    seam.radius = 10.0;
    grid = bin_to_tiles({seam}, cam, 16);
    int row = 500 / 16;
    CHECK_FALSE(grid.tiles[row * grid.tiles_x + 0].empty());
    CHECK_FALSE(grid.tiles[row * grid.tiles_x + grid.tiles_x - 1].empty());

    // Ascending depth with id tie-break.
    SplatProjection far = small, nearer = small;
    far.gaussian_id = 0;
    far.depth = 2.0;
    nearer.gaussian_id = 1;
    nearer.depth = 1.0;
    grid = bin_to_tiles({far, nearer}, cam, 16);
    for (const auto& t : grid.tiles) {
        if (t.empty()) continue;
        REQUIRE(t.size() == 2);
        CHECK(t[0] == 1);
        CHECK(t[1] == 0);
    }
}

TEST_CASE("blend_forward reference cases") {
    EquirectCamera cam{64, 32};
    // One splat centered exactly on a pixel center, opacity 1: alpha clamps
    // to 0.99 and the pixel shows 0.99 * color.
    SplatProjection pr;
    pr.gaussian_id = 0;
    pr.p = {32.5, 16.5};  // center of pixel (32, 16)
    pr.cov = {4.0, 0.0, 4.0};
    pr.conic = pr.cov.inverse();
    pr.radius = 10.0;
    pr.depth = 1.0;
    pr.color = {1.0, 0.25, 0.0};
    pr.alpha_base = 1.0;

    RenderOutput out = blend_forward(bin_to_tiles({pr}, cam, 16), {pr}, cam);
    CHECK(out.color.at(32, 16, 0) == Approx(0.99));
    CHECK(out.color.at(32, 16, 1) == Approx(0.99 * 0.25));
    CHECK(out.transmittance[16 * 64 + 32] == Approx(0.01));

    // Two coincident splats, opacity 0.5, colors 1 and 0: C = 0.5.
    SplatProjection a = pr, b = pr;
    a.alpha_base = b.alpha_base = 0.5;
    a.color = {1, 1, 1};
    b.color = {0, 0, 0};
    a.depth = 1.0;
    b.depth = 2.0;
    b.gaussian_id = 1;
    out = blend_forward(bin_to_tiles({a, b}, cam, 16), {a, b}, cam);
    CHECK(out.color.at(32, 16, 0) == Approx(0.5));
    CHECK(out.contributors[16 * 64 + 32] == 2);

    // Empty scene: background color, transmittance 1.
    RenderSettings settings;
    settings.background = {0.2, 0.3, 0.4};
    out = blend_forward(bin_to_tiles({}, cam, 16), {}, cam, settings);
    CHECK(out.color.at(5, 5, 0) == Approx(0.2));
    CHECK(out.color.at(5, 5, 2) == Approx(0.4));
    CHECK(out.transmittance[5 * 64 + 5] == 1.0);
}

TEST_CASE("render of an empty cloud is black") {
    GaussianCloud empty;
    RenderOutput out = render(empty, Pose{}, EquirectCamera{128, 64});
    for (double v : out.color.data) CHECK(v == 0.0);
}

TEST_CASE("render is deterministic and thread-count independent") {
    std::mt19937_64 rng(41);
    GaussianCloud cloud = random_cloud(rng, CloudSpec{.count = 40});
    Pose pose = random_pose(rng);
    EquirectCamera cam{128, 64};

    RenderOutput a = render(cloud, pose, cam);
    RenderOutput b = render(cloud, pose, cam);
    CHECK(a.color.data == b.color.data);

    int saved = thread_count();
    set_thread_count(1);
    RenderOutput c = render(cloud, pose, cam);
    set_thread_count(4);
    RenderOutput d = render(cloud, pose, cam);
    set_thread_count(saved);
    CHECK(c.color.data == a.color.data);
    CHECK(d.color.data == a.color.data);
}

TEST_CASE("tiled render matches the brute-force reference on compact scenes") {
    std::mt19937_64 rng(43);
    for (int scene = 0; scene < 50; ++scene) {
        CloudSpec spec;
        spec.count = 20 + scene % 80;
        spec.min_opacity = 0.05;
        spec.max_opacity = 0.3;  // keeps every splat inside its 3-sigma box
        GaussianCloud cloud = random_cloud(rng, spec);
        Pose pose = random_pose(rng);
        EquirectCamera cam{128, 64};
        RenderOutput tiled = render(cloud, pose, cam);
        RenderOutput ref = reference_render(cloud, pose, cam);
        CHECK(max_abs_diff(tiled.color, ref.color) < 1e-5);
    }
}

TEST_CASE("reference_render reproduces the analytic single-splat value") {
    EquirectCamera cam{200, 100};
    double sigma = 0.05, opacity = 0.6;
    Vec3 color{0.9, 0.4, 0.1};
    GaussianCloud cloud = single_gaussian({0, 0, 1}, sigma, opacity, color);
    RenderOutput out = reference_render(cloud, Pose{}, cam);

    auto proj = project_gaussian(cloud, 0, Pose{}, cam);
    REQUIRE(proj.has_value());
    std::mt19937_64 rng(47);
    for (int k = 0; k < 10; ++k) {
        int px = 100 + static_cast<int>(uniform(rng, -6, 6));
        int py = 50 + static_cast<int>(uniform(rng, -6, 6));
        double dx = proj->p.x - (px + 0.5);
        double dy = proj->p.y - (py + 0.5);
        double power = 0.5 * (proj->conic.a * dx * dx + proj->conic.c * dy * dy) +
                       proj->conic.b * dx * dy;
        double alpha = std::min(kAlphaMax, opacity * std::exp(-power));
        double expect = alpha >= kAlphaMin ? alpha * color.x : 0.0;
        CHECK(out.color.at(px, py, 0) == Approx(expect).epsilon(1e-12));
    }
}

TEST_CASE("seam continuity under integer yaw shifts") {
    std::mt19937_64 rng(53);
    CloudSpec spec;
    spec.count = 60;
    spec.avoid_poles = false;
    // Compact splats: opacity below 0.35 keeps every contribution inside the
    // 3-sigma box, so tile granularity cannot leak across the shift.
    spec.min_opacity = 0.05;
    spec.max_opacity = 0.3;
    GaussianCloud cloud = random_cloud(rng, spec);
    EquirectCamera cam{128, 64};
    Pose base;  // identity, centered at the origin

    RenderOutput ref = render(cloud, base, cam);
    for (int k : {1, 7, 64, 127}) {
        Pose yawed;
        yawed.rotation = rot_y(2.0 * kPi * k / cam.width);
        RenderOutput moved = render(cloud, yawed, cam);
        double worst = 0.0;
        for (int y = 0; y < cam.height; ++y)
            for (int x = 0; x < cam.width; ++x)
                for (int c = 0; c < 3; ++c) {
                    int shifted = (x + k) % cam.width;
                    worst = std::max(worst,
                                     std::abs(moved.color.at(shifted, y, c) - ref.color.at(x, y, c)));
                }
        CHECK(worst < 1e-3);
    }
}

TEST_CASE("splats behind the camera render (t_r ordering, no frustum)") {
    GaussianCloud cloud = single_gaussian({0, 0, -1.5}, 0.05, 0.9, {1, 0, 0});
    EquirectCamera cam{256, 128};
    RenderOutput out = render(cloud, Pose{}, cam);
    // lon = pi folds to the left edge, equator row.
    CHECK(out.color.at(0, cam.height / 2, 0) > 0.5);

    // A perspective-style z-sort control: z is negative, so a z-culling
    // renderer would have dropped it entirely.
    auto proj = project_gaussian(cloud, 0, Pose{}, cam);
    REQUIRE(proj.has_value());
    CHECK(proj->t.z < 0.0);
    CHECK(proj->depth > 0.0);
}

TEST_CASE("occlusion ordering uses camera distance, accumulation stays bounded") {
    // Front red splat at distance 1, back blue at distance 2, same direction.
    GaussianCloud cloud;
    cloud.sh_degree = 0;
    cloud.resize(2);
    cloud.positions[0] = {0, 0, 1};
    cloud.positions[1] = {0, 0, 2};
    for (int i = 0; i < 2; ++i) {
        cloud.log_scales[i] = {std::log(0.05 * (i + 1)), std::log(0.05 * (i + 1)),
                               std::log(0.05 * (i + 1))};
        cloud.opacity_logits[i] = logit(0.7);
    }
    cloud.sh_coeffs[0] = (Vec3{1, 0, 0} - Vec3{0.5, 0.5, 0.5}) * (1.0 / kShC0);
    cloud.sh_coeffs[1] = (Vec3{0, 0, 1} - Vec3{0.5, 0.5, 0.5}) * (1.0 / kShC0);

    EquirectCamera cam{256, 128};
    RenderOutput out = render(cloud, Pose{}, cam);
    int cx = 128, cy = 64;
    double red = out.color.at(cx, cy, 0);
    double blue = out.color.at(cx, cy, 2);
    CHECK(red > blue);  // the nearer splat dominates

    // Raising the front opacity moves the pixel toward the front color.
    cloud.opacity_logits[0] = logit(0.95);
    RenderOutput out2 = render(cloud, Pose{}, cam);
    CHECK(out2.color.at(cx, cy, 0) > red);
    CHECK(out2.color.at(cx, cy, 2) < blue);

    for (double t : out.transmittance) {
        CHECK(t >= -1e-6);
        CHECK(1.0 - t <= 1.0 + 1e-6);  // accumulated opacity never exceeds 1
    }
}
