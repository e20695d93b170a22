#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "omnisplat/metrics.hpp"
#include "test_utils.hpp"

using namespace omnisplat;
using namespace testutil;
using doctest::Approx;

namespace {

Image random_image(std::mt19937_64& rng, int w, int h) {
    Image img(w, h);
    for (double& v : img.data) v = uniform(rng, 0.0, 1.0);
    return img;
}

}  // namespace

TEST_CASE("psnr arithmetic") {
    std::mt19937_64 rng(1);
    Image gt = random_image(rng, 32, 16);
    Image off = gt;
    for (double& v : off.data) v += 0.1;
    CHECK(psnr(gt, off) == Approx(20.0).epsilon(1e-12));

    CHECK(psnr(gt, gt) == kPsnrCap);

    Image other(16, 16);
    CHECK_THROWS_AS(psnr(gt, other), Error);
}

TEST_CASE("ssim identity and symmetry") {
    std::mt19937_64 rng(2);
    Image a = random_image(rng, 40, 24);
    Image b = random_image(rng, 40, 24);
    CHECK(ssim(a, a) == Approx(1.0).epsilon(1e-12));
    CHECK(ssim(a, b) == Approx(ssim(b, a)).epsilon(1e-9));
    CHECK(ssim(a, b) < 1.0);
}

TEST_CASE("ssim gradient matches finite differences") {
    std::mt19937_64 rng(3);
    Image a = random_image(rng, 24, 14);
    Image b = random_image(rng, 24, 14);
    Image grad(24, 14);
    ssim_with_gradient(a, b, grad);

    std::uniform_int_distribution<std::size_t> pick(0, a.data.size() - 1);
    for (int trial = 0; trial < 60; ++trial) {
        std::size_t idx = pick(rng);
        auto f = [&](double v) {
            Image probe = a;
            probe.data[idx] = v;
            return ssim(probe, b);
        };
        FdResult fd = validated_central_diff(f, a.data[idx], 1e-4);
        REQUIRE(fd.ok);
        CHECK(close_rel(grad.data[idx], fd.value, 1e-3, 1e-9));
    }
}
