#pragma once

// Tile-based forward renderer for the equirectangular screen. Gaussians are
// projected with the local affine approximation (2x3 projection Jacobian),
// binned to 16x16 tiles with seam wrap-around, sorted by camera distance t_r
// and alpha-blended front to back. reference_render is the brute-force
// per-pixel oracle used by the tests.

#include <optional>
#include <vector>

#include "omnisplat/camera.hpp"
#include "omnisplat/image.hpp"
#include "omnisplat/scene.hpp"

namespace omnisplat {

inline constexpr double kAlphaMin = 1.0 / 255.0;
inline constexpr double kAlphaMax = 0.99;
inline constexpr double kTransmittanceStop = 1e-4;  // accumulated alpha 0.9999
inline constexpr double kLowpass = 0.3;             // pixel^2, added to cov diagonal
inline constexpr double kNearEpsilon = 0.01;        // t_r cull distance
inline constexpr int kDefaultTileSize = 16;

struct RenderSettings {
    int tile_size = kDefaultTileSize;
    Vec3 background{0, 0, 0};
};

// Screen-space state of one projected Gaussian.
struct SplatProjection {
    int gaussian_id = -1;
    Vec2 p;              // projected center, pixels
    SymMat2 cov;         // low-pass-filtered 2D covariance
    SymMat2 conic;       // its inverse
    double radius = 0;   // 3-sigma extent in pixels
    double depth = 0;    // t_r sort key
    Vec3 color;          // SH-evaluated RGB
    double alpha_base = 0;  // activated opacity
    Vec3 t;              // camera-space center, retained for the backward pass
};

struct TileGrid {
    int tile_size = kDefaultTileSize;
    int tiles_x = 0, tiles_y = 0;
    // Per tile: indices into the projection array, ascending (depth, gaussian_id).
    std::vector<std::vector<int>> tiles;

    int tile_count() const { return tiles_x * tiles_y; }
};

struct RenderOutput {
    Image color;
    std::vector<double> transmittance;  // per pixel, final T
    std::vector<int> contributors;      // per pixel, count of blended instances
    std::vector<int> last_contrib;      // per pixel, 1-based index of the last
                                        // blended instance in its tile list
    std::vector<SplatProjection> projections;
    TileGrid grid;

    // Inputs recorded for consistency checks in the backward pass.
    std::size_t cloud_size = 0;
    Pose pose;
    EquirectCamera camera;
    Vec3 background;
};

// Projects one Gaussian of the cloud. Returns nullopt when culled: t_r below
// kNearEpsilon, pole-degenerate for this view, or activated opacity below
// kAlphaMin.
std::optional<SplatProjection> project_gaussian(const GaussianCloud& cloud, std::size_t index,
                                                const Pose& pose, const EquirectCamera& cam);

// Bins projections to tiles. Horizontal overlap wraps modulo the image width,
// so a splat at the seam lands in tiles on both edges.
TileGrid bin_to_tiles(const std::vector<SplatProjection>& projections, const EquirectCamera& cam,
                      int tile_size = kDefaultTileSize);

// Alpha-blends the binned instances; pixels sample at their centers.
RenderOutput blend_forward(TileGrid grid, std::vector<SplatProjection> projections,
                           const EquirectCamera& cam, const RenderSettings& settings = {});

// project_gaussian -> bin_to_tiles -> blend_forward. Deterministic for fixed
// inputs regardless of thread count.
RenderOutput render(const GaussianCloud& cloud, const Pose& pose, const EquirectCamera& cam,
                    const RenderSettings& settings = {});

// Brute-force oracle: no tiling, no radius cutoff; every Gaussian is
// evaluated at every pixel in global t_r order.
RenderOutput reference_render(const GaussianCloud& cloud, const Pose& pose,
                              const EquirectCamera& cam, const RenderSettings& settings = {});

}  // namespace omnisplat
