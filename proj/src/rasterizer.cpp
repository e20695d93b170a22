#include "omnisplat/rasterizer.hpp"

#include <algorithm>
#include <cmath>

#include "omnisplat/parallel.hpp"

namespace omnisplat {

namespace {

// Minimal-magnitude horizontal difference on the wrapped axis.
inline double wrap_dx(double dx, double width) { return std::remainder(dx, width); }

}  // namespace

std::optional<SplatProjection> project_gaussian(const GaussianCloud& cloud, std::size_t index,
                                                const Pose& pose, const EquirectCamera& cam) {
    CameraSpacePoint t = world_to_camera(cloud.positions[index], pose);
    if (t.t_r < kNearEpsilon) return std::nullopt;

    double rho = std::sqrt(t.t.x * t.t.x + t.t.z * t.t.z);
    if (rho <= kPoleEpsilon * t.t_r) return std::nullopt;

    double opacity = cloud.activated_opacity(index);
    if (opacity < kAlphaMin) return std::nullopt;

    EquirectProjection proj = project_equirect(t, cam);
    ProjJacobian jac = jacobian_equirect(t, cam);
    Mat23 m = jac.mul(pose.rotation);
    SymMat3 sigma3 = build_covariance3d(cloud.rotations[index], cloud.activated_scale(index));
    Mat3 s3 = sigma3.to_mat3();

    // cov2 = M Sigma M^T, rows of M are m0, m1.
    Vec3 m0{m(0, 0), m(0, 1), m(0, 2)};
    Vec3 m1{m(1, 0), m(1, 1), m(1, 2)};
    Vec3 sm0 = s3 * m0;
    Vec3 sm1 = s3 * m1;
    SymMat2 cov{dot(m0, sm0) + kLowpass, dot(m0, sm1), dot(m1, sm1) + kLowpass};

    SplatProjection out;
    out.gaussian_id = static_cast<int>(index);
    out.p = proj.pixel.p;
    out.cov = cov;
    out.conic = cov.inverse();
    out.radius = std::ceil(3.0 * std::sqrt(cov.max_eigenvalue()));
    out.depth = t.t_r;
    out.alpha_base = opacity;
    out.t = t.t;

    Vec3 view_dir = pose.rotation.transpose_mul(t.t) * (1.0 / t.t_r);
    out.color = eval_sh(&cloud.sh_coeffs[index * cloud.basis_count()], view_dir,
                        cloud.active_sh_degree);
    return out;
}

TileGrid bin_to_tiles(const std::vector<SplatProjection>& projections, const EquirectCamera& cam,
                      int tile_size) {
    TileGrid grid;
    grid.tile_size = tile_size;
    grid.tiles_x = (cam.width + tile_size - 1) / tile_size;
    grid.tiles_y = (cam.height + tile_size - 1) / tile_size;
    grid.tiles.assign(static_cast<std::size_t>(grid.tile_count()), {});

    for (std::size_t i = 0; i < projections.size(); ++i) {
        const SplatProjection& pr = projections[i];
        double y0 = pr.p.y - pr.radius, y1 = pr.p.y + pr.radius;
        int ty0 = std::max(0, static_cast<int>(std::floor(y0 / tile_size)));
        int ty1 = std::min(grid.tiles_y - 1, static_cast<int>(std::floor(y1 / tile_size)));
        if (ty0 > ty1) continue;

        int tx0 = static_cast<int>(std::floor((pr.p.x - pr.radius) / tile_size));
        int tx1 = static_cast<int>(std::floor((pr.p.x + pr.radius) / tile_size));
        int span = tx1 - tx0 + 1;
        if (span >= grid.tiles_x) {
            tx0 = 0;
            tx1 = grid.tiles_x - 1;
        }
        for (int ty = ty0; ty <= ty1; ++ty) {
            for (int k = tx0; k <= tx1; ++k) {
                int tx = ((k % grid.tiles_x) + grid.tiles_x) % grid.tiles_x;
                grid.tiles[static_cast<std::size_t>(ty) * grid.tiles_x + tx].push_back(
                    static_cast<int>(i));
            }
        }
    }

    parallel_for(grid.tiles.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t ti = lo; ti < hi; ++ti) {
            std::sort(grid.tiles[ti].begin(), grid.tiles[ti].end(), [&](int a, int b) {
                if (projections[a].depth != projections[b].depth)
                    return projections[a].depth < projections[b].depth;
                return projections[a].gaussian_id < projections[b].gaussian_id;
            });
        }
    });
    return grid;
}

RenderOutput blend_forward(TileGrid grid, std::vector<SplatProjection> projections,
                           const EquirectCamera& cam, const RenderSettings& settings) {
    RenderOutput out;
    out.color = Image(cam.width, cam.height);
    out.transmittance.assign(out.color.pixel_count(), 1.0);
    out.contributors.assign(out.color.pixel_count(), 0);
    out.last_contrib.assign(out.color.pixel_count(), 0);
    out.camera = cam;
    out.background = settings.background;

    const int ts = grid.tile_size;
    const double width = cam.width;

    parallel_for(grid.tiles.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t ti = lo; ti < hi; ++ti) {
            const std::vector<int>& list = grid.tiles[ti];
            int tx = static_cast<int>(ti) % grid.tiles_x;
            int ty = static_cast<int>(ti) / grid.tiles_x;
            int x0 = tx * ts, x1 = std::min(cam.width, x0 + ts);
            int y0 = ty * ts, y1 = std::min(cam.height, y0 + ts);
            for (int py = y0; py < y1; ++py) {
                for (int px = x0; px < x1; ++px) {
                    double sx = px + 0.5, sy = py + 0.5;
                    double t_acc = 1.0;
                    Vec3 c{0, 0, 0};
                    int contribs = 0, last = 0;
                    for (std::size_t k = 0; k < list.size(); ++k) {
                        const SplatProjection& pr = projections[list[k]];
                        double dx = wrap_dx(pr.p.x - sx, width);
                        double dy = pr.p.y - sy;
                        double power = 0.5 * (pr.conic.a * dx * dx + pr.conic.c * dy * dy) +
                                       pr.conic.b * dx * dy;
                        if (power < 0.0) continue;
                        double alpha = std::min(kAlphaMax, pr.alpha_base * std::exp(-power));
                        if (alpha < kAlphaMin) continue;
                        double t_next = t_acc * (1.0 - alpha);
                        if (t_next < kTransmittanceStop) break;
                        c += pr.color * (alpha * t_acc);
                        t_acc = t_next;
                        ++contribs;
                        last = static_cast<int>(k) + 1;
                    }
                    std::size_t pix = static_cast<std::size_t>(py) * cam.width + px;
                    out.color.data[pix * 3 + 0] = c.x + t_acc * settings.background.x;
                    out.color.data[pix * 3 + 1] = c.y + t_acc * settings.background.y;
                    out.color.data[pix * 3 + 2] = c.z + t_acc * settings.background.z;
                    out.transmittance[pix] = t_acc;
                    out.contributors[pix] = contribs;
                    out.last_contrib[pix] = last;
                }
            }
        }
    });

    out.grid = std::move(grid);
    out.projections = std::move(projections);
    return out;
}

RenderOutput render(const GaussianCloud& cloud, const Pose& pose, const EquirectCamera& cam,
                    const RenderSettings& settings) {
    std::vector<std::optional<SplatProjection>> slots(cloud.size());
    parallel_for(cloud.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t i = lo; i < hi; ++i) slots[i] = project_gaussian(cloud, i, pose, cam);
    });
    std::vector<SplatProjection> projections;
    projections.reserve(cloud.size());
    for (auto& s : slots)
        if (s) projections.push_back(*s);

    TileGrid grid = bin_to_tiles(projections, cam, settings.tile_size);
    RenderOutput out = blend_forward(std::move(grid), std::move(projections), cam, settings);
    out.cloud_size = cloud.size();
    out.pose = pose;
    return out;
}

RenderOutput reference_render(const GaussianCloud& cloud, const Pose& pose,
                              const EquirectCamera& cam, const RenderSettings& settings) {
    std::vector<SplatProjection> projections;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (auto p = project_gaussian(cloud, i, pose, cam)) projections.push_back(*p);
    }
    std::vector<int> order(projections.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        if (projections[a].depth != projections[b].depth)
            return projections[a].depth < projections[b].depth;
        return projections[a].gaussian_id < projections[b].gaussian_id;
    });

    RenderOutput out;
    out.color = Image(cam.width, cam.height);
    out.transmittance.assign(out.color.pixel_count(), 1.0);
    out.contributors.assign(out.color.pixel_count(), 0);
    out.last_contrib.assign(out.color.pixel_count(), 0);
    out.cloud_size = cloud.size();
    out.pose = pose;
    out.camera = cam;
    out.background = settings.background;

    const double width = cam.width;
    parallel_for(static_cast<std::size_t>(cam.height), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t py = lo; py < hi; ++py) {
            for (int px = 0; px < cam.width; ++px) {
                double sx = px + 0.5, sy = py + 0.5;
                double t_acc = 1.0;
                Vec3 c{0, 0, 0};
                int contribs = 0;
                for (int idx : order) {
                    const SplatProjection& pr = projections[idx];
                    double dx = wrap_dx(pr.p.x - sx, width);
                    double dy = pr.p.y - sy;
                    double power = 0.5 * (pr.conic.a * dx * dx + pr.conic.c * dy * dy) +
                                   pr.conic.b * dx * dy;
                    if (power < 0.0) continue;
                    double alpha = std::min(kAlphaMax, pr.alpha_base * std::exp(-power));
                    if (alpha < kAlphaMin) continue;
                    double t_next = t_acc * (1.0 - alpha);
                    if (t_next < kTransmittanceStop) break;
                    c += pr.color * (alpha * t_acc);
                    t_acc = t_next;
                    ++contribs;
                }
                std::size_t pix = py * cam.width + px;
                out.color.data[pix * 3 + 0] = c.x + t_acc * settings.background.x;
                out.color.data[pix * 3 + 1] = c.y + t_acc * settings.background.y;
                out.color.data[pix * 3 + 2] = c.z + t_acc * settings.background.z;
                out.transmittance[pix] = t_acc;
                out.contributors[pix] = contribs;
            }
        }
    });
    out.projections = std::move(projections);
    return out;
}

}  // namespace omnisplat
