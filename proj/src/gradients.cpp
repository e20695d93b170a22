#include "omnisplat/gradients.hpp"

#include <cmath>
#include <cstring>

#include "omnisplat/parallel.hpp"

namespace omnisplat {

void GradientBuffer::resize(std::size_t n, int basis_count) {
    d_position.assign(n, Vec3{});
    d_sh.assign(n * basis_count, Vec3{});
    d_rotation.assign(n, Vec4{0, 0, 0, 0});
    d_log_scale.assign(n, Vec3{});
    d_opacity_logit.assign(n, 0.0);
    d_screen.assign(n, Vec2{});
    screen_norm_sum.assign(n, 0.0);
    screen_hits.assign(n, 0);
}

void GradientBuffer::zero_gradients() {
    std::fill(d_position.begin(), d_position.end(), Vec3{});
    std::fill(d_sh.begin(), d_sh.end(), Vec3{});
    std::fill(d_rotation.begin(), d_rotation.end(), Vec4{0, 0, 0, 0});
    std::fill(d_log_scale.begin(), d_log_scale.end(), Vec3{});
    std::fill(d_opacity_logit.begin(), d_opacity_logit.end(), 0.0);
    std::fill(d_screen.begin(), d_screen.end(), Vec2{});
}

void GradientBuffer::reset_screen_stats() {
    std::fill(screen_norm_sum.begin(), screen_norm_sum.end(), 0.0);
    std::fill(screen_hits.begin(), screen_hits.end(), 0L);
}

double d_screen_norm(const GradientBuffer& buf, std::size_t gaussian_id) {
    long hits = buf.screen_hits[gaussian_id];
    if (hits == 0) return 0.0;
    return buf.screen_norm_sum[gaussian_id] / static_cast<double>(hits);
}

namespace {

// Per-projection accumulator filled by the pixel loops. The conic entries use
// the (a, b, c) storage convention of SymMat2 with b counted once.
struct ProjAcc {
    Vec3 d_color;
    double d_opacity = 0.0;  // dL/d(activated opacity)
    Vec2 d_p;
    double d_conic_a = 0.0, d_conic_b = 0.0, d_conic_c = 0.0;
};

inline void add_to(ProjAcc& a, const ProjAcc& b) {
    a.d_color += b.d_color;
    a.d_opacity += b.d_opacity;
    a.d_p += b.d_p;
    a.d_conic_a += b.d_conic_a;
    a.d_conic_b += b.d_conic_b;
    a.d_conic_c += b.d_conic_c;
}

// d(R)/d(q_k) for a unit quaternion (w, x, y, z), k indexed w, x, y, z.
void quat_rotation_grad(const Vec4& q, Mat3 out[4]) {
    double w = q.w, x = q.x, y = q.y, z = q.z;
    out[0].m = {0, -2 * z, 2 * y, 2 * z, 0, -2 * x, -2 * y, 2 * x, 0};
    out[1].m = {0, 2 * y, 2 * z, 2 * y, -4 * x, -2 * w, 2 * z, 2 * w, -4 * x};
    out[2].m = {-4 * y, 2 * x, 2 * w, 2 * x, 0, 2 * z, -2 * w, 2 * z, -4 * y};
    out[3].m = {-4 * z, -2 * w, 2 * x, 2 * w, -4 * z, 2 * y, 2 * x, 2 * y, 0};
}

}  // namespace

void backward(const RenderOutput& render_out, const Image& d_image, const GaussianCloud& cloud,
              const Pose& pose, const EquirectCamera& cam, GradientBuffer& buf) {
    if (render_out.cloud_size != cloud.size() || render_out.camera.width != cam.width ||
        render_out.camera.height != cam.height ||
        std::memcmp(render_out.pose.rotation.m.data(), pose.rotation.m.data(),
                    sizeof(double) * 9) != 0)
        throw Error(ErrorCode::StateMismatch, "render output does not match the given scene");
    if (d_image.width != cam.width || d_image.height != cam.height)
        throw Error(ErrorCode::StateMismatch, "gradient image size does not match the camera");

    const int bc = cloud.basis_count();
    if (buf.size() != cloud.size() || buf.d_sh.size() != cloud.size() * static_cast<std::size_t>(bc))
        buf.resize(cloud.size(), bc);
    else
        buf.zero_gradients();

    const auto& projections = render_out.projections;
    const TileGrid& grid = render_out.grid;
    const int ts = grid.tile_size;
    const double width = cam.width;
    const Vec3 bg = render_out.background;

    // Pass 1: per-tile pixel loops, back to front, accumulating into per-tile
    // slots so tiles never write shared state.
    std::vector<std::vector<ProjAcc>> tile_acc(grid.tiles.size());
    parallel_for(grid.tiles.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t ti = lo; ti < hi; ++ti) {
            const std::vector<int>& list = grid.tiles[ti];
            if (list.empty()) continue;
            tile_acc[ti].assign(list.size(), ProjAcc{});
            std::vector<ProjAcc>& acc = tile_acc[ti];
            int tx = static_cast<int>(ti) % grid.tiles_x;
            int ty = static_cast<int>(ti) / grid.tiles_x;
            int x0 = tx * ts, x1 = std::min(cam.width, x0 + ts);
            int y0 = ty * ts, y1 = std::min(cam.height, y0 + ts);
            for (int py = y0; py < y1; ++py) {
                for (int px = x0; px < x1; ++px) {
                    std::size_t pix = static_cast<std::size_t>(py) * cam.width + px;
                    int last = render_out.last_contrib[pix];
                    if (last == 0) continue;
                    Vec3 dl_dc{d_image.data[pix * 3 + 0], d_image.data[pix * 3 + 1],
                               d_image.data[pix * 3 + 2]};
                    double bg_dot = dot(bg, dl_dc);
                    const double t_final = render_out.transmittance[pix];
                    double t_acc = t_final;
                    double sx = px + 0.5, sy = py + 0.5;
                    // Blend of the instances behind the current one, and the
                    // previous (further) instance's alpha/color for its update.
                    Vec3 suffix{0, 0, 0};
                    Vec3 last_color{0, 0, 0};
                    double last_alpha = 0.0;
                    for (int k = last - 1; k >= 0; --k) {
                        const SplatProjection& pr = projections[list[k]];
                        double dx = std::remainder(pr.p.x - sx, width);
                        double dy = pr.p.y - sy;
                        double power = 0.5 * (pr.conic.a * dx * dx + pr.conic.c * dy * dy) +
                                       pr.conic.b * dx * dy;
                        if (power < 0.0) continue;
                        double g = std::exp(-power);
                        double alpha = std::min(kAlphaMax, pr.alpha_base * g);
                        if (alpha < kAlphaMin) continue;

                        t_acc /= 1.0 - alpha;  // transmittance in front of this instance

                        ProjAcc& slot = acc[k];
                        double w_blend = alpha * t_acc;
                        slot.d_color += dl_dc * w_blend;

                        suffix = last_color * last_alpha + suffix * (1.0 - last_alpha);
                        double d_alpha = dot(pr.color - suffix, dl_dc) * t_acc;
                        d_alpha -= t_final / (1.0 - alpha) * bg_dot;
                        last_color = pr.color;
                        last_alpha = alpha;

                        if (pr.alpha_base * g < kAlphaMax) {  // clamp passes no gradient
                            slot.d_opacity += g * d_alpha;
                            double d_power = -g * pr.alpha_base * d_alpha;
                            double qx = pr.conic.a * dx + pr.conic.b * dy;
                            double qy = pr.conic.b * dx + pr.conic.c * dy;
                            slot.d_p += Vec2{d_power * qx, d_power * qy};
                            slot.d_conic_a += d_power * 0.5 * dx * dx;
                            slot.d_conic_b += d_power * dx * dy;
                            slot.d_conic_c += d_power * 0.5 * dy * dy;
                        }
                    }
                }
            }
        }
    });

    // Pass 2: fixed-order reduction over tiles, so the result is independent
    // of how pass 1 was scheduled.
    std::vector<ProjAcc> proj_acc(projections.size());
    for (std::size_t ti = 0; ti < grid.tiles.size(); ++ti) {
        const std::vector<int>& list = grid.tiles[ti];
        for (std::size_t k = 0; k < tile_acc[ti].size(); ++k)
            add_to(proj_acc[list[k]], tile_acc[ti][k]);
    }

    // Pass 3: per-Gaussian conversion down to raw parameters. Each Gaussian
    // has at most one projection, so the writes are disjoint.
    parallel_for(projections.size(), [&](std::size_t lo, std::size_t hi) {
        for (std::size_t j = lo; j < hi; ++j) {
            const SplatProjection& pr = projections[j];
            const ProjAcc& acc = proj_acc[j];
            const std::size_t gid = static_cast<std::size_t>(pr.gaussian_id);

            // Screen-space gradient in uniform units: p = (s + 1) * {W, H} / 2.
            Vec2 d_s{acc.d_p.x * cam.width * 0.5, acc.d_p.y * cam.height * 0.5};
            buf.d_screen[gid] = d_s;
            buf.screen_norm_sum[gid] += d_s.norm();
            buf.screen_hits[gid] += 1;

            // Opacity through the sigmoid.
            double o = pr.alpha_base;
            buf.d_opacity_logit[gid] = acc.d_opacity * o * (1.0 - o);

            // Color: SH coefficients and the view-direction path.
            CameraSpacePoint tp(pr.t);
            Vec3 dir = pose.rotation.transpose_mul(pr.t) * (1.0 / tp.t_r);
            double basis[kMaxShBasis];
            Vec3 dbasis[kMaxShBasis];
            sh_basis_grad(dir, cloud.active_sh_degree, basis, dbasis);
            int active_n = (cloud.active_sh_degree + 1) * (cloud.active_sh_degree + 1);
            const Vec3* coeffs = &cloud.sh_coeffs[gid * bc];
            Vec3 raw{0.5, 0.5, 0.5};
            for (int i = 0; i < active_n; ++i) raw += coeffs[i] * basis[i];
            Vec3 dl_color{raw.x < 0.0 ? 0.0 : acc.d_color.x, raw.y < 0.0 ? 0.0 : acc.d_color.y,
                          raw.z < 0.0 ? 0.0 : acc.d_color.z};
            Vec3 d_dir{0, 0, 0};
            for (int i = 0; i < active_n; ++i) {
                buf.d_sh[gid * bc + i] = dl_color * basis[i];
                double cdot = coeffs[i].x * dl_color.x + coeffs[i].y * dl_color.y +
                              coeffs[i].z * dl_color.z;
                d_dir += dbasis[i] * cdot;
            }
            // dir = (m - center) / |m - center|; |m - center| = t_r.
            Vec3 d_m_sh = (d_dir - dir * dot(dir, d_dir)) * (1.0 / tp.t_r);

            // Mean path: dL/dt += J^T dL/dp.
            ProjJacobian jac = jacobian_equirect(tp, cam);
            Vec3 d_t = jac.transpose_mul(acc.d_p);

            // Covariance path: conic -> cov2 -> {Sigma3, J} -> {q, S, t}.
            SymMat2 d_conic_full{acc.d_conic_a, 0.5 * acc.d_conic_b, acc.d_conic_c};
            const SymMat2& q2 = pr.conic;
            // dV = -Q dQ Q for symmetric Q.
            double qa = q2.a, qb = q2.b, qc = q2.c;
            double da = d_conic_full.a, db = d_conic_full.b, dc = d_conic_full.c;
            // (Q dQ Q) entries, Q = [[qa, qb], [qb, qc]], dQ = [[da, db], [db, dc]].
            double m00 = qa * da + qb * db, m01 = qa * db + qb * dc;
            double m10 = qb * da + qc * db, m11 = qb * db + qc * dc;
            SymMat2 d_cov{-(m00 * qa + m01 * qb), -(m00 * qb + m01 * qc), -(m10 * qb + m11 * qc)};

            Mat23 m23 = jac.mul(pose.rotation);
            SymMat3 sigma3 =
                build_covariance3d(cloud.rotations[gid], cloud.activated_scale(gid));
            Mat3 s3 = sigma3.to_mat3();

            // d_sigma3 = M^T dV M.
            Vec3 m0{m23(0, 0), m23(0, 1), m23(0, 2)};
            Vec3 m1{m23(1, 0), m23(1, 1), m23(1, 2)};
            Mat3 d_sigma3 = Mat3::zero();
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c)
                    d_sigma3(r, c) = d_cov.a * m0[r] * m0[c] + d_cov.b * (m0[r] * m1[c] + m1[r] * m0[c]) +
                                     d_cov.c * m1[r] * m1[c];

            // d_M = 2 dV M Sigma3 (2x3), then d_J = d_M W^T.
            Vec3 sm0 = s3 * m0;
            Vec3 sm1 = s3 * m1;
            Vec3 dm0 = (sm0 * d_cov.a + sm1 * d_cov.b) * 2.0;
            Vec3 dm1 = (sm0 * d_cov.b + sm1 * d_cov.c) * 2.0;
            Mat23 d_m23;
            for (int c = 0; c < 3; ++c) {
                d_m23(0, c) = dm0[c];
                d_m23(1, c) = dm1[c];
            }
            Mat23 d_jac = d_m23.mul(pose.rotation.transposed());

            ProjJacobianGrad jg = jacobian_equirect_grad(tp, cam);
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 3; ++c) d_t += jg.grad[r][c] * d_jac(r, c);

            // Position: dL/dm = W^T dL/dt plus the SH view-direction term.
            buf.d_position[gid] = pose.rotation.transpose_mul(d_t) + d_m_sh;

            // Sigma3 -> rotation quaternion and log-scales.
            Vec4 q_raw = cloud.rotations[gid];
            Vec4 q_unit = normalized(q_raw);
            Mat3 rot = quat_to_rotation(q_unit);
            Vec3 s_act = cloud.activated_scale(gid);
            // dL/dR = 2 dSigma R D, D = diag(s^2).
            Mat3 d_rot = Mat3::zero();
            for (int r = 0; r < 3; ++r)
                for (int c = 0; c < 3; ++c) {
                    double v = 0.0;
                    for (int k = 0; k < 3; ++k) v += d_sigma3(r, k) * rot(k, c);
                    d_rot(r, c) = 2.0 * v * s_act[c] * s_act[c];
                }
            Mat3 rgrad[4];
            quat_rotation_grad(q_unit, rgrad);
            Vec4 d_q_unit{0, 0, 0, 0};
            for (int k = 0; k < 4; ++k) {
                double v = 0.0;
                for (int i = 0; i < 9; ++i) v += d_rot.m[i] * rgrad[k].m[i];
                d_q_unit[k] = v;
            }
            double qnorm = q_raw.norm();
            double qdot = dot(q_unit, d_q_unit);
            Vec4 d_q;
            for (int k = 0; k < 4; ++k) d_q[k] = (d_q_unit[k] - q_unit[k] * qdot) / qnorm;
            buf.d_rotation[gid] = d_q;

            // dL/ds_k = 2 s_k (R^T dSigma R)_kk, then through the log.
            Vec3 d_log{0, 0, 0};
            for (int k = 0; k < 3; ++k) {
                Vec3 rk{rot(0, k), rot(1, k), rot(2, k)};
                double rr = dot(rk, d_sigma3 * rk);
                d_log[k] = 2.0 * s_act[k] * rr * s_act[k];
            }
            buf.d_log_scale[gid] = d_log;
        }
    });
}

}  // namespace omnisplat
