#include "omnisplat/trainer.hpp"

#include <algorithm>
#include <cmath>

#include "omnisplat/metrics.hpp"

namespace omnisplat {

void TrainConfig::validate() const {
    if (lambda_ssim < 0.0 || lambda_ssim > 1.0)
        throw Error(ErrorCode::ValidationError, "lambda_ssim must be in [0, 1]");
    if (iterations < 0) throw Error(ErrorCode::ValidationError, "iterations must be >= 0");
    if (densify_interval <= 0 || opacity_reset_interval <= 0 || sh_warmup_interval <= 0)
        throw Error(ErrorCode::ValidationError, "intervals must be positive");
    if (densify_grad_threshold <= 0.0 || scale_split_threshold <= 0.0 || split_factor <= 0.0 ||
        prune_opacity <= 0.0 || prune_scale_world <= 0.0 || prune_radius_px <= 0.0)
        throw Error(ErrorCode::ValidationError, "densification thresholds must be positive");
    if (mask_bottom_fraction < 0.0 || mask_bottom_fraction >= 1.0)
        throw Error(ErrorCode::ValidationError, "mask_bottom_fraction must be in [0, 1)");
    if (sh_degree < 0 || sh_degree > 3)
        throw Error(ErrorCode::ValidationError, "sh_degree must be in 0..3");
}

LossResult loss(const Image& rendered, const Image& gt, double lambda_ssim,
                double mask_bottom_fraction) {
    if (!rendered.same_size(gt))
        throw Error(ErrorCode::DimensionMismatch, "loss: image sizes differ");

    const int h = rendered.height, w = rendered.width;
    const int masked_rows = static_cast<int>(std::floor(mask_bottom_fraction * h));
    const int keep = h - masked_rows;

    const Image* ra = &rendered;
    const Image* ga = &gt;
    Image crop_r, crop_g;
    if (keep != h) {
        crop_r = Image(w, keep);
        crop_g = Image(w, keep);
        std::copy_n(rendered.data.begin(), crop_r.data.size(), crop_r.data.begin());
        std::copy_n(gt.data.begin(), crop_g.data.size(), crop_g.data.begin());
        ra = &crop_r;
        ga = &crop_g;
    }

    const std::size_t n = ra->data.size();
    double l1 = 0.0;
    Image d_l1(w, keep);
    for (std::size_t i = 0; i < n; ++i) {
        double d = ra->data[i] - ga->data[i];
        l1 += std::abs(d);
        d_l1.data[i] = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    }
    l1 /= static_cast<double>(n);

    LossResult out;
    out.d_image = Image(w, h);
    double value = (1.0 - lambda_ssim) * l1;
    Image d_ssim(w, keep);
    if (lambda_ssim > 0.0) {
        double s = ssim_with_gradient(*ra, *ga, d_ssim);
        value += lambda_ssim * (1.0 - s);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double g = (1.0 - lambda_ssim) * d_l1.data[i] / static_cast<double>(n);
        if (lambda_ssim > 0.0) g -= lambda_ssim * d_ssim.data[i];
        out.d_image.data[i] = g;
    }
    out.value = value;
    return out;
}

void AdamState::resize(std::size_t n, int basis_count) {
    m_position.assign(n * 3, 0.0);
    v_position.assign(n * 3, 0.0);
    m_sh.assign(n * 3 * basis_count, 0.0);
    v_sh.assign(n * 3 * basis_count, 0.0);
    m_rotation.assign(n * 4, 0.0);
    v_rotation.assign(n * 4, 0.0);
    m_scale.assign(n * 3, 0.0);
    v_scale.assign(n * 3, 0.0);
    m_opacity.assign(n, 0.0);
    v_opacity.assign(n, 0.0);
}

namespace {

void filter_flat(std::vector<double>& v, const std::vector<char>& keep, int stride) {
    std::size_t out = 0;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (!keep[i]) continue;
        for (int k = 0; k < stride; ++k) v[out * stride + k] = v[i * stride + k];
        ++out;
    }
    v.resize(out * stride);
}

}  // namespace

void AdamState::filter(const std::vector<char>& keep, int basis_count) {
    filter_flat(m_position, keep, 3);
    filter_flat(v_position, keep, 3);
    filter_flat(m_sh, keep, 3 * basis_count);
    filter_flat(v_sh, keep, 3 * basis_count);
    filter_flat(m_rotation, keep, 4);
    filter_flat(v_rotation, keep, 4);
    filter_flat(m_scale, keep, 3);
    filter_flat(v_scale, keep, 3);
    filter_flat(m_opacity, keep, 1);
    filter_flat(v_opacity, keep, 1);
}

void AdamState::append_zeros(std::size_t added, int basis_count) {
    m_position.resize(m_position.size() + added * 3, 0.0);
    v_position.resize(v_position.size() + added * 3, 0.0);
    m_sh.resize(m_sh.size() + added * 3 * basis_count, 0.0);
    v_sh.resize(v_sh.size() + added * 3 * basis_count, 0.0);
    m_rotation.resize(m_rotation.size() + added * 4, 0.0);
    v_rotation.resize(v_rotation.size() + added * 4, 0.0);
    m_scale.resize(m_scale.size() + added * 3, 0.0);
    v_scale.resize(v_scale.size() + added * 3, 0.0);
    m_opacity.resize(m_opacity.size() + added, 0.0);
    v_opacity.resize(v_opacity.size() + added, 0.0);
}

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-15;

inline void adam_update(double& param, double grad, double& m, double& v, double lr,
                        double bias1, double bias2) {
    m = kBeta1 * m + (1.0 - kBeta1) * grad;
    v = kBeta2 * v + (1.0 - kBeta2) * grad * grad;
    double mhat = m / bias1;
    double vhat = v / bias2;
    param -= lr * mhat / (std::sqrt(vhat) + kAdamEps);
}

}  // namespace

void adam_step(GaussianCloud& cloud, const GradientBuffer& grads, AdamState& state,
               const TrainConfig& cfg, double scene_extent, long iteration) {
    const std::size_t n = cloud.size();
    const int bc = cloud.basis_count();
    state.step += 1;
    double bias1 = 1.0 - std::pow(kBeta1, static_cast<double>(state.step));
    double bias2 = 1.0 - std::pow(kBeta2, static_cast<double>(state.step));

    // Exponential decay of the position learning rate over the run.
    double t = cfg.iterations > 0
                   ? std::clamp(static_cast<double>(iteration) / cfg.iterations, 0.0, 1.0)
                   : 1.0;
    double lr_pos = std::exp((1.0 - t) * std::log(cfg.lr_position_init * scene_extent) +
                             t * std::log(cfg.lr_position_final * scene_extent));

    for (std::size_t i = 0; i < n; ++i) {
        for (int k = 0; k < 3; ++k)
            adam_update(cloud.positions[i][k], grads.d_position[i][k], state.m_position[i * 3 + k],
                        state.v_position[i * 3 + k], lr_pos, bias1, bias2);
        for (int b = 0; b < bc; ++b) {
            double lr = b == 0 ? cfg.lr_sh_dc : cfg.lr_sh_rest;
            std::size_t base = (i * bc + b) * 3;
            for (int k = 0; k < 3; ++k)
                adam_update(cloud.sh_coeffs[i * bc + b][k], grads.d_sh[i * bc + b][k],
                            state.m_sh[base + k], state.v_sh[base + k], lr, bias1, bias2);
        }
        for (int k = 0; k < 4; ++k)
            adam_update(cloud.rotations[i][k], grads.d_rotation[i][k], state.m_rotation[i * 4 + k],
                        state.v_rotation[i * 4 + k], cfg.lr_rotation, bias1, bias2);
        for (int k = 0; k < 3; ++k)
            adam_update(cloud.log_scales[i][k], grads.d_log_scale[i][k], state.m_scale[i * 3 + k],
                        state.v_scale[i * 3 + k], cfg.lr_scale, bias1, bias2);
        adam_update(cloud.opacity_logits[i], grads.d_opacity_logit[i], state.m_opacity[i],
                    state.v_opacity[i], cfg.lr_opacity, bias1, bias2);
    }
}

void DensifyStats::observe(const RenderOutput& out) {
    for (const SplatProjection& pr : out.projections) {
        std::size_t gid = static_cast<std::size_t>(pr.gaussian_id);
        if (gid < max_radius_px.size())
            max_radius_px[gid] = std::max(max_radius_px[gid], pr.radius);
    }
}

EditSummary densify_and_prune(GaussianCloud& cloud, GradientBuffer& buf, DensifyStats& stats,
                              AdamState& state, const TrainConfig& cfg, double scene_extent,
                              std::mt19937_64& rng, bool radius_prune_active) {
    const std::size_t n = cloud.size();
    const int bc = cloud.basis_count();
    EditSummary summary;

    std::vector<std::size_t> to_clone, to_split;
    for (std::size_t i = 0; i < n; ++i) {
        if (d_screen_norm(buf, i) < cfg.densify_grad_threshold) continue;
        Vec3 s = cloud.activated_scale(i);
        double smax = std::max({s.x, s.y, s.z});
        if (smax > cfg.scale_split_threshold * scene_extent)
            to_split.push_back(i);
        else
            to_clone.push_back(i);
    }

    std::vector<char> keep(n, 1);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Clones first, then split children; parents of splits are removed.
    std::size_t added = to_clone.size() + 2 * to_split.size();
    cloud.resize(n + added);
    std::size_t w = n;
    for (std::size_t src : to_clone) {
        cloud.positions[w] = cloud.positions[src];
        cloud.rotations[w] = cloud.rotations[src];
        cloud.log_scales[w] = cloud.log_scales[src];
        cloud.opacity_logits[w] = cloud.opacity_logits[src];
        for (int b = 0; b < bc; ++b) cloud.sh_coeffs[w * bc + b] = cloud.sh_coeffs[src * bc + b];
        ++w;
    }
    const double log_split = std::log(cfg.split_factor);
    for (std::size_t src : to_split) {
        keep[src] = 0;
        Mat3 rot = quat_to_rotation(normalized(cloud.rotations[src]));
        Vec3 s = cloud.activated_scale(src);
        for (int child = 0; child < 2; ++child) {
            Vec3 xi{normal(rng) * s.x, normal(rng) * s.y, normal(rng) * s.z};
            cloud.positions[w] = cloud.positions[src] + rot * xi;
            cloud.rotations[w] = cloud.rotations[src];
            cloud.log_scales[w] = cloud.log_scales[src] - Vec3{log_split, log_split, log_split};
            cloud.opacity_logits[w] = cloud.opacity_logits[src];
            for (int b = 0; b < bc; ++b)
                cloud.sh_coeffs[w * bc + b] = cloud.sh_coeffs[src * bc + b];
            ++w;
        }
    }
    summary.cloned = static_cast<long>(to_clone.size());
    summary.split = static_cast<long>(to_split.size());

    // Prune: split parents, low opacity, oversized world scale, oversized
    // screen footprint (only after the first opacity reset).
    keep.resize(cloud.size(), 1);
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (!keep[i]) continue;
        if (cloud.activated_opacity(i) < cfg.prune_opacity) {
            keep[i] = 0;
            continue;
        }
        Vec3 s = cloud.activated_scale(i);
        if (std::max({s.x, s.y, s.z}) > cfg.prune_scale_world * scene_extent) {
            keep[i] = 0;
            continue;
        }
        if (radius_prune_active && i < n && stats.max_radius_px[i] > cfg.prune_radius_px)
            keep[i] = 0;
    }
    long removed = 0;
    for (std::size_t i = 0; i < cloud.size(); ++i)
        if (!keep[i]) ++removed;
    summary.pruned = removed - summary.split;  // split parents are not "pruned"

    state.append_zeros(added, bc);
    state.filter(keep, bc);
    cloud.filter(keep);
    summary.final_count = cloud.size();

    buf.resize(cloud.size(), bc);  // gradients for removed/new entries are stale either way
    stats.resize(cloud.size());
    return summary;
}

void reset_opacity(GaussianCloud& cloud, double ceiling) {
    double cap = logit(ceiling);
    for (double& l : cloud.opacity_logits) l = std::min(l, cap);
}

double scene_extent(const TrainDataset& dataset, const std::vector<ColoredPoint>& points) {
    std::vector<Vec3> centers;
    centers.reserve(dataset.poses.size());
    for (const Pose& p : dataset.poses) centers.push_back(p.center());

    auto bounding_radius = [](const std::vector<Vec3>& pts) {
        if (pts.empty()) return 0.0;
        Vec3 mean{0, 0, 0};
        for (const Vec3& p : pts) mean += p;
        mean *= 1.0 / pts.size();
        double r = 0.0;
        for (const Vec3& p : pts) r = std::max(r, (p - mean).norm());
        return r;
    };

    double r = bounding_radius(centers) * 1.1;
    if (r > 1e-9) return r;
    std::vector<Vec3> pos;
    pos.reserve(points.size());
    for (const ColoredPoint& p : points) pos.push_back(p.position);
    r = bounding_radius(pos) * 1.1;
    return r > 1e-9 ? r : 1.0;
}

namespace {

// splitmix64; used to derive per-epoch and per-event RNG streams from the seed.
std::uint64_t mix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

}  // namespace

Trainer::Trainer(TrainDataset dataset, std::vector<ColoredPoint> init_points, TrainConfig cfg)
    : dataset_(std::move(dataset)), cfg_(std::move(cfg)) {
    cfg_.validate();
    if (dataset_.images.empty() || dataset_.train_indices.empty())
        throw Error(ErrorCode::ValidationError, "dataset has no training views");
    extent_ = scene_extent(dataset_, init_points);
    cloud_ = init_from_points(init_points, cfg_.sh_degree);
    state_.resize(cloud_.size(), cloud_.basis_count());
    buf_.resize(cloud_.size(), cloud_.basis_count());
    stats_.resize(cloud_.size());
}

void Trainer::resume(GaussianCloud cloud, AdamState state, long iteration) {
    cloud_ = std::move(cloud);
    state_ = std::move(state);
    iteration_ = iteration;
    buf_.resize(cloud_.size(), cloud_.basis_count());
    stats_.resize(cloud_.size());
    epoch_ = -1;
}

int Trainer::pick_view(long iteration) {
    const long n = static_cast<long>(dataset_.train_indices.size());
    long epoch = (iteration - 1) / n;
    if (epoch != epoch_) {
        epoch_ = epoch;
        epoch_order_ = dataset_.train_indices;
        std::mt19937_64 rng(mix64(cfg_.seed ^ mix64(static_cast<std::uint64_t>(epoch))));
        for (std::size_t i = epoch_order_.size(); i > 1; --i) {
            std::size_t j = rng() % i;
            std::swap(epoch_order_[i - 1], epoch_order_[j]);
        }
    }
    return epoch_order_[(iteration - 1) % n];
}

void Trainer::run(const IterationHook& hook) {
    RenderSettings settings;
    settings.background = cfg_.background;

    for (long j = iteration_ + 1; j <= cfg_.iterations; ++j) {
        iteration_ = j;
        int view = pick_view(j);

        if (j % cfg_.sh_warmup_interval == 0)
            cloud_.active_sh_degree = std::min(cloud_.active_sh_degree + 1, cloud_.sh_degree);

        RenderOutput out = render(cloud_, dataset_.poses[view], dataset_.cam, settings);
        LossResult lr = loss(out.color, dataset_.images[view], cfg_.lambda_ssim,
                             cfg_.mask_bottom_fraction);
        backward(out, lr.d_image, cloud_, dataset_.poses[view], dataset_.cam, buf_);
        stats_.observe(out);

        EditSummary edit;
        bool densified = false;
        if (j <= cfg_.densify_until) {
            if (j % cfg_.densify_interval == 0) {
                std::mt19937_64 rng(mix64(cfg_.seed ^ mix64(0x5eedULL + static_cast<std::uint64_t>(j))));
                edit = densify_and_prune(cloud_, buf_, stats_, state_, cfg_, extent_, rng,
                                         j > cfg_.opacity_reset_interval);
                densified = true;
            }
            if (j % cfg_.opacity_reset_interval == 0)
                reset_opacity(cloud_, cfg_.opacity_reset_ceiling);
        }

        // The densification edit rebuilds the parameter arrays, so this
        // iteration's gradients no longer apply.
        if (!densified) adam_step(cloud_, buf_, state_, cfg_, extent_, j);

        if (hook) {
            IterationInfo info;
            info.iteration = j;
            info.loss_value = lr.value;
            info.gaussian_count = cloud_.size();
            info.last_edit = edit;
            hook(info, cloud_);
        }
    }
}

GaussianCloud train(const TrainDataset& dataset, const std::vector<ColoredPoint>& init_points,
                    const TrainConfig& cfg, const IterationHook& hook) {
    Trainer trainer(dataset, init_points, cfg);
    trainer.run(hook);
    return trainer.take_cloud();
}

}  // namespace omnisplat
