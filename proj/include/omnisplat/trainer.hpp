#pragma once

// Photometric optimization: the (1 - lambda) L1 + lambda DSSIM loss with its
// per-pixel gradient, Adam updates per parameter group, the gradient-driven
// densification controller, and the full reconstruction loop.

#include <functional>
#include <random>
#include <string>
#include <vector>

#include "omnisplat/gradients.hpp"
#include "omnisplat/image.hpp"
#include "omnisplat/rasterizer.hpp"
#include "omnisplat/scene.hpp"

namespace omnisplat {

struct TrainConfig {
    double lambda_ssim = 0.2;
    long iterations = 7000;
    long densify_until = 15000;
    long densify_interval = 100;
    long opacity_reset_interval = 3000;
    double densify_grad_threshold = 2e-4;  // uniform screen units
    double scale_split_threshold = 0.01;   // fraction of scene extent
    double split_factor = 1.6;
    double prune_opacity = 0.005;
    double prune_scale_world = 0.1;   // fraction of scene extent
    double prune_radius_px = 20.0;    // active only after the first opacity reset
    double opacity_reset_ceiling = 0.01;

    double lr_position_init = 1.6e-4;   // scaled by scene extent
    double lr_position_final = 1.6e-6;  // scaled by scene extent
    double lr_sh_dc = 2.5e-3;
    double lr_sh_rest = 2.5e-3 / 20.0;
    double lr_opacity = 5e-2;
    double lr_scale = 5e-3;
    double lr_rotation = 1e-3;

    double mask_bottom_fraction = 0.0;  // [0, 1)
    int sh_degree = 3;
    long sh_warmup_interval = 1000;
    unsigned long long seed = 0;

    long checkpoint_interval = 0;  // 0: only the final checkpoint
    long log_interval = 100;
    Vec3 background{0, 0, 0};

    void validate() const;  // throws ValidationError
};

struct LossResult {
    double value = 0.0;
    Image d_image;
};

// Masked rows (the bottom floor(fraction * H)) are excluded from both terms
// and carry zero gradient. Throws DimensionMismatch.
LossResult loss(const Image& rendered, const Image& gt, double lambda_ssim,
                double mask_bottom_fraction);

// Adam moments per parameter group; steps are counted per group.
struct AdamState {
    std::vector<double> m_position, v_position;      // 3 per Gaussian
    std::vector<double> m_sh, v_sh;                  // 3 * basis_count per Gaussian
    std::vector<double> m_rotation, v_rotation;      // 4 per Gaussian
    std::vector<double> m_scale, v_scale;            // 3 per Gaussian
    std::vector<double> m_opacity, v_opacity;        // 1 per Gaussian
    long step = 0;

    void resize(std::size_t n, int basis_count);
    void filter(const std::vector<char>& keep, int basis_count);
    void append_zeros(std::size_t added, int basis_count);
};

// One Adam step (beta1 0.9, beta2 0.999, eps 1e-15) over every parameter
// group; the position learning rate decays exponentially from lr_position_init
// to lr_position_final (both scaled by scene_extent) over cfg.iterations.
void adam_step(GaussianCloud& cloud, const GradientBuffer& grads, AdamState& state,
               const TrainConfig& cfg, double scene_extent, long iteration);

// Per-Gaussian max observed screen radius; the screen-gradient averages live
// in the GradientBuffer.
struct DensifyStats {
    std::vector<double> max_radius_px;

    void resize(std::size_t n) { max_radius_px.assign(n, 0.0); }
    void reset() { std::fill(max_radius_px.begin(), max_radius_px.end(), 0.0); }
    void observe(const RenderOutput& out);
};

struct EditSummary {
    long cloned = 0;
    long split = 0;    // parents split (each removed, two children added)
    long pruned = 0;
    std::size_t final_count = 0;
};

// Clone/split by mean screen gradient, then prune by opacity, world scale and
// (when radius_prune_active) observed screen radius. The gradient buffer and
// Adam state are remapped to the edited cloud; screen stats are reset.
EditSummary densify_and_prune(GaussianCloud& cloud, GradientBuffer& buf, DensifyStats& stats,
                              AdamState& state, const TrainConfig& cfg, double scene_extent,
                              std::mt19937_64& rng, bool radius_prune_active);

// Caps every activated opacity at ceiling through the logit storage.
void reset_opacity(GaussianCloud& cloud, double ceiling = 0.01);

struct TrainDataset {
    EquirectCamera cam;
    std::vector<Pose> poses;
    std::vector<Image> images;
    std::vector<int> train_indices;
    std::vector<int> test_indices;
};

// Bounding-sphere radius of the camera centers x 1.1; falls back to the point
// extent (then 1.0) for degenerate camera sets.
double scene_extent(const TrainDataset& dataset, const std::vector<ColoredPoint>& points);

struct IterationInfo {
    long iteration = 0;
    double loss_value = 0.0;
    std::size_t gaussian_count = 0;
    EditSummary last_edit;
};
using IterationHook = std::function<void(const IterationInfo&, const GaussianCloud&)>;

class Trainer {
public:
    Trainer(TrainDataset dataset, std::vector<ColoredPoint> init_points, TrainConfig cfg);

    // Resume from a checkpointed cloud and optimizer state.
    void resume(GaussianCloud cloud, AdamState state, long iteration);

    // Runs iterations current+1 .. cfg.iterations.
    void run(const IterationHook& hook = {});

    const GaussianCloud& cloud() const { return cloud_; }
    GaussianCloud take_cloud() { return std::move(cloud_); }
    const AdamState& state() const { return state_; }
    long iteration() const { return iteration_; }
    double extent() const { return extent_; }
    const TrainDataset& dataset() const { return dataset_; }

private:
    int pick_view(long iteration);

    TrainDataset dataset_;
    TrainConfig cfg_;
    GaussianCloud cloud_;
    AdamState state_;
    GradientBuffer buf_;
    DensifyStats stats_;
    double extent_ = 1.0;
    long iteration_ = 0;
    std::vector<int> epoch_order_;
    long epoch_ = -1;
};

// Alg-1 convenience wrapper: init from points, run all iterations, return the
// final cloud.
GaussianCloud train(const TrainDataset& dataset, const std::vector<ColoredPoint>& init_points,
                    const TrainConfig& cfg, const IterationHook& hook = {});

}  // namespace omnisplat
