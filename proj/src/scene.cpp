#include "omnisplat/scene.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "omnisplat/parallel.hpp"

namespace omnisplat {

void GaussianCloud::resize(std::size_t n) {
    positions.resize(n);
    sh_coeffs.resize(n * basis_count());
    rotations.resize(n, Vec4{1, 0, 0, 0});
    log_scales.resize(n);
    opacity_logits.resize(n);
}

void GaussianCloud::filter(const std::vector<char>& keep) {
    const int bc = basis_count();
    std::size_t out = 0;
    for (std::size_t i = 0; i < size(); ++i) {
        if (!keep[i]) continue;
        positions[out] = positions[i];
        rotations[out] = rotations[i];
        log_scales[out] = log_scales[i];
        opacity_logits[out] = opacity_logits[i];
        for (int b = 0; b < bc; ++b) sh_coeffs[out * bc + b] = sh_coeffs[i * bc + b];
        ++out;
    }
    resize(out);
}

namespace {

constexpr double kShC1 = 0.4886025119029199;
constexpr double kShC2[5] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                             -1.0925484305920792, 0.5462742152960396};
constexpr double kShC3[7] = {-0.5900435899266435, 2.890611442640554,  -0.4570457994644658,
                             0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                             -0.5900435899266435};

}  // namespace

void sh_basis(const Vec3& d, int degree, double* b) {
    b[0] = kShC0;
    if (degree < 1) return;
    double x = d.x, y = d.y, z = d.z;
    b[1] = -kShC1 * y;
    b[2] = kShC1 * z;
    b[3] = -kShC1 * x;
    if (degree < 2) return;
    double xx = x * x, yy = y * y, zz = z * z;
    b[4] = kShC2[0] * x * y;
    b[5] = kShC2[1] * y * z;
    b[6] = kShC2[2] * (2.0 * zz - xx - yy);
    b[7] = kShC2[3] * x * z;
    b[8] = kShC2[4] * (xx - yy);
    if (degree < 3) return;
    b[9] = kShC3[0] * y * (3.0 * xx - yy);
    b[10] = kShC3[1] * x * y * z;
    b[11] = kShC3[2] * y * (4.0 * zz - xx - yy);
    b[12] = kShC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    b[13] = kShC3[4] * x * (4.0 * zz - xx - yy);
    b[14] = kShC3[5] * z * (xx - yy);
    b[15] = kShC3[6] * x * (xx - 3.0 * yy);
}

void sh_basis_grad(const Vec3& d, int degree, double* b, Vec3* g) {
    sh_basis(d, degree, b);
    g[0] = {0, 0, 0};
    if (degree < 1) return;
    double x = d.x, y = d.y, z = d.z;
    g[1] = {0, -kShC1, 0};
    g[2] = {0, 0, kShC1};
    g[3] = {-kShC1, 0, 0};
    if (degree < 2) return;
    double xx = x * x, yy = y * y, zz = z * z;
    g[4] = {kShC2[0] * y, kShC2[0] * x, 0};
    g[5] = {0, kShC2[1] * z, kShC2[1] * y};
    g[6] = {-2.0 * kShC2[2] * x, -2.0 * kShC2[2] * y, 4.0 * kShC2[2] * z};
    g[7] = {kShC2[3] * z, 0, kShC2[3] * x};
    g[8] = {2.0 * kShC2[4] * x, -2.0 * kShC2[4] * y, 0};
    if (degree < 3) return;
    g[9] = {kShC3[0] * 6.0 * x * y, kShC3[0] * (3.0 * xx - 3.0 * yy), 0};
    g[10] = {kShC3[1] * y * z, kShC3[1] * x * z, kShC3[1] * x * y};
    g[11] = {-2.0 * kShC3[2] * x * y, kShC3[2] * (4.0 * zz - xx - 3.0 * yy), 8.0 * kShC3[2] * y * z};
    g[12] = {-6.0 * kShC3[3] * x * z, -6.0 * kShC3[3] * y * z, kShC3[3] * (6.0 * zz - 3.0 * xx - 3.0 * yy)};
    g[13] = {kShC3[4] * (4.0 * zz - 3.0 * xx - yy), -2.0 * kShC3[4] * x * y, 8.0 * kShC3[4] * x * z};
    g[14] = {2.0 * kShC3[5] * x * z, -2.0 * kShC3[5] * y * z, kShC3[5] * (xx - yy)};
    g[15] = {kShC3[6] * (3.0 * xx - 3.0 * yy), -6.0 * kShC3[6] * x * y, 0};
}

SymMat3 build_covariance3d(const Vec4& q, const Vec3& scales) {
    Mat3 r = quat_to_rotation(normalized(q));
    Mat3 sigma = Mat3::zero();
    double s2[3] = {scales.x * scales.x, scales.y * scales.y, scales.z * scales.z};
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
            for (int k = 0; k < 3; ++k) sigma(i, j) += r(i, k) * s2[k] * r(j, k);
    return SymMat3::from_mat3(sigma);
}

Vec3 eval_sh(const Vec3* coeffs, const Vec3& view_dir, int degree) {
    double b[kMaxShBasis];
    sh_basis(view_dir, degree, b);
    int n = (degree + 1) * (degree + 1);
    Vec3 c{0, 0, 0};
    for (int i = 0; i < n; ++i) c += coeffs[i] * b[i];
    c += Vec3{0.5, 0.5, 0.5};
    return {std::max(0.0, c.x), std::max(0.0, c.y), std::max(0.0, c.z)};
}

namespace {

// Minimal k-d tree for the 3-nearest-neighbor scale initialization.
class KdTree {
public:
    explicit KdTree(const std::vector<ColoredPoint>& pts) : pts_(pts) {
        index_.resize(pts.size());
        std::iota(index_.begin(), index_.end(), 0u);
        build(0, index_.size(), 0);
    }

    // Mean squared distance from pts[self] to its k nearest other points.
    double mean_knn_sq(std::size_t self, int k, std::vector<double>& best) const {
        best.clear();
        query(0, index_.size(), 0, self, k, best);
        if (best.empty()) return 0.0;
        double sum = 0.0;
        for (double d : best) sum += d;
        return sum / best.size();
    }

private:
    void build(std::size_t lo, std::size_t hi, int axis) {
        if (hi - lo <= 1) return;
        std::size_t mid = (lo + hi) / 2;
        std::nth_element(index_.begin() + lo, index_.begin() + mid, index_.begin() + hi,
                         [&](unsigned a, unsigned b) {
                             return pts_[a].position[axis] < pts_[b].position[axis];
                         });
        build(lo, mid, (axis + 1) % 3);
        build(mid + 1, hi, (axis + 1) % 3);
    }

    void query(std::size_t lo, std::size_t hi, int axis, std::size_t self, int k,
               std::vector<double>& best) const {
        if (lo >= hi) return;
        std::size_t mid = (lo + hi) / 2;
        unsigned idx = index_[mid];
        const Vec3& q = pts_[self].position;
        if (idx != self) {
            double d2 = (pts_[idx].position - q).squared_norm();
            if (static_cast<int>(best.size()) < k) {
                best.push_back(d2);
                std::push_heap(best.begin(), best.end());
            } else if (d2 < best.front()) {
                std::pop_heap(best.begin(), best.end());
                best.back() = d2;
                std::push_heap(best.begin(), best.end());
            }
        }
        double delta = q[axis] - pts_[idx].position[axis];
        std::size_t near_lo = delta < 0 ? lo : mid + 1;
        std::size_t near_hi = delta < 0 ? mid : hi;
        std::size_t far_lo = delta < 0 ? mid + 1 : lo;
        std::size_t far_hi = delta < 0 ? hi : mid;
        int next = (axis + 1) % 3;
        query(near_lo, near_hi, next, self, k, best);
        if (static_cast<int>(best.size()) < k || delta * delta < best.front())
            query(far_lo, far_hi, next, self, k, best);
    }

    const std::vector<ColoredPoint>& pts_;
    std::vector<unsigned> index_;
};

}  // namespace

GaussianCloud init_from_points(const std::vector<ColoredPoint>& points, int sh_degree) {
    if (points.empty()) throw Error(ErrorCode::EmptyPointCloud, "no points to initialize from");

    GaussianCloud cloud;
    cloud.sh_degree = sh_degree;
    cloud.active_sh_degree = 0;
    cloud.resize(points.size());

    const int bc = cloud.basis_count();
    const double opacity = logit(0.1);

    std::vector<double> mean_sq(points.size(), 0.0);
    if (points.size() > 1) {
        KdTree tree(points);
        parallel_for(points.size(), [&](std::size_t lo, std::size_t hi) {
            std::vector<double> scratch;
            for (std::size_t i = lo; i < hi; ++i) mean_sq[i] = tree.mean_knn_sq(i, 3, scratch);
        });
    }

    for (std::size_t i = 0; i < points.size(); ++i) {
        cloud.positions[i] = points[i].position;
        cloud.rotations[i] = {1, 0, 0, 0};
        double s = std::sqrt(std::max(mean_sq[i], 1e-7));
        double ls = std::log(s);
        cloud.log_scales[i] = {ls, ls, ls};
        cloud.opacity_logits[i] = opacity;
        Vec3 dc = (points[i].rgb - Vec3{0.5, 0.5, 0.5}) * (1.0 / kShC0);
        cloud.sh_coeffs[i * bc] = dc;
        for (int b = 1; b < bc; ++b) cloud.sh_coeffs[i * bc + b] = {0, 0, 0};
    }
    return cloud;
}

}  // namespace omnisplat
