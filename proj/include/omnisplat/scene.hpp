#pragma once

// 3D Gaussian cloud: positions, SH color coefficients, rotations, scales and
// opacities, stored as parallel arrays. Scales are kept as logs and opacities
// as logits so the optimizer works on unconstrained parameters.

#include <cstddef>
#include <vector>

#include "omnisplat/error.hpp"
#include "omnisplat/vecmath.hpp"

namespace omnisplat {

// Symmetric 3x3 matrix, upper-triangular storage.
struct SymMat3 {
    double xx = 0, xy = 0, xz = 0, yy = 0, yz = 0, zz = 0;

    Mat3 to_mat3() const {
        Mat3 m;
        m(0, 0) = xx; m(0, 1) = xy; m(0, 2) = xz;
        m(1, 0) = xy; m(1, 1) = yy; m(1, 2) = yz;
        m(2, 0) = xz; m(2, 1) = yz; m(2, 2) = zz;
        return m;
    }
    static SymMat3 from_mat3(const Mat3& m) {
        return {m(0, 0), m(0, 1), m(0, 2), m(1, 1), m(1, 2), m(2, 2)};
    }
};

struct GaussianCloud {
    int sh_degree = 3;         // maximum degree stored, 0..3
    int active_sh_degree = 0;  // degree used when rendering

    std::vector<Vec3> positions;
    std::vector<Vec3> sh_coeffs;  // per Gaussian: basis_count() consecutive RGB triples
    std::vector<Vec4> rotations;  // raw quaternions (w, x, y, z), normalized on use
    std::vector<Vec3> log_scales;
    std::vector<double> opacity_logits;

    std::size_t size() const { return positions.size(); }
    int basis_count() const { return (sh_degree + 1) * (sh_degree + 1); }

    Vec3 activated_scale(std::size_t i) const {
        const Vec3& l = log_scales[i];
        return {std::exp(l.x), std::exp(l.y), std::exp(l.z)};
    }
    double activated_opacity(std::size_t i) const {
        return 1.0 / (1.0 + std::exp(-opacity_logits[i]));
    }

    void resize(std::size_t n);
    // Keeps entries with keep[i] == true; order preserved.
    void filter(const std::vector<char>& keep);
};

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

inline constexpr double kShC0 = 0.28209479177387814;
inline constexpr int kMaxShBasis = 16;

// Real SH basis values for a unit direction, degrees 0..3. Writes
// (degree+1)^2 entries.
void sh_basis(const Vec3& dir, int degree, double* basis);

// Basis values plus their gradients with respect to the (unit, treated as
// unconstrained) direction components.
void sh_basis_grad(const Vec3& dir, int degree, double* basis, Vec3* dbasis);

// Sigma = R diag(S) diag(S) R^T. q is normalized internally.
SymMat3 build_covariance3d(const Vec4& q, const Vec3& scales);

// SH-evaluated RGB: sum(coeffs * basis) + 0.5, clamped to >= 0.
// coeffs points at basis_count consecutive RGB triples.
Vec3 eval_sh(const Vec3* coeffs, const Vec3& view_dir, int degree);

struct ColoredPoint {
    Vec3 position;
    Vec3 rgb;  // [0, 1]
};

// One Gaussian per input point: DC coefficient from the color, identity
// rotation, isotropic scale from the mean squared distance to the 3 nearest
// neighbors, opacity 0.1. Throws EmptyPointCloud.
GaussianCloud init_from_points(const std::vector<ColoredPoint>& points, int sh_degree = 3);

}  // namespace omnisplat
