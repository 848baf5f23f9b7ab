#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "aniso/vec.hpp"

namespace aniso {

inline constexpr double kPi = 3.14159265358979323846;

/// Gauss-Legendre rule on [-1, 1].
struct GaussLegendre {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Cached n-point rule (Newton iteration on P_n), thread-safe.
const GaussLegendre& gauss_legendre(int n);

/// Integrates f over [a, b] with the n-point rule.
template <class F>
double integrate_gl(F&& f, double a, double b, int n) {
    const GaussLegendre& rule = gauss_legendre(n);
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double s = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) s += rule.weights[i] * f(mid + half * rule.nodes[i]);
    return s * half;
}

/// Surface measure of S^{N-1}; |S^0| = 2 (counting measure on {-1, +1}).
double sphere_area(int dim);

/// Volume of the Euclidean unit ball in R^N.
double unit_ball_volume(int dim);

/// Midpoint tensor grid over the cube center + [-half_width, half_width]^N,
/// optionally keeping only nodes inside the ball of radius half_width.
struct TensorGrid {
    int dim = 0;
    int nodes_per_axis = 0;
    double half_width = 0.0;
    bool ball_only = false;
    /// Empty means the origin.
    RVec center;

    [[nodiscard]] double cell_volume() const;
    [[nodiscard]] std::vector<RVec> nodes() const;
    [[nodiscard]] TensorGrid coarsened() const;
};

/// Sum in a fixed pairwise tree order over the index, so the rounding pattern
/// does not depend on how the terms were produced.
double pairwise_sum(std::span<const double> values);

/// Smooth C-infinity step: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t);

}  // namespace aniso
