#include "aniso/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace aniso {

namespace {

GaussLegendre build_gauss_legendre(int n) {
    GaussLegendre rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0;
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0;
        double p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        rule.nodes[i] = -x;
        rule.nodes[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.weights[i] = w;
        rule.weights[n - 1 - i] = w;
    }
    if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
    return rule;
}

}  // namespace

const GaussLegendre& gauss_legendre(int n) {
    if (n < 1) throw std::invalid_argument("gauss_legendre: n must be >= 1");
    static std::mutex mutex;
    static std::map<int, std::unique_ptr<GaussLegendre>> cache;
    std::lock_guard lock(mutex);
    auto it = cache.find(n);
    if (it == cache.end()) {
        auto rule = std::make_unique<GaussLegendre>(n == 1 ? GaussLegendre{{0.0}, {2.0}} : build_gauss_legendre(n));
        it = cache.emplace(n, std::move(rule)).first;
    }
    return *it->second;
}

double sphere_area(int dim) {
    if (dim < 1) throw std::invalid_argument("sphere_area: dimension must be >= 1");
    return 2.0 * std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

double unit_ball_volume(int dim) { return std::pow(kPi, 0.5 * dim) / std::tgamma(0.5 * dim + 1.0); }

double TensorGrid::cell_volume() const {
    const double h = 2.0 * half_width / nodes_per_axis;
    return std::pow(h, dim);
}

std::vector<RVec> TensorGrid::nodes() const {
    if (dim < 1 || dim > kMaxDim || nodes_per_axis < 1 || !(half_width > 0.0)) {
        throw std::invalid_argument("TensorGrid: invalid configuration");
    }
    const double h = 2.0 * half_width / nodes_per_axis;
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(nodes_per_axis);
    std::vector<RVec> out;
    out.reserve(total);
    const double r2 = half_width * half_width;
    for (std::size_t flat = 0; flat < total; ++flat) {
        RVec x(dim);
        std::size_t rest = flat;
        for (int d = 0; d < dim; ++d) {
            const auto i = static_cast<int>(rest % nodes_per_axis);
            rest /= nodes_per_axis;
            x[d] = -half_width + (i + 0.5) * h;
        }
        if (ball_only && dot(x, x) >= r2) continue;
        out.push_back(center.size() == dim ? x + center : x);
    }
    return out;
}

TensorGrid TensorGrid::coarsened() const {
    TensorGrid g = *this;
    g.nodes_per_axis = std::max(1, nodes_per_axis / 2);
    return g;
}

double pairwise_sum(std::span<const double> values) {
    if (values.empty()) return 0.0;
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / t);
    const double b = std::exp(-1.0 / (1.0 - t));
    return a / (a + b);
}

}  // namespace aniso
