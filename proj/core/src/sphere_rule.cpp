#include "aniso/sphere_rule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "aniso/quadrature.hpp"
#include "aniso/random.hpp"

namespace aniso {

namespace {

constexpr int kMinPanelNodes = 8;

std::vector<double> normalized_breaks(std::vector<double> angles) {
    for (double& a : angles) {
        a = std::fmod(a, 2.0 * kPi);
        if (a < 0.0) a += 2.0 * kPi;
    }
    std::sort(angles.begin(), angles.end());
    std::vector<double> out;
    for (double a : angles)
        if (out.empty() || a - out.back() > 1e-9) out.push_back(a);
    if (out.size() > 1 && out.front() + 2.0 * kPi - out.back() <= 1e-9) out.pop_back();
    return out;
}

/// Orthonormal frame whose last vector is the normalized pole.
void frame_from_pole(const RVec& pole, RVec& t1, RVec& t2, RVec& z) {
    z = pole * (1.0 / norm(pole));
    RVec seed = std::abs(z[0]) < 0.9 ? unit(3, 0) : unit(3, 1);
    t1 = seed - dot(seed, z) * z;
    t1 *= 1.0 / norm(t1);
    t2 = RVec{z[1] * t1[2] - z[2] * t1[1], z[2] * t1[0] - z[0] * t1[2], z[0] * t1[1] - z[1] * t1[0]};
}

}  // namespace

std::vector<double> perpendicular_angles(const RVec& v) {
    if (v.size() != 2 || (v[0] == 0.0 && v[1] == 0.0)) return {};
    const double a = std::atan2(v[1], v[0]);
    return {a + 0.5 * kPi, a - 0.5 * kPi};
}

SphereRule SphereRule::build(const SphereRuleSpec& spec) {
    if (spec.dim < 1 || spec.dim > kMaxDim) throw std::invalid_argument("SphereRule: dimension outside [1, kMaxDim]");
    if (spec.resolution < 2) throw std::invalid_argument("SphereRule: resolution must be >= 2");
    SphereRule rule;
    rule.spec_ = spec;
    if (spec.dim == 1) {
        rule.nodes_ = {RVec{1.0}, RVec{-1.0}};
        rule.weights_ = {1.0, 1.0};
        return rule;
    }
    if (spec.dim == 2) {
        const auto breaks = normalized_breaks(spec.break_angles);
        rule.spec_.break_angles = breaks;
        if (breaks.empty()) {
            const int m = spec.resolution;
            for (int k = 0; k < m; ++k) {
                const double a = 2.0 * kPi * k / m;
                rule.nodes_.push_back(RVec{std::cos(a), std::sin(a)});
                rule.weights_.push_back(2.0 * kPi / m);
            }
            return rule;
        }
        for (std::size_t k = 0; k < breaks.size(); ++k) {
            const double a = breaks[k];
            const double b = k + 1 < breaks.size() ? breaks[k + 1] : breaks.front() + 2.0 * kPi;
            const int n = std::max(kMinPanelNodes,
                                   static_cast<int>(std::lround(spec.resolution * (b - a) / (2.0 * kPi))));
            const GaussLegendre& gl = gauss_legendre(n);
            for (int i = 0; i < n; ++i) {
                const double t = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
                rule.nodes_.push_back(RVec{std::cos(t), std::sin(t)});
                rule.weights_.push_back(0.5 * (b - a) * gl.weights[i]);
            }
        }
        return rule;
    }
    if (spec.dim == 3) {
        const int n_phi = spec.resolution;
        const int n_half = std::max(2, spec.resolution / 4);
        RVec t1, t2, z;
        frame_from_pole(spec.pole.value_or(unit(3, 2)), t1, t2, z);
        const GaussLegendre& gl = gauss_legendre(n_half);
        for (int half = 0; half < 2; ++half) {
            const double a = half == 0 ? 0.0 : 0.5 * kPi;
            const double b = a + 0.5 * kPi;
            for (int i = 0; i < n_half; ++i) {
                const double theta = 0.5 * (a + b) + 0.5 * (b - a) * gl.nodes[i];
                const double wt = 0.5 * (b - a) * gl.weights[i] * std::sin(theta);
                for (int k = 0; k < n_phi; ++k) {
                    const double phi = 2.0 * kPi * (k + 0.5) / n_phi;
                    RVec x = std::sin(theta) * std::cos(phi) * t1 + std::sin(theta) * std::sin(phi) * t2 +
                             std::cos(theta) * z;
                    rule.nodes_.push_back(x);
                    rule.weights_.push_back(wt * 2.0 * kPi / n_phi);
                }
            }
        }
        return rule;
    }
    const int count = std::max(16, spec.resolution * spec.resolution / 2);
    Rng rng = make_rng(spec.seed, "sphere_rule");
    const double w = sphere_area(spec.dim) / count;
    for (int k = 0; k < count; ++k) {
        RVec x(spec.dim);
        double len = 0.0;
        while (len == 0.0) {
            for (int d = 0; d < spec.dim; ++d) x[d] = standard_normal(rng);
            len = norm(x);
        }
        rule.nodes_.push_back(x * (1.0 / len));
        rule.weights_.push_back(w);
    }
    return rule;
}

SphereRule SphereRule::for_body(const ConvexBody& body, int resolution, std::vector<double> extra_breaks) {
    SphereRuleSpec spec;
    spec.dim = body.dimension();
    spec.resolution = resolution;
    if (spec.dim == 2) {
        spec.break_angles = body.kink_angles();
        spec.break_angles.insert(spec.break_angles.end(), extra_breaks.begin(), extra_breaks.end());
    }
    return build(spec);
}

double SphereRule::total_weight() const {
    double s = 0.0;
    for (double w : weights_) s += w;
    return s;
}

SphereRule SphereRule::coarsened() const {
    SphereRuleSpec spec = spec_;
    spec.resolution = std::max(2, spec_.resolution / 2);
    spec.seed = spec_.seed + 1;
    return build(spec);
}

}  // namespace aniso
