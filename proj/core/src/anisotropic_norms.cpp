#include "aniso/anisotropic_norms.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "aniso/quadrature.hpp"
#include "aniso/random.hpp"

namespace aniso {

namespace {

void require_p(double p) {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("exponent p must be >= 1");
}

/// |a|^p with exact shortcuts for p = 1, 2.
double abs_pow(double a, double p) {
    if (p == 1.0) return std::abs(a);
    if (p == 2.0) return a * a;
    return std::pow(std::abs(a), p);
}

RVec normalized(const RVec& v) {
    const double n = norm(v);
    if (n == 0.0) throw std::invalid_argument("direction must be nonzero");
    return v * (1.0 / n);
}

/// Orthonormal basis of the tangent space of S^{N-1} at sigma.
std::vector<RVec> tangent_basis(const RVec& sigma) {
    const int n = sigma.size();
    std::vector<RVec> basis;
    for (int k = 0; k < n && static_cast<int>(basis.size()) < n - 1; ++k) {
        RVec t = unit(n, k) - sigma[k] * sigma;
        for (const RVec& b : basis) t -= dot(t, b) * b;
        const double len = norm(t);
        if (len > 1e-6) basis.push_back(t * (1.0 / len));
    }
    return basis;
}

}  // namespace

double mixed_modulus(const CVec& z, double p) {
    require_p(p);
    const double re = norm(real_part(z));
    const double im = norm(imag_part(z));
    if (p == 2.0) return std::hypot(re, im);
    if (re == 0.0) return im;
    if (im == 0.0) return re;
    // Factor out the larger part so that large p neither overflows nor underflows.
    const double big = std::max(re, im);
    const double small = std::min(re, im);
    return big * std::pow(1.0 + std::pow(small / big, p), 1.0 / p);
}

double mixed_modulus(complex z, double p) { return mixed_modulus(CVec{z}, p); }

double kpn_constant(double p, int dim) {
    require_p(p);
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("kpn_constant: dimension outside [1, kMaxDim]");
    if (dim == 1) return 2.0 / p;
    // int_{S^{N-1}} |x_1|^p = |S^{N-2}| * 2 int_0^{pi/2} sin^p(t) cos^{N-2}(t) dt, with
    // t = (pi/2) v^2 to smooth the endpoint behaviour of sin^p for fractional p.
    auto f = [&](double v) {
        const double t = 0.5 * kPi * v * v;
        return std::pow(std::sin(t), p) * std::pow(std::cos(t), dim - 2) * kPi * v;
    };
    constexpr int kPanels = 4;
    double s = 0.0;
    for (int k = 0; k < kPanels; ++k) s += integrate_gl(f, double(k) / kPanels, double(k + 1) / kPanels, 48);
    return sphere_area(dim - 1) * 2.0 * s / p;
}

double sphere_abs_moment(double p, const RVec& omega) {
    require_p(p);
    const RVec w = normalized(omega);
    const int dim = w.size();
    if (dim == 1) return 2.0 / p;
    if (dim == 2) {
        // Panels between the zeros of omega.sigma and the directions +-omega.
        const double a0 = std::atan2(w[1], w[0]);
        double s = 0.0;
        for (int k = 0; k < 4; ++k) {
            const double a = a0 + 0.5 * kPi * k;
            s += integrate_gl([&](double t) { return abs_pow(w[0] * std::cos(t) + w[1] * std::sin(t), p); }, a,
                              a + 0.5 * kPi, 64);
        }
        return s / p;
    }
    if (dim == 3) {
        // Fixed polar frame around e_3; for each azimuth the polar integral is
        // split where omega.x changes sign.
        constexpr int kPhi = 128;
        double s = 0.0;
        for (int k = 0; k < kPhi; ++k) {
            const double phi = 2.0 * kPi * (k + 0.5) / kPhi;
            const double a = w[0] * std::cos(phi) + w[1] * std::sin(phi);
            double kink = std::atan2(-w[2], a);
            if (kink < 0.0) kink += kPi;
            auto g = [&](double theta) {
                return abs_pow(a * std::sin(theta) + w[2] * std::cos(theta), p) * std::sin(theta);
            };
            double inner = 0.0;
            if (kink > 0.0) inner += integrate_gl(g, 0.0, kink, 64);
            if (kink < kPi) inner += integrate_gl(g, kink, kPi, 64);
            s += inner;
        }
        return s * 2.0 * kPi / kPhi / p;
    }
    throw std::invalid_argument("sphere_abs_moment: supported for N <= 3");
}

MomentNormEvaluator::MomentNormEvaluator(ConvexBody body, double p, MomentMethod method)
    : body_(std::move(body)), p_(p), method_(method) {
    require_p(p);
    const int dim = body_.dimension();
    normalizer_ = (dim + p_) / p_;
    resolution_ = 2048;
    if (const auto* mc = std::get_if<BodyMonteCarlo>(&method_)) {
        if (mc->samples == 0) throw std::invalid_argument("moment norm: Monte Carlo needs samples >= 1");
    } else {
        resolution_ = std::get<SphereQuadrature>(method_).resolution;
        if (resolution_ < 8) throw std::invalid_argument("moment norm: sphere resolution must be >= 8");
    }
    // N = 3 product rules count azimuthal nodes; 2048 would be wasteful there.
    const int fixed_res = dim == 3 ? std::min(resolution_, 128) : (dim >= 4 ? std::min(resolution_, 64) : resolution_);
    fixed_rule_ = SphereRule::for_body(body_, fixed_res);
    fixed_coef_.resize(fixed_rule_.size());
    for (std::size_t j = 0; j < fixed_rule_.size(); ++j) {
        const double g = body_.gauge(fixed_rule_.nodes()[j]);
        fixed_coef_[j] = fixed_rule_.weights()[j] / (p_ * std::pow(g, dim + p_));
    }
    if (dim == 2) {
        constexpr int kTable = 2048;
        angle_table_.resize(kTable);
        for (int k = 0; k < kTable; ++k) {
            const double a = kPi * k / kTable;
            const CVec e = to_complex(RVec{std::cos(a), std::sin(a)});
            angle_table_[k] = sphere_pow_with(e, SphereRule::for_body(body_, resolution_, perpendicular_angles(real_part(e))));
        }
    }
}

Estimate MomentNormEvaluator::evaluate(const CVec& v, std::uint64_t call_index) const {
    if (std::holds_alternative<BodyMonteCarlo>(method_)) return montecarlo(v, call_index);
    return sphere(v);
}

Estimate MomentNormEvaluator::montecarlo(const CVec& v, std::uint64_t call_index) const {
    require_same_dim(v.size(), body_.dimension(), "moment_norm");
    const auto* mc = std::get_if<BodyMonteCarlo>(&method_);
    if (mc == nullptr) throw std::logic_error("moment_norm: evaluator not configured for Monte Carlo");
    const auto pts = body_.sample_uniform(mc->samples, derive_seed(mc->seed, "moment_norm", call_index));
    const RVec re = real_part(v);
    const RVec im = imag_part(v);
    std::vector<double> f(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) f[i] = abs_pow(dot(re, pts[i]), p_) + abs_pow(dot(im, pts[i]), p_);
    const double n = static_cast<double>(f.size());
    const double mean = pairwise_sum(f) / n;
    double var = 0.0;
    if (f.size() > 1) {
        std::vector<double> sq(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) sq[i] = (f[i] - mean) * (f[i] - mean);
        var = pairwise_sum(sq) / (n - 1.0);
    }
    const double scale = normalizer_ * body_.volume();
    const double integral = scale * mean;
    const double se = scale * std::sqrt(var / n);
    if (integral <= 0.0) return {0.0, std::pow(se, 1.0 / p_)};
    const double value = std::pow(integral, 1.0 / p_);
    // Delta method for I -> I^{1/p}.
    return {value, value * se / (p_ * integral)};
}

double MomentNormEvaluator::sphere_pow_with(const CVec& v, const SphereRule& rule) const {
    require_same_dim(v.size(), rule.dimension(), "moment_norm_sphere");
    const int dim = body_.dimension();
    const RVec re = real_part(v);
    const RVec im = imag_part(v);
    double s = 0.0;
    const auto& nodes = rule.nodes();
    const auto& weights = rule.weights();
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const double num = abs_pow(dot(re, nodes[j]), p_) + abs_pow(dot(im, nodes[j]), p_);
        if (num == 0.0) continue;
        s += weights[j] * num / std::pow(body_.gauge(nodes[j]), dim + p_);
    }
    return s / p_;
}

SphereRule MomentNormEvaluator::adaptive_rule(const CVec& v) const {
    require_same_dim(v.size(), body_.dimension(), "moment_norm_sphere");
    const int dim = body_.dimension();
    const RVec re = real_part(v);
    const RVec im = imag_part(v);
    if (dim == 2) {
        std::vector<double> breaks = perpendicular_angles(re);
        const auto more = perpendicular_angles(im);
        breaks.insert(breaks.end(), more.begin(), more.end());
        return SphereRule::for_body(body_, resolution_, breaks);
    }
    if (dim == 3) {
        SphereRuleSpec spec;
        spec.dim = 3;
        spec.resolution = std::min(resolution_, 128);
        if (norm(re) > 0.0) {
            spec.pole = re;
        } else if (norm(im) > 0.0) {
            spec.pole = im;
        }
        return SphereRule::build(spec);
    }
    return fixed_rule_;
}

namespace {

// In 3-D a product rule can align its equator with one kink circle only, so
// Re v and Im v (which enter as separate terms) get a rule each.
bool split_parts(const CVec& v) {
    if (v.size() != 3) return false;
    const RVec re = real_part(v);
    const RVec im = imag_part(v);
    return norm(re) > 0.0 && norm(im) > 0.0;
}

}  // namespace

Estimate MomentNormEvaluator::sphere(const CVec& v) const {
    if (!split_parts(v)) return sphere(v, adaptive_rule(v));
    const CVec re = to_complex(real_part(v));
    const CVec im = to_complex(imag_part(v));
    const SphereRule rule_re = adaptive_rule(re);
    const SphereRule rule_im = adaptive_rule(im);
    const double fine = sphere_pow_with(re, rule_re) + sphere_pow_with(im, rule_im);
    const double coarse = sphere_pow_with(re, rule_re.coarsened()) + sphere_pow_with(im, rule_im.coarsened());
    const double value = std::pow(fine, 1.0 / p_);
    return {value, std::abs(value - std::pow(coarse, 1.0 / p_))};
}

double MomentNormEvaluator::sphere_pow(const CVec& v) const {
    if (!split_parts(v)) return sphere_pow_with(v, adaptive_rule(v));
    const CVec re = to_complex(real_part(v));
    const CVec im = to_complex(imag_part(v));
    return sphere_pow_with(re, adaptive_rule(re)) + sphere_pow_with(im, adaptive_rule(im));
}

Estimate MomentNormEvaluator::sphere(const CVec& v, const SphereRule& rule) const {
    require_same_dim(rule.dimension(), body_.dimension(), "moment_norm_sphere");
    const double fine = sphere_pow_with(v, rule);
    const double value = std::pow(fine, 1.0 / p_);
    if (rule.dimension() == 1) return {value, 0.0};
    const double coarse = std::pow(sphere_pow_with(v, rule.coarsened()), 1.0 / p_);
    return {value, std::abs(value - coarse)};
}

double MomentNormEvaluator::norm_pow(const CVec& v) const { return norm_pow(real_part(v)) + norm_pow(imag_part(v)); }

double MomentNormEvaluator::norm_pow(const RVec& v) const {
    const int dim = v.size();
    if (dim == 2) {
        const double r2 = v[0] * v[0] + v[1] * v[1];
        if (r2 == 0.0) return 0.0;
        double a = std::atan2(v[1], v[0]);
        if (a < 0.0) a += kPi;
        const auto m = static_cast<int>(angle_table_.size());
        const double t = a / kPi * m;
        const int i = std::min(static_cast<int>(t), m - 1);
        const double f = t - i;
        auto at = [&](int k) { return angle_table_[static_cast<std::size_t>(((k % m) + m) % m)]; };
        // Four-point Lagrange interpolation on the periodic table.
        const double y0 = at(i - 1), y1 = at(i), y2 = at(i + 1), y3 = at(i + 2);
        const double val = -f * (f - 1.0) * (f - 2.0) / 6.0 * y0 + (f + 1.0) * (f - 1.0) * (f - 2.0) / 2.0 * y1 -
                           (f + 1.0) * f * (f - 2.0) / 2.0 * y2 + (f + 1.0) * f * (f - 1.0) / 6.0 * y3;
        return (p_ == 2.0 ? r2 : std::pow(r2, 0.5 * p_)) * val;
    }
    const auto& nodes = fixed_rule_.nodes();
    double s = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) s += fixed_coef_[j] * abs_pow(dot(v, nodes[j]), p_);
    return s;
}

DualNormEvaluator::DualNormEvaluator(const ConvexBody& body, int resolution)
    : DualNormEvaluator(body, SphereRule::for_body(body, resolution > 0 ? resolution
                                                        : body.dimension() == 2 ? 2048
                                                        : body.dimension() == 3 ? 128
                                                                                : 64)) {}

DualNormEvaluator::DualNormEvaluator(const ConvexBody& body, const SphereRule& rule)
    : dim_(body.dimension()), nodes_(rule.nodes()) {
    require_same_dim(rule.dimension(), dim_, "dual_norm_z1");
    coef_.resize(nodes_.size());
    for (std::size_t j = 0; j < nodes_.size(); ++j)
        coef_[j] = rule.weights()[j] / std::pow(body.gauge(nodes_[j]), dim_ + 1);
    node_primal_.resize(nodes_.size());
    for (std::size_t j = 0; j < nodes_.size(); ++j) node_primal_[j] = primal(nodes_[j]);
}

double DualNormEvaluator::primal(const RVec& v) const {
    require_same_dim(v.size(), dim_, "dual_norm_z1");
    double s = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) s += coef_[j] * std::abs(dot(v, nodes_[j]));
    return s;
}

double DualNormEvaluator::ratio(const RVec& sigma, const RVec& w) const { return dot(sigma, w) / primal(sigma); }

double DualNormEvaluator::dual(const RVec& w) const {
    require_same_dim(w.size(), dim_, "dual_norm_z1");
    if (norm(w) == 0.0) return 0.0;
    if (dim_ == 1) return std::abs(w[0]) / primal(RVec{1.0});

    // Seeds: the best few rule nodes.
    std::vector<std::size_t> order(nodes_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> seed_val(nodes_.size());
    for (std::size_t j = 0; j < nodes_.size(); ++j) seed_val[j] = dot(nodes_[j], w) / node_primal_[j];
    constexpr std::size_t kStarts = 3;
    const std::size_t starts = std::min(kStarts, order.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(starts), order.end(),
                      [&](std::size_t a, std::size_t b) { return seed_val[a] > seed_val[b]; });

    const double spacing = dim_ == 2 ? 2.0 * kPi / static_cast<double>(nodes_.size())
                                     : std::sqrt(sphere_area(dim_) / static_cast<double>(nodes_.size()));
    double best = 0.0;
    for (std::size_t s = 0; s < starts; ++s) {
        RVec sigma = nodes_[order[s]];
        double val = seed_val[order[s]];
        double step = 2.0 * spacing;
        while (step > 1e-11) {
            bool improved = false;
            for (const RVec& t : tangent_basis(sigma)) {
                for (double sign : {1.0, -1.0}) {
                    RVec cand = sigma + (sign * step) * t;
                    cand *= 1.0 / norm(cand);
                    const double cv = ratio(cand, w);
                    if (cv > val) {
                        val = cv;
                        sigma = cand;
                        improved = true;
                    }
                }
            }
            if (!improved) step *= 0.5;
        }
        best = std::max(best, val);
    }
    return best;
}

double dual_norm_z1(const ConvexBody& body, const RVec& w, const SphereRule& rule) {
    return DualNormEvaluator(body, rule).dual(w);
}

double dual_norm_z1(const ConvexBody& body, const CVec& w, const SphereRule& rule) {
    for (const complex& c : w)
        if (c.imag() != 0.0) throw std::invalid_argument("dual_norm_z1: defined for real vectors only");
    return dual_norm_z1(body, real_part(w), rule);
}

}  // namespace aniso
