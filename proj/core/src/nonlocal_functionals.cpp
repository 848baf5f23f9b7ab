#include "aniso/nonlocal_functionals.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "aniso/anisotropic_norms.hpp"
#include "aniso/parallel.hpp"
#include "aniso/quadrature.hpp"
#include "aniso/random.hpp"
#include "aniso/sphere_rule.hpp"

namespace aniso {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

}  // namespace

const char* to_string(FunctionalKind kind) {
    switch (kind) {
        case FunctionalKind::gagliardo:
            return "gagliardo";
        case FunctionalKind::nguyen:
            return "nguyen";
        case FunctionalKind::bbm:
            return "bbm";
    }
    return "?";
}

const char* to_string(MollifierKind kind) {
    return kind == MollifierKind::ludwig ? "ludwig" : "shrinking_uniform";
}

MollifierFamily::MollifierFamily(MollifierKind kind, double p, int dim) : kind_(kind), p_(p), dim_(dim) {
    if (!(p >= 1.0)) throw std::invalid_argument("mollifier family: p must be >= 1");
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("mollifier family: dimension outside [1, kMaxDim]");
}

MollifierFamily MollifierFamily::ludwig(double p, int dim) { return {MollifierKind::ludwig, p, dim}; }

MollifierFamily MollifierFamily::shrinking_uniform(double p, int dim) {
    return {MollifierKind::shrinking_uniform, p, dim};
}

void MollifierFamily::check_index(int n) const {
    const int lowest = kind_ == MollifierKind::ludwig ? 2 : 1;
    if (n < lowest) {
        throw std::invalid_argument(std::string("mollifier index n must be >= ") + std::to_string(lowest) + " for " +
                                    to_string(kind_));
    }
}

double MollifierFamily::s_of(int n) const {
    check_index(n);
    if (kind_ != MollifierKind::ludwig) throw std::logic_error("s_of: only the ludwig family has an s sequence");
    return 1.0 - 1.0 / n;
}

double MollifierFamily::rho(int n, double r) const {
    check_index(n);
    if (r < 0.0) return 0.0;
    if (kind_ == MollifierKind::ludwig) {
        const double s = s_of(n);
        return p_ * (1.0 - s) * std::pow(r, p_ - dim_ - p_ * s);
    }
    return r <= 1.0 / n ? dim_ * std::pow(double(n), dim_) : 0.0;
}

double MollifierFamily::mass(int n, double r) const {
    check_index(n);
    if (r <= 0.0) return 0.0;
    if (kind_ == MollifierKind::ludwig) return std::pow(r, p_ * (1.0 - s_of(n)));
    return std::pow(n * std::min(r, 1.0 / n), dim_);
}

double MollifierFamily::tail_integral(int n, double a, double b) const {
    check_index(n);
    if (!(b > a)) return 0.0;
    if (kind_ == MollifierKind::ludwig) {
        const double s = s_of(n);
        if (a <= 0.0) return kInf;
        const double upper = std::isinf(b) ? 0.0 : std::pow(b, -p_ * s);
        return (1.0 - s) / s * (std::pow(a, -p_ * s) - upper);
    }
    const double hi = std::min(b, 1.0 / n);
    if (a >= hi) return 0.0;
    const double e = dim_ - p_;
    const double c = dim_ * std::pow(double(n), dim_);
    if (e == 0.0) return a <= 0.0 ? kInf : c * std::log(hi / a);
    if (a <= 0.0 && e < 0.0) return kInf;
    return c * (std::pow(hi, e) - std::pow(std::max(a, 0.0), e)) / e;
}

double MollifierFamily::support_end(int n) const {
    check_index(n);
    return kind_ == MollifierKind::ludwig ? kInf : 1.0 / n;
}

std::string MollifierFamily::describe() const {
    std::ostringstream os;
    os << to_string(kind_) << " (p=" << p_ << ", N=" << dim_ << ")";
    return os.str();
}

FunctionalSpec FunctionalSpec::gagliardo(const ConvexBody& body, double p, double s) {
    return gagliardo(body, p, s, MagneticPotential::zero(body.dimension()));
}

FunctionalSpec FunctionalSpec::gagliardo(const ConvexBody& body, double p, double s, const MagneticPotential& a) {
    FunctionalSpec spec;
    spec.kind = FunctionalKind::gagliardo;
    spec.p = p;
    spec.body = body;
    spec.potential = a;
    spec.s = s;
    return spec;
}

FunctionalSpec FunctionalSpec::nguyen(const ConvexBody& body, double p, double delta, const MagneticPotential& a) {
    FunctionalSpec spec;
    spec.kind = FunctionalKind::nguyen;
    spec.p = p;
    spec.body = body;
    spec.potential = a;
    spec.delta = delta;
    return spec;
}

FunctionalSpec FunctionalSpec::bbm(const ConvexBody& body, double p, const MollifierFamily& family, int n,
                                   const MagneticPotential& a) {
    FunctionalSpec spec;
    spec.kind = FunctionalKind::bbm;
    spec.p = p;
    spec.body = body;
    spec.potential = a;
    spec.family = family;
    spec.n = n;
    return spec;
}

void FunctionalSpec::validate() const {
    if (!(p >= 1.0) || !std::isfinite(p)) throw std::invalid_argument("functional: p must be >= 1");
    require_same_dim(potential.dimension(), body.dimension(), "functional potential");
    switch (kind) {
        case FunctionalKind::gagliardo:
            if (!(s > 0.0 && s < 1.0)) throw std::invalid_argument("gagliardo: s must lie in (0, 1)");
            if (!potential.is_zero()) throw std::invalid_argument("gagliardo: requires A = 0");
            break;
        case FunctionalKind::nguyen:
            if (!(delta > 0.0) || !std::isfinite(delta)) throw std::invalid_argument("nguyen: delta must be > 0");
            break;
        case FunctionalKind::bbm:
            if (!family) throw std::invalid_argument("bbm: mollifier family missing");
            if (family->dimension() != body.dimension()) {
                throw std::invalid_argument("bbm: mollifier dimension does not match the body");
            }
            if (family->exponent() != p) throw std::invalid_argument("bbm: mollifier exponent does not match p");
            (void)family->support_end(n);
            break;
    }
}

double FunctionalSpec::parameter() const {
    switch (kind) {
        case FunctionalKind::gagliardo:
            return s;
        case FunctionalKind::nguyen:
            return delta;
        case FunctionalKind::bbm:
            return n;
    }
    return 0.0;
}

std::string FunctionalSpec::describe() const {
    std::ostringstream os;
    os << to_string(kind) << " p=" << p;
    if (kind == FunctionalKind::gagliardo) os << " s=" << s;
    if (kind == FunctionalKind::nguyen) os << " delta=" << delta;
    if (kind == FunctionalKind::bbm) os << " " << (family ? family->describe() : "?") << " n=" << n;
    os << " K=" << body.describe() << " A=" << potential.describe();
    return os.str();
}

IntegrationBudget IntegrationBudget::coarsened() const {
    IntegrationBudget c = *this;
    c.outer_nodes = std::max(4, outer_nodes / 2);
    c.samples = std::max<std::size_t>(16, samples / 4);
    c.sphere_resolution = std::max(8, sphere_resolution / 2);
    c.grading_ratio = grading_ratio * grading_ratio;
    c.radial_nodes = std::max(6, radial_nodes / 2);
    return c;
}

namespace {

/// Radial weight of the decomposition y = x + h sigma: the functional is
/// int_x int_sigma int_h Phi(x, sigma, h) k(g, h) dh with g = ||sigma||_K and
///   gagliardo  k = g^{-(N+ps)} h^{-1-ps}
///   bbm        k = (hg)^{-p} rho_n(hg) h^{N-1}
///   nguyen     k = delta^p g^{-(N+p)} h^{-1-p}
struct Kernel {
    FunctionalKind kind;
    double p;
    int dim;
    double s = 0.0;
    double delta = 0.0;
    const MollifierFamily* family = nullptr;
    int n = 0;

    [[nodiscard]] double weight(double g, double h) const {
        switch (kind) {
            case FunctionalKind::gagliardo:
                return std::pow(g, -(dim + p * s)) * std::pow(h, -1.0 - p * s);
            case FunctionalKind::nguyen:
                return std::pow(delta, p) * std::pow(g, -(dim + p)) * std::pow(h, -1.0 - p);
            case FunctionalKind::bbm: {
                const double r = h * g;
                return std::pow(r, -p) * family->rho(n, r) * std::pow(h, dim - 1);
            }
        }
        return 0.0;
    }

    /// int_0^hm h^p k(g, h) dh.
    [[nodiscard]] double near_zero(double g, double hm) const {
        if (kind == FunctionalKind::gagliardo) {
            return std::pow(g, -(dim + p * s)) * std::pow(hm, p * (1.0 - s)) / (p * (1.0 - s));
        }
        if (kind == FunctionalKind::bbm) return std::pow(g, -dim - p) * family->mass(n, hm * g);
        throw std::logic_error("near_zero: not used for the nguyen kernel");
    }

    /// int_a^b k(g, h) dh.
    [[nodiscard]] double tail(double g, double a, double b) const {
        if (!(b > a)) return 0.0;
        switch (kind) {
            case FunctionalKind::gagliardo: {
                const double e = p * s;
                const double upper = std::isinf(b) ? 0.0 : std::pow(b, -e);
                return std::pow(g, -(dim + e)) * (std::pow(a, -e) - upper) / e;
            }
            case FunctionalKind::nguyen: {
                const double upper = std::isinf(b) ? 0.0 : std::pow(b, -p);
                return std::pow(delta, p) * std::pow(g, -(dim + p)) * (std::pow(a, -p) - upper) / p;
            }
            case FunctionalKind::bbm:
                return std::pow(g, -dim) * family->tail_integral(n, a * g, std::isinf(b) ? kInf : b * g);
        }
        return 0.0;
    }

    [[nodiscard]] double support_end(double g) const {
        if (kind == FunctionalKind::bbm) return family->support_end(n) / g;
        return kInf;
    }
};

struct RadialParams {
    double hm = 0.0;
    double ratio = 1.05;
    double cap = 0.25;
    int gl_nodes = 24;
};

/// Integral over [x0, x_last] from samples on a nonuniform grid: Simpson on
/// consecutive interval pairs, quadratic through the last three points for a
/// leftover interval.
double simpson_nonuniform(const std::vector<double>& x, const std::vector<double>& f) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * (x[1] - x[0]) * (f[0] + f[1]);
    double s = 0.0;
    std::size_t i = 0;
    for (; i + 2 < n; i += 2) {
        const double a = x[i + 1] - x[i];
        const double b = x[i + 2] - x[i + 1];
        s += (a + b) / 6.0 * ((2.0 - b / a) * f[i] + (a + b) * (a + b) / (a * b) * f[i + 1] + (2.0 - a / b) * f[i + 2]);
    }
    if (i + 1 < n) {
        const double a = x[i] - x[i - 1];
        const double b = x[i + 1] - x[i];
        s += b * (f[i + 1] * (2.0 * b + 3.0 * a) / (6.0 * (a + b)) + f[i] * (b + 3.0 * a) / (6.0 * a) -
                  f[i - 1] * b * b / (6.0 * a * (a + b)));
    }
    return s;
}

/// Geometric grid from hm with ratio, spacing capped at `cap`, ending at hend.
void radial_grid(double hm, double hend, double ratio, double cap, std::vector<double>& hs) {
    hs.clear();
    double h = hm;
    while (h < hend) {
        hs.push_back(h);
        h += std::min(h * (ratio - 1.0), cap);
    }
    if (hs.size() >= 2 && hend - hs.back() < 0.5 * (hs.back() - hs[hs.size() - 2])) {
        hs.back() = hend;
    } else {
        hs.push_back(hend);
    }
}

/// sup{h >= 0 : |x + h sigma| <= r}, 0 when the ray misses the ball.
double ball_exit(const RVec& x, const RVec& sigma, double r) {
    const double b = dot(x, sigma);
    const double disc = b * b - (dot(x, x) - r * r);
    if (disc < 0.0) return 0.0;
    return std::max(0.0, -b + std::sqrt(disc));
}

/// int_0^inf D(h) k(g, h) dh for a radial profile D with D(h) = O(h^p) at 0
/// and D(h) = d_tail for h >= h_exit. `breaks` optionally lists kinks of D
/// for the bounded-support kernels.
template <class DFn>
double radial_integral(const Kernel& k, double g, double h_exit, double d_tail, const RadialParams& rp, DFn&& D,
                       const std::vector<double>& breaks = {}) {
    const double hs_end = k.support_end(g);
    if (std::isfinite(hs_end)) {
        double val = 0.0;
        const double b = std::min(h_exit, hs_end);
        if (b > 0.0) {
            std::vector<double> pts{0.0};
            for (double t : breaks)
                if (t > 0.0 && t < b) pts.push_back(t);
            pts.push_back(b);
            std::sort(pts.begin(), pts.end());
            for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
                if (pts[i + 1] <= pts[i]) continue;
                val += integrate_gl([&](double h) { return D(h) * k.weight(g, h); }, pts[i], pts[i + 1], rp.gl_nodes);
            }
        }
        if (h_exit < hs_end && d_tail > 0.0) val += d_tail * k.tail(g, h_exit, hs_end);
        return val;
    }
    const double hm = rp.hm;
    if (h_exit <= 2.0 * hm) return d_tail > 0.0 ? d_tail * k.tail(g, std::max(h_exit, hm), kInf) : 0.0;
    const double d1 = D(hm);
    const double d2 = D(2.0 * hm);
    // D(h)/h^p = c + O(h); two-point Richardson gives c without a gradient.
    const double c0 = std::max(0.0, 2.0 * d1 / std::pow(hm, k.p) - d2 / std::pow(2.0 * hm, k.p));
    double val = c0 * k.near_zero(g, hm);
    thread_local std::vector<double> hs, ts, fs;
    radial_grid(hm, h_exit, rp.ratio, rp.cap, hs);
    ts.resize(hs.size());
    fs.resize(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        ts[i] = std::log(hs[i]);
        const double d = i == 0 ? d1 : D(hs[i]);
        fs[i] = d * k.weight(g, hs[i]) * hs[i];
    }
    val += simpson_nonuniform(ts, fs);
    if (d_tail > 0.0) val += d_tail * k.tail(g, h_exit, kInf);
    return val;
}

/// Everything one evaluation needs; built once per budget level.
struct Setup {
    const ComplexField& u;
    const MagneticPotential& a;
    Kernel kernel;
    int dim = 0;
    double p = 0.0;
    double r_in = 0.0;   ///< support radius R
    double r_out = 0.0;  ///< partition radius R2
    bool phase_invariant = true;
    RadialParams radial;
    SphereRule rule;
    std::vector<double> gauges;

    Setup(const ComplexField& field, const FunctionalSpec& spec, const IntegrationBudget& budget)
        : u(field), a(spec.potential), kernel{spec.kind, spec.p, spec.body.dimension()} {
        dim = spec.body.dimension();
        p = spec.p;
        kernel.s = spec.s;
        kernel.delta = spec.delta;
        kernel.family = spec.family ? &*spec.family : nullptr;
        kernel.n = spec.n;
        r_in = field.support_radius();
        r_out = r_in + std::max(0.25 * r_in, 0.5);
        phase_invariant = spec.potential.is_zero() || spec.p == 2.0;
        radial.hm = budget.h_min_factor * r_in;
        radial.ratio = budget.grading_ratio;
        radial.cap = 0.25 * field.feature_scale();
        radial.gl_nodes = budget.radial_nodes;
        if (budget.body_adapted_sphere) {
            rule = SphereRule::for_body(spec.body, budget.sphere_resolution);
        } else {
            SphereRuleSpec rs;
            rs.dim = dim;
            rs.resolution = budget.sphere_resolution;
            rule = SphereRule::build(rs);
        }
        gauges.resize(rule.size());
        for (std::size_t j = 0; j < rule.size(); ++j) gauges[j] = spec.body.gauge(rule.nodes()[j]);
    }

    /// u cut off at the support radius, so rays leave the support exactly at ball_exit.
    [[nodiscard]] complex value(const RVec& x) const { return dot(x, x) < r_in * r_in ? u.value(x) : complex{}; }

    [[nodiscard]] double chi(const RVec& x) const {
        return 1.0 - smooth_step((std::sqrt(dot(x, x)) - r_in) / (r_out - r_in));
    }

    /// |Psi_u(x, x + h sigma) - u(x)|_p^p.
    [[nodiscard]] double diff_pow(const RVec& x, complex ux, const RVec& sigma, double h) const {
        const RVec y = x + h * sigma;
        complex uy = value(y);
        if (!a.is_zero() && uy != 0.0) uy *= std::polar(1.0, -h * dot(sigma, a(x + (0.5 * h) * sigma)));
        return mixed_modulus_pow(uy - ux, p);
    }
};

/// Theta(x) = sum_sigma w int_h [...] dh for the interior part (weight chi(x) applied by the caller).
double interior_value(const Setup& st, const RVec& x) {
    const complex ux = st.value(x);
    const double upow = mixed_modulus_pow(ux, st.p);
    const auto& nodes = st.rule.nodes();
    const auto& weights = st.rule.weights();
    double total = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const RVec& sigma = nodes[j];
        const double g = st.gauges[j];
        const double he = ball_exit(x, sigma, st.r_in);
        if (he <= 0.0 && upow == 0.0) continue;
        double v = 0.0;
        if (st.kernel.kind == FunctionalKind::nguyen) {
            const double thr = std::pow(st.kernel.delta, st.p);
            const double hm = st.radial.hm;
            if (he > hm) {
                thread_local std::vector<double> hs;
                radial_grid(hm, he, st.radial.ratio, st.radial.cap, hs);
                auto on_at = [&](double h) { return st.diff_pow(x, ux, sigma, h) > thr; };
                bool prev_on = on_at(hs[0]);
                if (prev_on) {
                    throw std::runtime_error("nguyen: the level set reaches h_min; decrease h_min_factor or raise delta");
                }
                double prev_h = hs[0];
                double start = 0.0;
                for (std::size_t i = 1; i < hs.size(); ++i) {
                    const bool on = on_at(hs[i]);
                    if (on != prev_on) {
                        double lo = prev_h;
                        double hi = hs[i];
                        while (hi - lo > 1e-12 * hi) {
                            const double mid = 0.5 * (lo + hi);
                            if (on_at(mid) == prev_on) {
                                lo = mid;
                            } else {
                                hi = mid;
                            }
                        }
                        const double c = 0.5 * (lo + hi);
                        if (on) {
                            start = c;
                        } else {
                            v += st.kernel.tail(g, start, c);
                        }
                    }
                    prev_on = on;
                    prev_h = hs[i];
                }
                if (prev_on) v += st.kernel.tail(g, start, he);
            }
            if (upow > thr) v += st.kernel.tail(g, std::max(he, hm), kInf);
        } else {
            v = radial_integral(st.kernel, g, he, upow, st.radial,
                                [&](double h) { return st.diff_pow(x, ux, sigma, h); });
        }
        total += weights[j] * v;
    }
    return total;
}

/// Exterior part at y in B_R: pairs (x, y) with x = y + h sigma outside the
/// partition, where u(x) = 0 and only |e^{i phi} u(y)| matters.
double exterior_value(const Setup& st, const RVec& y, double& bound) {
    const complex uy = st.value(y);
    if (uy == 0.0) return 0.0;
    const double upow = mixed_modulus_pow(uy, st.p);
    const bool nguyen = st.kernel.kind == FunctionalKind::nguyen;
    const double thr = nguyen ? std::pow(st.kernel.delta, st.p) : 0.0;
    auto phi_of = [&](double pw) { return nguyen ? (pw > thr ? 1.0 : 0.0) : pw; };
    const auto& nodes = st.rule.nodes();
    const auto& weights = st.rule.weights();
    double total = 0.0;
    for (std::size_t j = 0; j < nodes.size(); ++j) {
        const RVec& sigma = nodes[j];
        const double g = st.gauges[j];
        const double ha = ball_exit(y, sigma, st.r_in);
        const double hb = ball_exit(y, sigma, st.r_out);
        const double hs_end = st.kernel.support_end(g);
        auto ramp = [&](double h) { return 1.0 - st.chi(y + h * sigma); };
        double v = 0.0;
        if (st.phase_invariant) {
            const double phi = phi_of(upow);
            if (phi == 0.0) continue;
            const double b = std::min(hb, hs_end);
            if (b > ha) {
                v += integrate_gl([&](double h) { return ramp(h) * st.kernel.weight(g, h); }, ha, b,
                                  2 * st.radial.gl_nodes);
            }
            if (hb < hs_end) v += st.kernel.tail(g, hb, hs_end);
            v *= phi;
        } else {
            // Phase along the ray: phi(h) = -h sigma.A(y + h sigma/2).
            auto value_at = [&](double h) {
                const double phase = -h * dot(sigma, st.a(y + (0.5 * h) * sigma));
                return phi_of(mixed_modulus_pow(std::polar(1.0, phase) * uy, st.p));
            };
            const double h_far = std::min(hs_end, hb + 4.0 * st.r_out);
            if (h_far > ha) {
                const double omega = norm(st.a(y)) + st.a.lipschitz_constant() * h_far;
                const double width = std::min(st.radial.cap, omega > 0.0 ? kPi / (4.0 * omega) : st.radial.cap);
                const int panels = std::clamp(static_cast<int>(std::ceil((h_far - ha) / width)), 1, 20000);
                const double step = (h_far - ha) / panels;
                for (int i = 0; i < panels; ++i) {
                    v += integrate_gl(
                        [&](double h) { return ramp(h) * value_at(h) * st.kernel.weight(g, h); }, ha + i * step,
                        ha + (i + 1) * step, 8);
                }
            }
            if (h_far < hs_end) {
                // Beyond h_far only the range of the phase factor is used.
                double lo = kInf, hi = 0.0, mean = 0.0;
                constexpr int kPhases = 256;
                for (int k = 0; k < kPhases; ++k) {
                    const double f = phi_of(mixed_modulus_pow(std::polar(1.0, 2.0 * kPi * k / kPhases) * uy, st.p));
                    lo = std::min(lo, f);
                    hi = std::max(hi, f);
                    mean += f / kPhases;
                }
                const double t = st.kernel.tail(g, h_far, hs_end);
                v += mean * t;
                bound += weights[j] * std::max(hi - mean, mean - lo) * t;
            }
        }
        total += weights[j] * v;
    }
    return total;
}

int default_outer_nodes(int dim) { return dim == 1 ? 400 : dim == 2 ? 48 : dim == 3 ? 16 : 8; }

/// Uniform point in the ball of radius r.
RVec ball_point(Rng& rng, int dim, double r) {
    RVec x(dim);
    double len = 0.0;
    while (len == 0.0) {
        for (int d = 0; d < dim; ++d) x[d] = standard_normal(rng);
        len = norm(x);
    }
    const double radius = r * std::pow(uniform01(rng), 1.0 / dim);
    return x * (radius / len);
}

struct OuterResult {
    double value = 0.0;
    double error = 0.0;
};

OuterResult evaluate_outer(const Setup& st, const IntegrationBudget& budget) {
    const int dim = st.dim;
    OuterResult out;
    if (budget.outer == OuterScheme::tensor_grid) {
        const int n = budget.outer_nodes > 0 ? budget.outer_nodes : default_outer_nodes(dim);
        const TensorGrid interior{dim, n, st.r_out, true, {}};
        const int n_ext = std::max(2, static_cast<int>(std::lround(n * st.r_in / st.r_out)));
        const TensorGrid exterior{dim, n_ext, st.r_in, true, {}};
        const auto xs = interior.nodes();
        const auto ys = exterior.nodes();
        const auto vi = parallel_map(xs.size(), budget.threads, [&](std::size_t i) {
            const double c = st.chi(xs[i]);
            return c == 0.0 ? 0.0 : c * interior_value(st, xs[i]);
        });
        std::vector<double> bounds(ys.size(), 0.0);
        const auto ve = parallel_map(ys.size(), budget.threads, [&](std::size_t i) {
            double b = 0.0;
            const double v = exterior_value(st, ys[i], b);
            bounds[i] = b;
            return v;
        });
        out.value = interior.cell_volume() * pairwise_sum(vi) + exterior.cell_volume() * pairwise_sum(ve);
        out.error = exterior.cell_volume() * pairwise_sum(bounds);
        return out;
    }
    const std::size_t m = budget.samples;
    if (m < 2) throw std::invalid_argument("Monte Carlo outer scheme needs samples >= 2");
    const auto vi = parallel_map(m, budget.threads, [&](std::size_t i) {
        Rng rng = make_rng(budget.seed, "outer_interior", i);
        const RVec x = ball_point(rng, dim, st.r_out);
        const double c = st.chi(x);
        return c == 0.0 ? 0.0 : c * interior_value(st, x);
    });
    std::vector<double> bounds(m, 0.0);
    const auto ve = parallel_map(m, budget.threads, [&](std::size_t i) {
        Rng rng = make_rng(budget.seed, "outer_exterior", i);
        const RVec y = ball_point(rng, dim, st.r_in);
        double b = 0.0;
        const double v = exterior_value(st, y, b);
        bounds[i] = b;
        return v;
    });
    auto mean_se = [&](const std::vector<double>& v, double vol, double& mean, double& se) {
        const double count = static_cast<double>(v.size());
        mean = pairwise_sum(v) / count;
        std::vector<double> sq(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) sq[i] = (v[i] - mean) * (v[i] - mean);
        se = vol * std::sqrt(pairwise_sum(sq) / (count - 1.0) / count);
        mean *= vol;
    };
    const double vol_i = unit_ball_volume(dim) * std::pow(st.r_out, dim);
    const double vol_e = unit_ball_volume(dim) * std::pow(st.r_in, dim);
    double mi = 0.0, si = 0.0, me = 0.0, se = 0.0;
    mean_se(vi, vol_i, mi, si);
    mean_se(ve, vol_e, me, se);
    out.value = mi + me;
    out.error = std::hypot(si, se) + vol_e * pairwise_sum(bounds) / static_cast<double>(m);
    return out;
}

/// Smooth-field route through the spherical decomposition.
FunctionalResult smooth_route(const ComplexField& u, const FunctionalSpec& spec, const IntegrationBudget& requested) {
    IntegrationBudget budget = requested;
    if (budget.outer_nodes <= 0) budget.outer_nodes = default_outer_nodes(u.dimension());
    const Setup fine(u, spec, budget);
    const OuterResult f = evaluate_outer(fine, budget);
    FunctionalResult res;
    res.value = f.value;
    res.route = budget.outer == OuterScheme::tensor_grid ? "spherical/tensor" : "spherical/montecarlo";
    if (budget.outer == OuterScheme::tensor_grid) {
        double diff = 0.0;
        if (budget.estimate_error) {
            const IntegrationBudget cb = budget.coarsened();
            const Setup coarse(u, spec, cb);
            diff = std::abs(f.value - evaluate_outer(coarse, cb).value);
        }
        res.error = diff + f.error;
    } else {
        res.error = f.error;
    }
    return res;
}

/// Indicator fields (p = 1, A = 0): int_x |u(x) - u(x + z)| dx = 2|a| (|E| - cov_E(z)),
/// so only the sigma and h integrals remain.
double indicator_value(const ComplexField& u, const FunctionalSpec& spec, const IntegrationBudget& budget) {
    const Region& region = *u.region();
    const double amp = std::abs(u.amplitude());
    const double mass = region.measure();
    const int dim = region.dimension();
    Kernel kernel{spec.kind, 1.0, dim};
    kernel.s = spec.s;
    kernel.family = spec.family ? &*spec.family : nullptr;
    kernel.n = spec.n;

    std::vector<RVec> corners = region.vertices();
    if (corners.empty()) {
        const AxisBox b = region.bounds();
        for (int mask = 0; mask < (1 << dim); ++mask) {
            RVec c(dim);
            for (int i = 0; i < dim; ++i) c[i] = (mask >> i) & 1 ? b.hi[i] : b.lo[i];
            corners.push_back(c);
        }
    }
    double diam = 0.0;
    for (const RVec& a : corners)
        for (const RVec& b : corners) diam = std::max(diam, norm(a - b));

    std::vector<double> breaks;
    if (dim == 2) {
        for (const Region::Facet& f : region.facets()) {
            const double t = std::atan2(f.normal[1], f.normal[0]) + 0.5 * kPi;
            breaks.push_back(t);
            breaks.push_back(t + kPi);
        }
    }
    SphereRule rule;
    if (budget.body_adapted_sphere) {
        rule = SphereRule::for_body(spec.body, budget.sphere_resolution, breaks);
    } else {
        SphereRuleSpec rs;
        rs.dim = dim;
        rs.resolution = budget.sphere_resolution;
        rs.break_angles = breaks;
        rule = SphereRule::build(rs);
    }
    RadialParams rp;
    rp.hm = budget.h_min_factor * diam;
    rp.ratio = budget.grading_ratio;
    rp.cap = 0.25 * diam;
    rp.gl_nodes = budget.radial_nodes;

    const auto& nodes = rule.nodes();
    const auto values = parallel_map(nodes.size(), budget.threads, [&](std::size_t j) {
        const RVec& sigma = nodes[j];
        const double g = spec.body.gauge(sigma);
        auto D = [&](double h) { return 2.0 * amp * (mass - region.covariogram(h * sigma)); };
        std::vector<double> kinks;
        if (region.is_box()) {
            const AxisBox b = region.bounds();
            for (int i = 0; i < dim; ++i)
                if (sigma[i] != 0.0) kinks.push_back((b.hi[i] - b.lo[i]) / std::abs(sigma[i]));
        } else {
            for (int k = 1; k < 16; ++k) kinks.push_back(diam * k / 16.0);
        }
        return rule.weights()[j] * radial_integral(kernel, g, diam, 2.0 * amp * mass, rp, D, kinks);
    });
    return pairwise_sum(values);
}

FunctionalResult indicator_route(const ComplexField& u, const FunctionalSpec& spec, const IntegrationBudget& budget) {
    if (spec.p != 1.0) throw std::invalid_argument("indicator fields require p = 1");
    if (!spec.potential.is_zero()) {
        throw std::invalid_argument("indicator fields are supported with A = 0 only");
    }
    FunctionalResult res;
    res.route = "covariogram";
    res.value = indicator_value(u, spec, budget);
    if (budget.estimate_error) res.error = std::abs(res.value - indicator_value(u, spec, budget.coarsened()));
    return res;
}

void check_field(const ComplexField& u, const FunctionalSpec& spec, FunctionalKind expected) {
    if (spec.kind != expected) throw std::invalid_argument("functional spec kind mismatch");
    spec.validate();
    require_same_dim(u.dimension(), spec.body.dimension(), "functional field");
}

}  // namespace

FunctionalResult gagliardo(const ComplexField& u, const FunctionalSpec& spec, const IntegrationBudget& budget) {
    check_field(u, spec, FunctionalKind::gagliardo);
    if (u.is_zero()) return {0.0, 0.0, false, "zero"};
    if (u.smoothness() == Smoothness::indicator) return indicator_route(u, spec, budget);
    return smooth_route(u, spec, budget);
}

FunctionalResult nguyen(const ComplexField& u, const FunctionalSpec& spec, const IntegrationBudget& budget) {
    check_field(u, spec, FunctionalKind::nguyen);
    if (u.smoothness() == Smoothness::indicator) {
        throw std::invalid_argument("nguyen: indicator fields are rejected (the delta characterization fails in BV)");
    }
    FunctionalResult res = u.is_zero() ? FunctionalResult{0.0, 0.0, false, "zero"} : smooth_route(u, spec, budget);
    res.lower_bound_only = spec.p == 1.0;
    return res;
}

FunctionalResult bbm(const ComplexField& u, const FunctionalSpec& spec, const IntegrationBudget& budget) {
    check_field(u, spec, FunctionalKind::bbm);
    if (u.is_zero()) return {0.0, 0.0, false, "zero"};
    if (u.smoothness() == Smoothness::indicator) return indicator_route(u, spec, budget);
    return smooth_route(u, spec, budget);
}

FunctionalResult evaluate_functional(const ComplexField& u, const FunctionalSpec& spec,
                                     const IntegrationBudget& budget) {
    switch (spec.kind) {
        case FunctionalKind::gagliardo:
            return gagliardo(u, spec, budget);
        case FunctionalKind::nguyen:
            return nguyen(u, spec, budget);
        case FunctionalKind::bbm:
            return bbm(u, spec, budget);
    }
    throw std::invalid_argument("unknown functional kind");
}

}  // namespace aniso
