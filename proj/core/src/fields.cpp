#include "aniso/fields.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "aniso/anisotropic_norms.hpp"
#include "aniso/parallel.hpp"
#include "aniso/quadrature.hpp"
#include "aniso/sphere_rule.hpp"

namespace aniso {

namespace {

constexpr double kGaussianRadius = 8.6;

double cross2(const RVec& a, const RVec& b) { return a[0] * b[1] - a[1] * b[0]; }

double polygon_area(const std::vector<RVec>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) s += cross2(v[i], v[(i + 1) % v.size()]);
    return 0.5 * s;
}

/// Keeps the part of the polygon on the side n.x <= c.
std::vector<RVec> clip_halfplane(const std::vector<RVec>& poly, const RVec& n, double c) {
    std::vector<RVec> out;
    const std::size_t m = poly.size();
    for (std::size_t i = 0; i < m; ++i) {
        const RVec& p = poly[i];
        const RVec& q = poly[(i + 1) % m];
        const double dp = dot(n, p) - c;
        const double dq = dot(n, q) - c;
        if (dp <= 0.0) out.push_back(p);
        if ((dp < 0.0 && dq > 0.0) || (dp > 0.0 && dq < 0.0)) out.push_back(p + (dp / (dp - dq)) * (q - p));
    }
    return out;
}

double segment_distance(const RVec& x, const RVec& a, const RVec& b) {
    const RVec d = b - a;
    const double len2 = dot(d, d);
    double t = len2 > 0.0 ? dot(x - a, d) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return norm(x - (a + t * d));
}

/// Unnormalized bump profile exp(1 - 1/(1 - t^2)) on [0, 1).
double bump_profile(double t) {
    if (t >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - t * t));
}

std::string vec_str(const RVec& v) {
    std::ostringstream os;
    os << '(';
    for (int i = 0; i < v.size(); ++i) os << (i ? "," : "") << v[i];
    os << ')';
    return os.str();
}

}  // namespace

Region Region::box(const RVec& lo, const RVec& hi) {
    require_same_dim(lo.size(), hi.size(), "Region::box");
    const int dim = lo.size();
    if (dim < 1) throw std::invalid_argument("Region::box: empty dimension");
    Region r;
    r.dim_ = dim;
    r.is_box_ = true;
    r.bounds_ = {lo, hi};
    r.measure_ = 1.0;
    for (int i = 0; i < dim; ++i) {
        if (!(hi[i] >= lo[i])) throw std::invalid_argument("Region::box: hi must be >= lo");
        r.measure_ *= hi[i] - lo[i];
    }
    for (int i = 0; i < dim; ++i) {
        double area = 1.0;
        for (int j = 0; j < dim; ++j)
            if (j != i) area *= hi[j] - lo[j];
        r.facets_.push_back({-unit(dim, i), area, {}, {}});
        r.facets_.push_back({unit(dim, i), area, {}, {}});
    }
    if (dim == 2) {
        r.vertices_ = {RVec{lo[0], lo[1]}, RVec{hi[0], lo[1]}, RVec{hi[0], hi[1]}, RVec{lo[0], hi[1]}};
        r.facets_.clear();
        const RVec normals[4] = {RVec{0.0, -1.0}, RVec{1.0, 0.0}, RVec{0.0, 1.0}, RVec{-1.0, 0.0}};
        for (std::size_t i = 0; i < 4; ++i) {
            const RVec& a = r.vertices_[i];
            const RVec& b = r.vertices_[(i + 1) % 4];
            r.facets_.push_back({normals[i], norm(b - a), a, b});
        }
    }
    return r;
}

Region Region::polygon(std::vector<RVec> vertices) {
    if (vertices.size() < 3) throw std::invalid_argument("Region::polygon: needs at least 3 vertices");
    for (const RVec& v : vertices)
        if (v.size() != 2) throw std::invalid_argument("Region::polygon: vertices must be planar");
    if (polygon_area(vertices) < 0.0) std::reverse(vertices.begin(), vertices.end());
    const std::size_t m = vertices.size();
    for (std::size_t i = 0; i < m; ++i) {
        const RVec e1 = vertices[(i + 1) % m] - vertices[i];
        const RVec e2 = vertices[(i + 2) % m] - vertices[(i + 1) % m];
        if (cross2(e1, e2) < -1e-12) throw std::invalid_argument("Region::polygon: polygon is not convex");
    }
    Region r;
    r.dim_ = 2;
    r.vertices_ = vertices;
    r.measure_ = polygon_area(vertices);
    RVec lo = vertices[0], hi = vertices[0];
    for (const RVec& v : vertices) {
        for (int d = 0; d < 2; ++d) {
            lo[d] = std::min(lo[d], v[d]);
            hi[d] = std::max(hi[d], v[d]);
        }
    }
    r.bounds_ = {lo, hi};
    for (std::size_t i = 0; i < m; ++i) {
        const RVec& a = vertices[i];
        const RVec& b = vertices[(i + 1) % m];
        const RVec d = b - a;
        const double len = norm(d);
        if (len == 0.0) continue;
        r.facets_.push_back({RVec{d[1] / len, -d[0] / len}, len, a, b});
    }
    return r;
}

bool Region::contains(const RVec& x) const {
    require_same_dim(x.size(), dim_, "Region::contains");
    if (is_box_) {
        for (int i = 0; i < dim_; ++i)
            if (x[i] < bounds_.lo[i] || x[i] > bounds_.hi[i]) return false;
        return true;
    }
    for (const Facet& f : facets_)
        if (dot(f.normal, x - f.a) > 0.0) return false;
    return true;
}

double Region::covariogram(const RVec& z) const {
    require_same_dim(z.size(), dim_, "Region::covariogram");
    if (is_box_) {
        double v = 1.0;
        for (int i = 0; i < dim_; ++i) v *= std::max(0.0, bounds_.hi[i] - bounds_.lo[i] - std::abs(z[i]));
        return v;
    }
    std::vector<RVec> poly = vertices_;
    for (const Facet& f : facets_) {
        poly = clip_halfplane(poly, f.normal, dot(f.normal, f.a + z));
        if (poly.size() < 3) return 0.0;
    }
    return std::max(0.0, polygon_area(poly));
}

bool Region::chord(const RVec& x, const RVec& sigma, double& t0, double& t1) const {
    t0 = -std::numeric_limits<double>::infinity();
    t1 = std::numeric_limits<double>::infinity();
    auto cut = [&](double slope, double rhs) {
        // slope * t <= rhs
        if (slope > 0.0) {
            t1 = std::min(t1, rhs / slope);
        } else if (slope < 0.0) {
            t0 = std::max(t0, rhs / slope);
        } else if (rhs < 0.0) {
            t0 = 1.0;
            t1 = 0.0;
        }
    };
    if (is_box_) {
        for (int i = 0; i < dim_; ++i) {
            cut(sigma[i], bounds_.hi[i] - x[i]);
            cut(-sigma[i], x[i] - bounds_.lo[i]);
        }
    } else {
        for (const Facet& f : facets_) cut(dot(f.normal, sigma), dot(f.normal, f.a - x));
    }
    return t0 <= t1;
}

double Region::boundary_distance(const RVec& x) const {
    if (is_box_) {
        double inside = std::numeric_limits<double>::infinity();
        double out2 = 0.0;
        bool outside = false;
        for (int i = 0; i < dim_; ++i) {
            const double a = x[i] - bounds_.lo[i];
            const double b = bounds_.hi[i] - x[i];
            if (a < 0.0 || b < 0.0) {
                outside = true;
                const double e = a < 0.0 ? -a : -b;
                out2 += e * e;
            } else {
                inside = std::min(inside, std::min(a, b));
            }
        }
        return outside ? std::sqrt(out2) : inside;
    }
    double d = std::numeric_limits<double>::infinity();
    for (const Facet& f : facets_) d = std::min(d, segment_distance(x, f.a, f.b));
    return d;
}

std::string Region::describe() const {
    std::ostringstream os;
    if (is_box_) {
        os << "box " << vec_str(bounds_.lo) << "-" << vec_str(bounds_.hi);
    } else {
        os << "polygon[";
        for (std::size_t i = 0; i < vertices_.size(); ++i) os << (i ? " " : "") << vec_str(vertices_[i]);
        os << "]";
    }
    return os.str();
}

ComplexField::ComplexField(int dim) : dim_(dim) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("field dimension outside [1, kMaxDim]");
}

AxisBox ComplexField::support_box() const {
    const double r = support_radius();
    return {RVec(dim_, -r), RVec(dim_, r)};
}

namespace {

class ZeroField final : public ComplexField {
public:
    explicit ZeroField(int dim) : ComplexField(dim) {}
    complex value(const RVec&) const override { return 0.0; }
    CVec gradient(const RVec& x) const override { return CVec(x.size()); }
    double support_radius() const override { return 0.0; }
    bool is_zero() const override { return true; }
    std::string describe() const override { return "zero"; }
};

class GaussianField final : public ComplexField {
public:
    explicit GaussianField(int dim) : ComplexField(dim) {}
    complex value(const RVec& x) const override { return std::exp(-0.5 * dot(x, x)); }
    CVec gradient(const RVec& x) const override {
        const double u = std::exp(-0.5 * dot(x, x));
        CVec g(x.size());
        for (int i = 0; i < x.size(); ++i) g[i] = -x[i] * u;
        return g;
    }
    double support_radius() const override { return kGaussianRadius; }
    std::string describe() const override { return "gaussian"; }
};

class ModulatedGaussianField final : public ComplexField {
public:
    explicit ModulatedGaussianField(const RVec& k) : ComplexField(k.size()), k_(k) {}
    complex value(const RVec& x) const override {
        return std::polar(std::exp(-0.5 * dot(x, x)), dot(k_, x));
    }
    CVec gradient(const RVec& x) const override {
        const complex u = value(x);
        CVec g(x.size());
        for (int i = 0; i < x.size(); ++i) g[i] = complex(-x[i], k_[i]) * u;
        return g;
    }
    double support_radius() const override { return kGaussianRadius; }
    double feature_scale() const override { return 1.0 / std::max(1.0, norm(k_)); }
    std::string describe() const override { return "modulated_gaussian k=" + vec_str(k_); }

private:
    RVec k_;
};

class BumpField final : public ComplexField {
public:
    explicit BumpField(int dim) : ComplexField(dim) {}
    complex value(const RVec& x) const override { return bump_profile(std::sqrt(dot(x, x))); }
    CVec gradient(const RVec& x) const override {
        const double r2 = dot(x, x);
        CVec g(x.size());
        if (r2 >= 1.0) return g;
        const double q = 1.0 - r2;
        const double u = std::exp(1.0 - 1.0 / q);
        for (int i = 0; i < x.size(); ++i) g[i] = -2.0 * x[i] * u / (q * q);
        return g;
    }
    double support_radius() const override { return 1.0; }
    double feature_scale() const override { return 0.25; }
    std::string describe() const override { return "bump"; }
};

class IndicatorField final : public ComplexField {
public:
    IndicatorField(const Region& region, double amplitude)
        : ComplexField(region.dimension()), region_(region), amplitude_(amplitude) {
        for (const RVec& c : corners()) radius_ = std::max(radius_, norm(c));
    }
    complex value(const RVec& x) const override { return region_.contains(x) ? amplitude_ : 0.0; }
    CVec gradient(const RVec&) const override {
        throw std::domain_error("indicator fields have no pointwise gradient");
    }
    double support_radius() const override { return radius_; }
    AxisBox support_box() const override { return region_.bounds(); }
    double feature_scale() const override {
        const AxisBox b = region_.bounds();
        double s = std::numeric_limits<double>::infinity();
        for (int i = 0; i < dimension(); ++i) s = std::min(s, b.hi[i] - b.lo[i]);
        return s > 0.0 ? s : 1.0;
    }
    Smoothness smoothness() const override { return Smoothness::indicator; }
    const Region* region() const override { return &region_; }
    double amplitude() const override { return amplitude_; }
    bool is_zero() const override { return amplitude_ == 0.0 || region_.measure() == 0.0; }
    std::string describe() const override {
        std::ostringstream os;
        os << "indicator " << region_.describe() << " amplitude " << amplitude_;
        return os.str();
    }

private:
    std::vector<RVec> corners() const {
        if (!region_.vertices().empty()) return region_.vertices();
        const AxisBox b = region_.bounds();
        const int dim = dimension();
        std::vector<RVec> out;
        for (int mask = 0; mask < (1 << dim); ++mask) {
            RVec c(dim);
            for (int i = 0; i < dim; ++i) c[i] = (mask >> i) & 1 ? b.hi[i] : b.lo[i];
            out.push_back(c);
        }
        return out;
    }

    Region region_;
    double amplitude_;
    double radius_ = 0.0;
};

/// tau_m * u with tau_m(z) = c m^N tau(m|z|). Values use polar quadrature
/// around x; for indicators each ray meets the region in one chord, so the
/// radial integral is taken over the exact chord. Indicator gradients use
/// grad u_m(x) = -a sum_F nu_F int_F tau_m(x - y) dH(y).
class MollifiedField final : public ComplexField {
public:
    MollifiedField(FieldPtr base, int m) : ComplexField(base->dimension()), base_(std::move(base)), m_(m) {
        const int dim = dimension();
        if (base_->smoothness() == Smoothness::indicator && dim > 2) {
            throw std::invalid_argument("mollify: indicator regions supported for N <= 2");
        }
        SphereRuleSpec spec;
        spec.dim = dim;
        spec.resolution = dim == 2 ? 256 : 32;
        rule_ = SphereRule::build(spec);
        const GaussLegendre& gl = gauss_legendre(kRadialNodes);
        double mass = 0.0;
        for (int i = 0; i < kRadialNodes; ++i) {
            const double t = 0.5 * (gl.nodes[i] + 1.0);
            mass += 0.5 * gl.weights[i] * bump_profile(t) * std::pow(t, dim - 1);
        }
        mass *= rule_.total_weight();
        norm_ = 1.0 / mass;
    }

    complex value(const RVec& x) const override {
        const int dim = dimension();
        const double rmax = 1.0 / m_;
        complex s = 0.0;
        if (const Region* region = base_->region()) {
            if (dim == 2) return base_->amplitude() * planar_region_mass(*region, x);
            for (std::size_t j = 0; j < rule_.size(); ++j) {
                double t0 = 0.0, t1 = 0.0;
                if (!region->chord(x, rule_.nodes()[j], t0, t1)) continue;
                const double a = std::max(0.0, t0);
                const double b = std::min(rmax, t1);
                if (b <= a) continue;
                s += rule_.weights()[j] * radial_mass(a, b);
            }
            return base_->amplitude() * s;
        }
        const GaussLegendre& gl = gauss_legendre(kRadialNodes);
        for (std::size_t j = 0; j < rule_.size(); ++j) {
            complex ray = 0.0;
            for (int i = 0; i < kRadialNodes; ++i) {
                const double t = 0.5 * (gl.nodes[i] + 1.0);
                const double r = t * rmax;
                ray += 0.5 * gl.weights[i] * bump_profile(t) * std::pow(t, dim - 1) *
                       base_->value(x - r * rule_.nodes()[j]);
            }
            s += rule_.weights()[j] * ray;
        }
        return norm_ * s;
    }

    CVec gradient(const RVec& x) const override {
        const int dim = dimension();
        CVec g(dim);
        if (const Region* region = base_->region()) {
            const double rmax = 1.0 / m_;
            if (region->boundary_distance(x) >= rmax) return g;
            const double a = base_->amplitude();
            if (dim == 1) {
                const AxisBox b = region->bounds();
                g[0] = -a * (-tau_m(std::abs(x[0] - b.lo[0])) + tau_m(std::abs(x[0] - b.hi[0])));
                return g;
            }
            for (const Region::Facet& f : region->facets()) {
                const double flux = edge_integral(x, f.a, f.b);
                for (int i = 0; i < dim; ++i) g[i] -= a * f.normal[i] * flux;
            }
            return g;
        }
        const GaussLegendre& gl = gauss_legendre(kRadialNodes);
        const double rmax = 1.0 / m_;
        for (std::size_t j = 0; j < rule_.size(); ++j) {
            CVec ray(dim);
            for (int i = 0; i < kRadialNodes; ++i) {
                const double t = 0.5 * (gl.nodes[i] + 1.0);
                const CVec gu = base_->gradient(x - (t * rmax) * rule_.nodes()[j]);
                const double w = 0.5 * gl.weights[i] * bump_profile(t) * std::pow(t, dim - 1);
                for (int d = 0; d < dim; ++d) ray[d] += w * gu[d];
            }
            for (int d = 0; d < dim; ++d) g[d] += rule_.weights()[j] * ray[d];
        }
        for (int d = 0; d < dim; ++d) g[d] *= norm_;
        return g;
    }

    double support_radius() const override { return base_->support_radius() + 1.0 / m_; }
    AxisBox support_box() const override {
        AxisBox b = base_->support_box();
        for (int i = 0; i < dimension(); ++i) {
            b.lo[i] -= 1.0 / m_;
            b.hi[i] += 1.0 / m_;
        }
        return b;
    }
    double feature_scale() const override { return std::min(base_->feature_scale(), 1.0 / m_); }
    bool is_zero() const override { return base_->is_zero(); }
    std::string describe() const override {
        return "mollify(" + base_->describe() + ", m=" + std::to_string(m_) + ")";
    }

private:
    static constexpr int kRadialNodes = 48;
    static constexpr int kEdgeNodes = 32;

    /// tau_m at distance r.
    double tau_m(double r) const { return norm_ * std::pow(double(m_), dimension()) * bump_profile(r * m_); }

    /// int_a^b tau_m(r) r^{N-1} dr in units where the full mass of the
    /// radial rule times the sphere weight is one.
    double radial_mass(double a, double b) const {
        const int dim = dimension();
        const double scale = m_;
        if (a == 0.0 && b * scale >= 1.0) {
            const GaussLegendre& gl = gauss_legendre(kRadialNodes);
            double s = 0.0;
            for (int i = 0; i < kRadialNodes; ++i) {
                const double t = 0.5 * (gl.nodes[i] + 1.0);
                s += 0.5 * gl.weights[i] * bump_profile(t) * std::pow(t, dim - 1);
            }
            return norm_ * s;
        }
        return norm_ * integrate_gl([&](double t) { return bump_profile(t) * std::pow(t, dim - 1); }, a * scale,
                                    std::min(1.0, b * scale), kRadialNodes);
    }

    /// int_E tau_m(x - y) dy for a convex polygon, as the signed sum over edges
    /// of the triangle (x, p, q) in polar coordinates around x. Each edge is
    /// parametrized by arclength s from the foot of the perpendicular, so
    /// dtheta = d ds / (d^2 + s^2); near x the radial mass behaves like r^2,
    /// which keeps the integrand smooth even when x sits next to the edge.
    double planar_region_mass(const Region& region, const RVec& x) const {
        const double rmax = 1.0 / m_;
        if (region.boundary_distance(x) >= rmax) return region.contains(x) ? 1.0 : 0.0;
        const double full = radial_mass(0.0, rmax);
        const auto& verts = region.vertices();
        double total = 0.0;
        for (std::size_t k = 0; k < verts.size(); ++k) {
            const RVec& p = verts[k];
            const RVec& q = verts[(k + 1) % verts.size()];
            const RVec e = (1.0 / norm(q - p)) * (q - p);
            const RVec nrm{e[1], -e[0]};
            const double d = dot(p - x, nrm);
            if (d == 0.0) continue;
            const double sp = dot(p - x, e);
            const double sq = dot(q - x, e);
            auto angle = [&](double a, double b) { return std::atan(b / d) - std::atan(a / d); };
            auto inner = [&](double a, double b) {
                if (b <= a) return 0.0;
                return integrate_gl(
                    [&](double s) {
                        const double r2 = d * d + s * s;
                        return radial_mass(0.0, std::sqrt(r2)) * d / r2;
                    },
                    a, b, kEdgeNodes);
            };
            const double c2 = rmax * rmax - d * d;
            if (c2 <= 0.0) {
                total += full * angle(sp, sq);
                continue;
            }
            const double c = std::sqrt(c2);
            total += full * (angle(sp, std::min(sq, -c)) * (sp < -c ? 1.0 : 0.0) +
                             angle(std::max(sp, c), sq) * (sq > c ? 1.0 : 0.0));
            total += inner(std::max(sp, -c), std::min(sq, c));
        }
        // radial_mass is normalized against the fixed rule's total weight
        return total * rule_.total_weight() / (2.0 * kPi);
    }

    /// int over the segment [p, q] of tau_m(x - y) dH(y).
    double edge_integral(const RVec& x, const RVec& p, const RVec& q) const {
        const RVec d = q - p;
        const double len2 = dot(d, d);
        if (len2 == 0.0) return 0.0;
        const double rmax = 1.0 / m_;
        // |p + t d - x|^2 <= rmax^2
        const RVec w = p - x;
        const double bq = dot(w, d) / len2;
        const double cq = (dot(w, w) - rmax * rmax) / len2;
        const double disc = bq * bq - cq;
        if (disc <= 0.0) return 0.0;
        const double root = std::sqrt(disc);
        const double t0 = std::max(0.0, -bq - root);
        const double t1 = std::min(1.0, -bq + root);
        if (t1 <= t0) return 0.0;
        const double len = std::sqrt(len2);
        return len * integrate_gl([&](double t) { return tau_m(norm(w + t * d)); }, t0, t1, 32);
    }

    FieldPtr base_;
    int m_;
    SphereRule rule_;
    double norm_ = 1.0;
};

}  // namespace

FieldPtr zero_field(int dim) { return std::make_shared<ZeroField>(dim); }
FieldPtr gaussian_field(int dim) { return std::make_shared<GaussianField>(dim); }
FieldPtr modulated_gaussian_field(const RVec& k) { return std::make_shared<ModulatedGaussianField>(k); }
FieldPtr bump_field(int dim) { return std::make_shared<BumpField>(dim); }
FieldPtr indicator_field(const Region& region, double amplitude) {
    return std::make_shared<IndicatorField>(region, amplitude);
}

FieldPtr mollify(const FieldPtr& u, int m) {
    if (!u) throw std::invalid_argument("mollify: null field");
    if (m < 1) throw std::invalid_argument("mollify: m must be >= 1");
    return std::make_shared<MollifiedField>(u, m);
}

MagneticPotential::MagneticPotential(RVec a, Matrix b, std::string description)
    : dim_(a.size()), a_(a), b_(b), description_(std::move(description)) {
    require_same_dim(a.size(), b.order(), "MagneticPotential");
    const Matrix btb = b_.transpose() * b_;
    const auto eig = btb.symmetric_eigenvalues();
    lipschitz_ = std::sqrt(std::max(0.0, eig.back()));
    zero_ = norm(a_) == 0.0;
    for (int i = 0; i < dim_; ++i)
        for (int j = 0; j < dim_; ++j)
            if (b_(i, j) != 0.0) zero_ = false;
}

MagneticPotential MagneticPotential::zero(int dim) { return {RVec(dim), Matrix(dim), "zero"}; }

MagneticPotential MagneticPotential::constant(const RVec& a) {
    return {a, Matrix(a.size()), "constant " + vec_str(a)};
}

MagneticPotential MagneticPotential::linear(const Matrix& b) {
    std::ostringstream os;
    os << "linear B=[";
    for (int i = 0; i < b.order(); ++i) {
        RVec row(b.order());
        for (int j = 0; j < b.order(); ++j) row[j] = b(i, j);
        os << (i ? "," : "") << vec_str(row);
    }
    os << "]";
    return {RVec(b.order()), b, os.str()};
}

MagneticPotential MagneticPotential::rotational(double b) {
    Matrix m(2);
    m(0, 1) = -0.5 * b;
    m(1, 0) = 0.5 * b;
    std::ostringstream os;
    os << "rotational b=" << b;
    return {RVec(2), m, os.str()};
}

RVec MagneticPotential::operator()(const RVec& x) const {
    require_same_dim(x.size(), dim_, "MagneticPotential");
    if (zero_) return RVec(dim_);
    return a_ + b_ * x;
}

VectorField::VectorField(RVec center, double radius, RVec w0, Matrix w)
    : center_(center), radius_(radius), w0_(w0), w_(w) {
    require_same_dim(center.size(), w0.size(), "VectorField");
    require_same_dim(center.size(), w.order(), "VectorField");
    if (!(radius > 0.0) || !std::isfinite(radius)) {
        throw std::invalid_argument("VectorField: test fields must be compactly supported (radius > 0 finite)");
    }
}

RVec VectorField::operator()(const RVec& x) const {
    const RVec d = x - center_;
    const double beta = bump_profile(norm(d) / radius_);
    if (beta == 0.0) return RVec(x.size());
    return beta * (w0_ + w_ * d);
}

double VectorField::divergence(const RVec& x) const {
    const RVec d = x - center_;
    const double r = norm(d);
    const double t = r / radius_;
    if (t >= 1.0) return 0.0;
    const double beta = bump_profile(t);
    double trace = 0.0;
    for (int i = 0; i < x.size(); ++i) trace += w_(i, i);
    double out = beta * trace;
    if (r > 0.0) {
        const double q = 1.0 - t * t;
        const double dbeta = beta * (-2.0 * t / (q * q));
        out += dbeta / (radius_ * r) * dot(d, w0_ + w_ * d);
    }
    return out;
}

AxisBox VectorField::support_box() const {
    const RVec r(center_.size(), radius_);
    return {center_ - r, center_ + r};
}

VectorField VectorField::scaled(double factor) const {
    Matrix w = w_;
    for (int i = 0; i < w.order(); ++i)
        for (int j = 0; j < w.order(); ++j) w(i, j) *= factor;
    return {center_, radius_, factor * w0_, w};
}

bool VectorField::constant_direction() const {
    for (int i = 0; i < w_.order(); ++i)
        for (int j = 0; j < w_.order(); ++j)
            if (w_(i, j) != 0.0) return false;
    return true;
}

double VectorField::magnitude_bound() const {
    const auto eig = (w_.transpose() * w_).symmetric_eigenvalues();
    return norm(w0_) + std::sqrt(std::max(0.0, eig.back())) * radius_;
}

std::vector<RVec> BoxGrid::nodes() const {
    const int dim = box.lo.size();
    if (nodes_per_axis < 1) throw std::invalid_argument("BoxGrid: nodes_per_axis must be >= 1");
    std::size_t total = 1;
    for (int d = 0; d < dim; ++d) total *= static_cast<std::size_t>(nodes_per_axis);
    std::vector<RVec> out;
    out.reserve(total);
    for (std::size_t flat = 0; flat < total; ++flat) {
        RVec x(dim);
        std::size_t rest = flat;
        for (int d = 0; d < dim; ++d) {
            const auto i = static_cast<int>(rest % nodes_per_axis);
            rest /= nodes_per_axis;
            const double h = (box.hi[d] - box.lo[d]) / nodes_per_axis;
            x[d] = box.lo[d] + (i + 0.5) * h;
        }
        out.push_back(x);
    }
    return out;
}

double BoxGrid::cell_volume() const {
    double v = 1.0;
    for (int d = 0; d < box.lo.size(); ++d) v *= (box.hi[d] - box.lo[d]) / nodes_per_axis;
    return v;
}

BoxGrid BoxGrid::coarsened() const { return {box, std::max(1, nodes_per_axis / 2)}; }

int default_nodes_per_axis(const AxisBox& box, double feature_scale) {
    const int dim = box.lo.size();
    double width = 0.0;
    for (int d = 0; d < dim; ++d) width = std::max(width, box.hi[d] - box.lo[d]);
    const int cap = dim == 1 ? 20000 : dim == 2 ? 800 : dim == 3 ? 96 : 32;
    int n = static_cast<int>(std::ceil(8.0 * width / feature_scale));
    n = std::clamp(n, 16, cap);
    return n + (n % 2);
}

complex psi(const ComplexField& u, const MagneticPotential& a, const RVec& x, const RVec& y) {
    require_same_dim(x.size(), u.dimension(), "psi");
    require_same_dim(y.size(), u.dimension(), "psi");
    const complex uy = u.value(y);
    if (a.is_zero()) return uy;
    const double phase = dot(x - y, a(0.5 * (x + y)));
    return std::polar(1.0, phase) * uy;
}

CVec magnetic_gradient(const ComplexField& u, const MagneticPotential& a, const RVec& x) {
    require_same_dim(x.size(), u.dimension(), "magnetic_gradient");
    CVec g = u.gradient(x);
    if (a.is_zero()) return g;
    const complex ux = u.value(x);
    const RVec ax = a(x);
    for (int i = 0; i < g.size(); ++i) g[i] -= complex(0.0, ax[i]) * ux;
    return g;
}

namespace {

template <class F>
Estimate grid_integral(const BoxGrid& grid, int threads, F&& f) {
    auto run = [&](const BoxGrid& g) {
        const auto nodes = g.nodes();
        const auto values = parallel_map(nodes.size(), threads, [&](std::size_t i) { return f(nodes[i]); });
        return g.cell_volume() * pairwise_sum(values);
    };
    const double fine = run(grid);
    const double coarse = run(grid.coarsened());
    return {fine, std::abs(fine - coarse)};
}

BoxGrid field_grid(const ComplexField& u, const GridConfig& cfg) {
    const AxisBox box = u.support_box();
    const int n = cfg.nodes_per_axis > 0 ? cfg.nodes_per_axis : default_nodes_per_axis(box, u.feature_scale());
    return {box, n};
}

void require_smooth(const ComplexField& u, const char* what) {
    if (u.smoothness() != Smoothness::smooth) {
        throw std::domain_error(std::string(what) + ": indicator fields have no pointwise gradient");
    }
}

}  // namespace

Estimate local_energy(const ComplexField& u, const MagneticPotential& a, const ConvexBody& body, double p,
                      const GridConfig& grid) {
    require_smooth(u, "local_energy");
    require_same_dim(u.dimension(), body.dimension(), "local_energy");
    require_same_dim(a.dimension(), body.dimension(), "local_energy");
    const MomentNormEvaluator ev(body, p, SphereQuadrature{grid.sphere_resolution});
    if (u.is_zero()) return {0.0, 0.0};
    return grid_integral(field_grid(u, grid), grid.threads,
                         [&](const RVec& x) { return ev.norm_pow(magnetic_gradient(u, a, x)); });
}

Estimate total_variation_smooth(const ComplexField& u, const MagneticPotential& a, const ConvexBody& body,
                                const GridConfig& grid) {
    return local_energy(u, a, body, 1.0, grid);
}

Estimate total_variation_split(const ComplexField& u, const MagneticPotential& a, const ConvexBody& body,
                               const GridConfig& grid) {
    require_smooth(u, "total_variation_split");
    require_same_dim(u.dimension(), body.dimension(), "total_variation_split");
    const MomentNormEvaluator ev(body, 1.0, SphereQuadrature{grid.sphere_resolution});
    if (u.is_zero()) return {0.0, 0.0};
    return grid_integral(field_grid(u, grid), grid.threads, [&](const RVec& x) {
        const complex ux = u.value(x);
        const CVec g = u.gradient(x);
        const RVec ax = a(x);
        const RVec v1 = real_part(g) + ux.imag() * ax;
        const RVec v2 = imag_part(g) - ux.real() * ax;
        double s = 0.0;
        if (norm(v1) > 0.0) s += ev.sphere_pow(to_complex(v1));
        if (norm(v2) > 0.0) s += ev.sphere_pow(to_complex(v2));
        return s;
    });
}

double anisotropic_perimeter(const Region& region, const ConvexBody& body) {
    require_same_dim(region.dimension(), body.dimension(), "anisotropic_perimeter");
    for (int i = 0; i < region.dimension(); ++i) {
        if (!std::isfinite(region.bounds().lo[i]) || !std::isfinite(region.bounds().hi[i])) {
            throw std::invalid_argument("anisotropic_perimeter: region must be bounded");
        }
    }
    if (region.measure() == 0.0) return 0.0;
    const MomentNormEvaluator ev(body, 1.0);
    double s = 0.0;
    for (const Region::Facet& f : region.facets()) {
        if (f.measure == 0.0) continue;
        s += f.measure * ev.sphere(to_complex(f.normal)).value;
    }
    return s;
}

PairingResult variational_pairing(const ComplexField& u, const MagneticPotential& a, const VectorField& phi,
                                  const GridConfig& grid) {
    require_same_dim(u.dimension(), phi.dimension(), "variational_pairing");
    require_same_dim(a.dimension(), phi.dimension(), "variational_pairing");
    const AxisBox box = phi.support_box();
    double width = 0.0;
    for (int d = 0; d < box.lo.size(); ++d) width = std::max(width, box.hi[d] - box.lo[d]);
    const int n = grid.nodes_per_axis > 0 ? grid.nodes_per_axis
                                          : default_nodes_per_axis(box, std::min(u.feature_scale(), width / 8.0));
    const BoxGrid g{box, n};
    PairingResult out;
    out.first = grid_integral(g, grid.threads, [&](const RVec& x) {
        const complex ux = u.value(x);
        return ux.real() * phi.divergence(x) - dot(a(x), phi(x)) * ux.imag();
    });
    out.second = grid_integral(g, grid.threads, [&](const RVec& x) {
        const complex ux = u.value(x);
        return ux.imag() * phi.divergence(x) + dot(a(x), phi(x)) * ux.real();
    });
    return out;
}

}  // namespace aniso
