#include "aniso/convex_body.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "aniso/quadrature.hpp"
#include "aniso/random.hpp"

namespace aniso {

namespace {

constexpr int kMaxRejectionAttempts = 10000;

double wrap_angle(double a) {
    a = std::fmod(a, 2.0 * kPi);
    if (a < 0.0) a += 2.0 * kPi;
    return a;
}

void sort_unique_angles(std::vector<double>& angles) {
    for (double& a : angles) a = wrap_angle(a);
    std::sort(angles.begin(), angles.end());
    std::vector<double> out;
    for (double a : angles) {
        if (out.empty() || a - out.back() > 1e-12) out.push_back(a);
    }
    if (out.size() > 1 && out.front() + 2.0 * kPi - out.back() < 1e-12) out.pop_back();
    angles = std::move(out);
}

std::vector<RVec> polygon_from_halfplanes(const std::vector<RVec>& normals, const std::vector<double>& offsets) {
    std::vector<RVec> pts;
    const std::size_t m = normals.size();
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            const double det = normals[i][0] * normals[j][1] - normals[i][1] * normals[j][0];
            if (std::abs(det) < 1e-12) continue;
            const RVec v{(offsets[i] * normals[j][1] - offsets[j] * normals[i][1]) / det,
                         (normals[i][0] * offsets[j] - normals[j][0] * offsets[i]) / det};
            bool feasible = true;
            for (std::size_t k = 0; k < m && feasible; ++k) {
                if (dot(normals[k], v) > offsets[k] * (1.0 + 1e-10) + 1e-12) feasible = false;
            }
            if (feasible) pts.push_back(v);
        }
    }
    std::sort(pts.begin(), pts.end(), [](const RVec& a, const RVec& b) {
        return std::atan2(a[1], a[0]) < std::atan2(b[1], b[0]);
    });
    std::vector<RVec> uniq;
    for (const RVec& p : pts) {
        if (uniq.empty() || norm(p - uniq.back()) > 1e-10) uniq.push_back(p);
    }
    if (uniq.size() > 2 && norm(uniq.front() - uniq.back()) <= 1e-10) uniq.pop_back();
    return uniq;
}

}  // namespace

ConvexBody::ConvexBody(int dim, BodyShape shape) : dim_(dim), shape_(std::move(shape)) {
    if (dim < 1 || dim > kMaxDim) throw std::invalid_argument("ConvexBody: dimension outside [1, kMaxDim]");
    finalize();
}

ConvexBody ConvexBody::ball(int dim, double radius) {
    if (!(radius > 0.0) || !std::isfinite(radius)) throw std::invalid_argument("ball: radius must be positive");
    return ConvexBody(dim, EuclideanBall{radius});
}

ConvexBody ConvexBody::ellipsoid(const Matrix& m) {
    if (!m.is_symmetric(1e-12)) throw std::invalid_argument("ellipsoid: matrix must be symmetric");
    const auto ev = m.symmetric_eigenvalues();
    if (!(ev.front() > 0.0)) throw std::invalid_argument("ellipsoid: matrix must be positive definite");
    return ConvexBody(m.order(), Ellipsoid{m});
}

ConvexBody ConvexBody::ellipsoid_axes(const RVec& semi_axes) {
    Matrix m(semi_axes.size());
    for (int i = 0; i < semi_axes.size(); ++i) {
        if (!(semi_axes[i] > 0.0)) throw std::invalid_argument("ellipsoid: semi-axes must be positive");
        m(i, i) = 1.0 / (semi_axes[i] * semi_axes[i]);
    }
    return ellipsoid(m);
}

ConvexBody ConvexBody::polytope(std::vector<RVec> normals, std::vector<double> offsets) {
    if (normals.empty() || normals.size() != offsets.size()) {
        throw std::invalid_argument("polytope: need matching, non-empty normals and offsets");
    }
    const int dim = normals.front().size();
    for (std::size_t i = 0; i < normals.size(); ++i) {
        require_same_dim(dim, normals[i].size(), "polytope normal");
        const double len = norm(normals[i]);
        if (!(len > 0.0)) throw std::invalid_argument("polytope: zero normal");
        if (!(offsets[i] > 0.0)) throw std::invalid_argument("polytope: offsets must be positive");
        normals[i] *= 1.0 / len;
        offsets[i] /= len;
    }
    for (std::size_t i = 0; i < normals.size(); ++i) {
        bool paired = false;
        for (std::size_t j = 0; j < normals.size() && !paired; ++j) {
            if (norm(normals[i] + normals[j]) < 1e-9 &&
                std::abs(offsets[i] - offsets[j]) <= 1e-9 * std::max(1.0, offsets[i])) {
                paired = true;
            }
        }
        if (!paired) throw std::invalid_argument("polytope: facets are not centrally symmetric");
    }
    return ConvexBody(dim, SymmetricPolytope{std::move(normals), std::move(offsets)});
}

ConvexBody ConvexBody::cube(int dim, double half_side) {
    if (!(half_side > 0.0)) throw std::invalid_argument("cube: half side must be positive");
    std::vector<RVec> normals;
    std::vector<double> offsets;
    for (int d = 0; d < dim; ++d) {
        normals.push_back(unit(dim, d));
        normals.push_back(-unit(dim, d));
        offsets.push_back(half_side);
        offsets.push_back(half_side);
    }
    return polytope(std::move(normals), std::move(offsets));
}

ConvexBody ConvexBody::regular_polygon(int sides, double inradius) {
    if (sides < 4 || sides % 2 != 0) throw std::invalid_argument("regular_polygon: need an even number >= 4 of sides");
    std::vector<RVec> normals;
    std::vector<double> offsets;
    for (int k = 0; k < sides; ++k) {
        const double a = 2.0 * kPi * k / sides;
        normals.push_back(RVec{std::cos(a), std::sin(a)});
        offsets.push_back(inradius);
    }
    return polytope(std::move(normals), std::move(offsets));
}

ConvexBody ConvexBody::lq_ball(int dim, double q) {
    if (!(q >= 1.0)) throw std::invalid_argument("lq_ball: q must be >= 1");
    return ConvexBody(dim, LqBall{q});
}

void ConvexBody::finalize() {
    const int n = dim_;
    if (const auto* b = std::get_if<EuclideanBall>(&shape_)) {
        radii_ = {b->radius, b->radius};
        volume_ = unit_ball_volume(n) * std::pow(b->radius, n);
    } else if (const auto* e = std::get_if<Ellipsoid>(&shape_)) {
        const auto ev = e->m.symmetric_eigenvalues();
        radii_ = {1.0 / std::sqrt(ev.back()), 1.0 / std::sqrt(ev.front())};
        volume_ = unit_ball_volume(n) / std::sqrt(e->m.determinant());
    } else if (const auto* l = std::get_if<LqBall>(&shape_)) {
        const double q = l->q;
        const double root_n = std::sqrt(static_cast<double>(n));
        if (std::isinf(q)) {
            radii_ = {1.0, root_n};
            volume_ = std::pow(2.0, n);
        } else {
            const double ratio = std::pow(static_cast<double>(n), 0.5 - 1.0 / q);
            radii_ = q >= 2.0 ? BoundingRadii{1.0, ratio} : BoundingRadii{ratio, 1.0};
            volume_ = std::pow(2.0 * std::tgamma(1.0 + 1.0 / q), n) / std::tgamma(1.0 + n / q);
        }
        if (n == 2 && q == 1.0) kinks_ = {0.0, 0.5 * kPi, kPi, 1.5 * kPi};
        if (n == 2 && std::isinf(q)) kinks_ = {0.25 * kPi, 0.75 * kPi, 1.25 * kPi, 1.75 * kPi};
    } else {
        const auto& poly = std::get<SymmetricPolytope>(shape_);
        if (n == 1) {
            const double c = *std::min_element(poly.offsets.begin(), poly.offsets.end());
            radii_ = {c, c};
            volume_ = 2.0 * c;
        } else if (n == 2) {
            vertices_ = polygon_from_halfplanes(poly.normals, poly.offsets);
            if (vertices_.size() < 3) throw std::invalid_argument("polytope: facets do not bound a polygon");
            double r_in = INFINITY;
            double r_out = 0.0;
            double area = 0.0;
            for (std::size_t k = 0; k < vertices_.size(); ++k) {
                const RVec& a = vertices_[k];
                const RVec& b = vertices_[(k + 1) % vertices_.size()];
                const double cross = a[0] * b[1] - a[1] * b[0];
                area += 0.5 * cross;
                r_in = std::min(r_in, std::abs(cross) / norm(b - a));
                r_out = std::max(r_out, norm(a));
                kinks_.push_back(std::atan2(a[1], a[0]));
            }
            // The polygon is unbounded if consecutive vertices span more than pi.
            for (std::size_t k = 0; k < vertices_.size(); ++k) {
                const RVec& a = vertices_[k];
                const RVec& b = vertices_[(k + 1) % vertices_.size()];
                if (a[0] * b[1] - a[1] * b[0] <= 0.0) throw std::invalid_argument("polytope: unbounded region");
            }
            radii_ = {r_in, r_out};
            volume_ = area;
        } else {
            if (poly.normals.size() != static_cast<std::size_t>(2 * n)) {
                throw std::invalid_argument("polytope: in dimension >= 3 only parallelotopes (N facet pairs) are supported");
            }
            std::vector<RVec> reps;
            std::vector<double> cs;
            for (std::size_t i = 0; i < poly.normals.size(); ++i) {
                bool seen = false;
                for (const RVec& r : reps) seen = seen || norm(r + poly.normals[i]) < 1e-9;
                if (!seen) {
                    reps.push_back(poly.normals[i]);
                    cs.push_back(poly.offsets[i]);
                }
            }
            Matrix a(n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) a(i, j) = reps[i][j];
            const double det = a.determinant();
            if (std::abs(det) < 1e-12) throw std::invalid_argument("polytope: facet normals are degenerate");
            double r_out = 0.0;
            for (int mask = 0; mask < (1 << n); ++mask) {
                RVec rhs(n);
                for (int i = 0; i < n; ++i) rhs[i] = (mask >> i & 1) ? cs[i] : -cs[i];
                r_out = std::max(r_out, norm(a.solve(rhs)));
            }
            double prod = 1.0;
            for (double c : cs) prod *= 2.0 * c;
            radii_ = {*std::min_element(cs.begin(), cs.end()), r_out};
            volume_ = prod / std::abs(det);
        }
    }
    sort_unique_angles(kinks_);
}

double ConvexBody::gauge(const RVec& x) const {
    require_same_dim(dim_, x.size(), "ConvexBody::gauge");
    if (const auto* b = std::get_if<EuclideanBall>(&shape_)) return norm(x) / b->radius;
    if (const auto* e = std::get_if<Ellipsoid>(&shape_)) return std::sqrt(std::max(0.0, dot(x, e->m * x)));
    if (const auto* l = std::get_if<LqBall>(&shape_)) {
        if (std::isinf(l->q)) {
            double m = 0.0;
            for (double v : x) m = std::max(m, std::abs(v));
            return m;
        }
        double s = 0.0;
        double scale = 0.0;
        for (double v : x) scale = std::max(scale, std::abs(v));
        if (scale == 0.0) return 0.0;
        for (double v : x) s += std::pow(std::abs(v) / scale, l->q);
        return scale * std::pow(s, 1.0 / l->q);
    }
    const auto& poly = std::get<SymmetricPolytope>(shape_);
    double g = 0.0;
    for (std::size_t i = 0; i < poly.normals.size(); ++i) g = std::max(g, dot(x, poly.normals[i]) / poly.offsets[i]);
    return g;
}

bool ConvexBody::contains(const RVec& x) const {
    require_same_dim(dim_, x.size(), "ConvexBody::contains");
    if (const auto* b = std::get_if<EuclideanBall>(&shape_)) return dot(x, x) <= b->radius * b->radius;
    if (const auto* e = std::get_if<Ellipsoid>(&shape_)) return dot(x, e->m * x) <= 1.0;
    if (const auto* l = std::get_if<LqBall>(&shape_)) {
        if (std::isinf(l->q)) {
            for (double v : x)
                if (std::abs(v) > 1.0) return false;
            return true;
        }
        double s = 0.0;
        for (double v : x) s += std::pow(std::abs(v), l->q);
        return s <= 1.0;
    }
    const auto& poly = std::get<SymmetricPolytope>(shape_);
    for (std::size_t i = 0; i < poly.normals.size(); ++i)
        if (dot(x, poly.normals[i]) > poly.offsets[i]) return false;
    return true;
}

std::vector<RVec> ConvexBody::sample_uniform(std::size_t count, std::uint64_t seed) const {
    if (count < 1) throw std::invalid_argument("sample_uniform: count must be >= 1");
    Rng rng = make_rng(seed, "sample_uniform");
    std::vector<RVec> out;
    out.reserve(count);
    const double r_out = radii_.outer;
    while (out.size() < count) {
        bool accepted = false;
        for (int attempt = 0; attempt < kMaxRejectionAttempts; ++attempt) {
            RVec x(dim_);
            double len = 0.0;
            while (len == 0.0) {
                for (int d = 0; d < dim_; ++d) x[d] = standard_normal(rng);
                len = norm(x);
            }
            const double r = r_out * std::pow(uniform01(rng), 1.0 / dim_);
            x *= r / len;
            if (contains(x)) {
                out.push_back(x);
                accepted = true;
                break;
            }
        }
        if (!accepted) throw std::runtime_error("sample_uniform: rejection sampling exceeded the retry cap");
    }
    return out;
}

std::string ConvexBody::describe() const {
    std::ostringstream os;
    os.precision(6);
    if (const auto* b = std::get_if<EuclideanBall>(&shape_)) {
        os << "ball(N=" << dim_ << ", r=" << b->radius << ")";
    } else if (std::holds_alternative<Ellipsoid>(shape_)) {
        os << "ellipsoid(N=" << dim_ << ", r_in=" << radii_.inner << ", r_out=" << radii_.outer << ")";
    } else if (const auto* l = std::get_if<LqBall>(&shape_)) {
        os << "lq_ball(N=" << dim_ << ", q=" << l->q << ")";
    } else {
        os << "polytope(N=" << dim_ << ", facets=" << std::get<SymmetricPolytope>(shape_).normals.size() << ")";
    }
    return os.str();
}

}  // namespace aniso
