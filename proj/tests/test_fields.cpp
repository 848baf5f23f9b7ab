#include <cmath>
#include <vector>

#include "aniso/anisotropic_norms.hpp"
#include "aniso/fields.hpp"
#include "aniso/quadrature.hpp"
#include "aniso/random.hpp"
#include "doctest.h"

using namespace aniso;

namespace {

void check_gradient(const ComplexField& u, const RVec& x, double tol) {
    const CVec g = u.gradient(x);
    const double h = 1e-5;
    for (int i = 0; i < x.size(); ++i) {
        RVec xp = x;
        RVec xm = x;
        xp[i] += h;
        xm[i] -= h;
        const complex fd = (u.value(xp) - u.value(xm)) / (2.0 * h);
        REQUIRE(std::abs(fd - g[i]) <= tol);
    }
}

RVec random_point(Rng& rng, int dim, double scale) {
    RVec x(dim);
    for (int i = 0; i < dim; ++i) x[i] = scale * (2.0 * uniform01(rng) - 1.0);
    return x;
}

}  // namespace

TEST_CASE("analytic gradients match finite differences") {
    Rng rng = make_rng(1, "fd");
    const std::vector<FieldPtr> fields = {gaussian_field(2), gaussian_field(3), modulated_gaussian_field({1.0, 0.5}),
                                          bump_field(2), mollify(gaussian_field(2), 5),
                                          mollify(indicator_field(Region::box({-1.0, -1.0}, {1.0, 1.0})), 4)};
    for (const FieldPtr& u : fields) {
        CAPTURE(u->describe());
        for (int k = 0; k < 50; ++k) check_gradient(*u, random_point(rng, u->dimension(), 1.5), 1e-6);
    }
    CHECK_THROWS((void)indicator_field(Region::box({0.0, 0.0}, {1.0, 1.0}))->gradient({0.5, 0.5}));
}

TEST_CASE("field values") {
    CHECK(gaussian_field(2)->value({0.0, 0.0}) == complex(1.0, 0.0));
    CHECK(std::abs(gaussian_field(2)->value({1.0, 1.0}) - std::exp(-1.0)) < 1e-15);
    const complex m = modulated_gaussian_field({1.0, 0.0})->value({kPi / 2.0, 0.0});
    CHECK(m.real() == doctest::Approx(0.0).epsilon(1e-15).scale(1.0));
    CHECK(m.imag() == doctest::Approx(std::exp(-kPi * kPi / 8.0)).epsilon(1e-14));
    CHECK(bump_field(2)->value({0.0, 0.0}) == complex(1.0, 0.0));
    CHECK(bump_field(2)->value({1.0, 0.0}) == complex(0.0, 0.0));
    CHECK(zero_field(3)->is_zero());
    const FieldPtr ind = indicator_field(Region::box({0.0, 0.0}, {1.0, 1.0}), 2.5);
    CHECK(ind->value({0.5, 0.5}) == complex(2.5, 0.0));
    CHECK(ind->value({1.5, 0.5}) == complex(0.0, 0.0));
    CHECK(ind->smoothness() == Smoothness::indicator);
}

TEST_CASE("regions") {
    const Region sq = Region::box({0.0, 0.0}, {1.0, 1.0});
    CHECK(sq.measure() == doctest::Approx(1.0));
    CHECK(sq.facets().size() == 4);
    // covariogram of the unit square: (1 - |z1|)(1 - |z2|)
    CHECK(sq.covariogram({0.25, -0.5}) == doctest::Approx(0.75 * 0.5).epsilon(1e-14));
    CHECK(sq.covariogram({1.5, 0.0}) == 0.0);
    const Region tri = Region::polygon({{0.0, 0.0}, {0.0, 1.0}, {1.0, 0.0}});
    CHECK(tri.measure() == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(tri.contains({0.2, 0.2}));
    CHECK_FALSE(tri.contains({0.6, 0.6}));
    double t0 = 0.0;
    double t1 = 0.0;
    REQUIRE(sq.chord({-1.0, 0.5}, {1.0, 0.0}, t0, t1));
    CHECK(t0 == doctest::Approx(1.0));
    CHECK(t1 == doctest::Approx(2.0));
    CHECK_FALSE(sq.chord({-1.0, 2.0}, {1.0, 0.0}, t0, t1));
    CHECK(sq.boundary_distance({0.5, 0.25}) == doctest::Approx(0.25));
    CHECK_THROWS(Region::box({1.0, 0.0}, {0.0, 1.0}));
    CHECK(indicator_field(Region::box({0.0, 0.0}, {0.0, 1.0}))->is_zero());
    // non-convex polygon
    CHECK_THROWS(Region::polygon({{0.0, 0.0}, {2.0, 0.0}, {1.0, 0.2}, {2.0, 2.0}, {0.0, 2.0}}));

    // covariogram against a Monte Carlo count over the triangle
    Rng rng = make_rng(2, "cov");
    const RVec z{0.2, 0.1};
    int hits = 0;
    const int n = 200000;
    int inside = 0;
    for (int k = 0; k < n; ++k) {
        const RVec x{uniform01(rng), uniform01(rng)};
        if (!tri.contains(x)) continue;
        ++inside;
        if (tri.contains(x - z)) ++hits;
    }
    const double est = 0.5 * hits / inside;
    const double se = 0.5 * std::sqrt(est / 0.5 * (1.0 - est / 0.5) / inside);
    CHECK(std::abs(tri.covariogram(z) - est) < 4.0 * se);
}

TEST_CASE("magnetic potentials") {
    const MagneticPotential rot = MagneticPotential::rotational(2.0);
    const RVec a = rot({1.0, 3.0});
    CHECK(a[0] == doctest::Approx(-3.0));
    CHECK(a[1] == doctest::Approx(1.0));
    CHECK(rot.lipschitz_constant() == doctest::Approx(1.0));
    CHECK(MagneticPotential::zero(3).is_zero());
    CHECK(MagneticPotential::constant({1.0, 2.0}).lipschitz_constant() == 0.0);
    const MagneticPotential lin = MagneticPotential::linear(Matrix::from_rows({{3.0, 0.0}, {0.0, -4.0}}));
    CHECK(lin.lipschitz_constant() == doctest::Approx(4.0).epsilon(1e-12));
    // Lipschitz bound holds on random pairs
    Rng rng = make_rng(3, "lip");
    const MagneticPotential gen = MagneticPotential::linear(Matrix::from_rows({{1.0, 2.0}, {-0.5, 0.3}}));
    for (int k = 0; k < 1000; ++k) {
        const RVec x = random_point(rng, 2, 3.0);
        const RVec y = random_point(rng, 2, 3.0);
        REQUIRE(norm(gen(x) - gen(y)) <= gen.lipschitz_constant() * norm(x - y) * (1.0 + 1e-12) + 1e-15);
    }
}

TEST_CASE("psi and the magnetic gradient") {
    const FieldPtr u = modulated_gaussian_field({1.0, -0.5});
    const MagneticPotential a = MagneticPotential::rotational(1.3);
    Rng rng = make_rng(4, "psi");
    for (int k = 0; k < 200; ++k) {
        const RVec x = random_point(rng, 2, 2.0);
        const RVec y = random_point(rng, 2, 2.0);
        REQUIRE(std::abs(std::abs(psi(*u, a, x, y)) - std::abs(u->value(y))) < 1e-14);
        REQUIRE(std::abs(psi(*u, a, x, x) - u->value(x)) < 1e-15);
        REQUIRE(std::abs(psi(*u, MagneticPotential::zero(2), x, y) - u->value(y)) < 1e-15);
    }
    // (psi(x, x + h s) - u(x)) / h -> s . (grad u - i A u)(x)
    const RVec x{0.4, -0.7};
    const RVec s{0.6, 0.8};
    const CVec d = magnetic_gradient(*u, a, x);
    const complex expected = d[0] * s[0] + d[1] * s[1];
    const double h = 1e-6;
    const complex fd = (psi(*u, a, x, x + h * s) - psi(*u, a, x, x - h * s)) / (2.0 * h);
    CHECK(std::abs(fd - expected) < 1e-8);
    // A = 0 reduces to the gradient
    const CVec g = magnetic_gradient(*u, MagneticPotential::zero(2), x);
    const CVec g0 = u->gradient(x);
    CHECK(std::abs(g[0] - g0[0]) < 1e-15);
    CHECK(std::abs(g[1] - g0[1]) < 1e-15);
}

TEST_CASE("local energy closed forms") {
    const MagneticPotential zero2 = MagneticPotential::zero(2);
    // K_{2,2} int |grad u|^2 = (pi/2) pi
    const Estimate e2 = local_energy(*gaussian_field(2), zero2, ConvexBody::ball(2), 2.0);
    CHECK(e2.value == doctest::Approx(kPi * kPi / 2.0).epsilon(1e-8));
    // K_{1,2} int |grad u| = 4 * 2 pi sqrt(pi / 2)
    // (the cone |x| at the origin limits the midpoint grid; compare within its own error estimate)
    const double tv_exact = 8.0 * kPi * std::sqrt(kPi / 2.0);
    const Estimate e1 = local_energy(*gaussian_field(2), zero2, ConvexBody::ball(2), 1.0);
    CHECK(std::abs(e1.value - tv_exact) <= e1.error);
    CHECK(e1.error < 1e-3 * tv_exact);
    const Estimate e1f = local_energy(*gaussian_field(2), zero2, ConvexBody::ball(2), 1.0, GridConfig{512});
    CHECK(e1f.value == doctest::Approx(tv_exact).epsilon(1e-6));
    // cube, p = 2: ||v||^2 = (8/3) |v|^2
    const Estimate ec = local_energy(*gaussian_field(2), zero2, ConvexBody::cube(2), 2.0);
    CHECK(ec.value == doctest::Approx(8.0 * kPi / 3.0).epsilon(1e-8));
    // N = 1, K = [-1, 1]: int |u'|^2 = sqrt(pi) / 2
    const Estimate e1d = local_energy(*gaussian_field(1), MagneticPotential::zero(1), ConvexBody::ball(1), 2.0);
    CHECK(e1d.value == doctest::Approx(std::sqrt(kPi) / 2.0).epsilon(1e-8));
    // modulated Gaussian k = (1, 0) with A = (-x2, x1)/2: (pi/2)(9 pi / 4)
    const Estimate em = local_energy(*modulated_gaussian_field({1.0, 0.0}), MagneticPotential::rotational(1.0),
                                     ConvexBody::ball(2), 2.0);
    CHECK(em.value == doctest::Approx(9.0 * kPi * kPi / 8.0).epsilon(1e-8));
    CHECK(local_energy(*zero_field(2), zero2, ConvexBody::ball(2), 2.0).value == 0.0);
    CHECK_THROWS(local_energy(*indicator_field(Region::box({0.0, 0.0}, {1.0, 1.0})), zero2, ConvexBody::ball(2), 1.0));
}

TEST_CASE("total variation routes") {
    const FieldPtr u = gaussian_field(2);
    const MagneticPotential a = MagneticPotential::rotational(1.0);
    for (const ConvexBody& body : {ConvexBody::ball(2), ConvexBody::cube(2), ConvexBody::ellipsoid_axes({2.0, 1.0})}) {
        CAPTURE(body.describe());
        const Estimate split = total_variation_split(*u, a, body);
        const Estimate direct = local_energy(*u, a, body, 1.0);
        CHECK(split.value == doctest::Approx(direct.value).epsilon(1e-6));
    }
    // for real u and A = 0 the split form is the p = 1 energy itself
    const Estimate tv = total_variation_smooth(*u, MagneticPotential::zero(2), ConvexBody::cube(2));
    const Estimate sp = total_variation_split(*u, MagneticPotential::zero(2), ConvexBody::cube(2));
    CHECK(tv.value == doctest::Approx(sp.value).epsilon(1e-6));
}

TEST_CASE("anisotropic perimeter") {
    const Region sq = Region::box({0.0, 0.0}, {1.0, 1.0});
    CHECK(anisotropic_perimeter(sq, ConvexBody::ball(2)) == doctest::Approx(16.0).epsilon(1e-9));
    CHECK(anisotropic_perimeter(sq, ConvexBody::cube(2)) == doctest::Approx(24.0).epsilon(1e-9));
    // 3-D box, ball: K_{1,3} = 2 pi times surface area 6
    const Region cube3 = Region::box({0.0, 0.0, 0.0}, {1.0, 1.0, 1.0});
    CHECK(anisotropic_perimeter(cube3, ConvexBody::ball(3)) == doctest::Approx(12.0 * kPi).epsilon(1e-6));
    // triangle with the ball: 4 times the Euclidean perimeter
    const Region tri = Region::polygon({{0.0, 0.0}, {3.0, 0.0}, {0.0, 4.0}});
    CHECK(anisotropic_perimeter(tri, ConvexBody::ball(2)) == doctest::Approx(48.0).epsilon(1e-9));
    CHECK_THROWS(anisotropic_perimeter(sq, ConvexBody::ball(3)));
}

TEST_CASE("mollification") {
    const FieldPtr ind = indicator_field(Region::box({-1.0, -1.0}, {1.0, 1.0}));
    const FieldPtr m = mollify(ind, 10);
    CHECK(std::abs(m->value({0.0, 0.0}) - 1.0) < 1e-10);
    CHECK(std::abs(m->value({0.85, 0.0}) - 1.0) < 1e-10);
    CHECK(std::abs(m->value({1.15, 0.0})) < 1e-12);
    // symmetric crossing of a straight edge gives exactly one half
    CHECK(m->value({1.0, 0.0}).real() == doctest::Approx(0.5).epsilon(1e-8));
    Rng rng = make_rng(5, "moll");
    for (int k = 0; k < 500; ++k) {
        const double v = m->value(random_point(rng, 2, 1.3)).real();
        REQUIRE(v >= -1e-12);
        REQUIRE(v <= 1.0 + 1e-12);
    }
    // smooth base: tau_m * u -> u at rate 1/m^2
    const FieldPtr g = gaussian_field(2);
    const FieldPtr g40 = mollify(g, 40);
    CHECK(std::abs(g40->value({0.3, 0.2}) - g->value({0.3, 0.2})) < 1e-3);
    CHECK_THROWS(mollify(g, 0));
}

TEST_CASE("variational pairing equals the integrated-by-parts form") {
    const FieldPtr u = modulated_gaussian_field({1.0, 0.5});
    const MagneticPotential a = MagneticPotential::rotational(1.0);
    const VectorField phi({0.3, -0.2}, 1.5, {0.7, -0.4}, Matrix::from_rows({{0.2, -0.5}, {0.1, 0.3}}));
    const PairingResult pr = variational_pairing(*u, a, phi);

    // -int (grad Re u + A Im u).phi and -int (grad Im u - A Re u).phi on an independent Gauss grid
    const int n = 96;
    const GaussLegendre& gl = gauss_legendre(n);
    // support of phi: the disk of radius 1.5 around (0.3, -0.2)
    const double half = 1.5;
    double first = 0.0;
    double second = 0.0;
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const RVec x{0.3 + half * gl.nodes[i], -0.2 + half * gl.nodes[j]};
            const double w = gl.weights[i] * gl.weights[j] * half * half;
            const complex uv = u->value(x);
            const CVec g = u->gradient(x);
            const RVec ax = a(x);
            const RVec ph = phi(x);
            double d1 = 0.0;
            double d2 = 0.0;
            for (int c = 0; c < 2; ++c) {
                d1 += (g[c].real() + ax[c] * uv.imag()) * ph[c];
                d2 += (g[c].imag() - ax[c] * uv.real()) * ph[c];
            }
            first -= w * d1;
            second -= w * d2;
        }
    }
    CHECK(pr.first.value == doctest::Approx(first).epsilon(1e-6));
    CHECK(pr.second.value == doctest::Approx(second).epsilon(1e-6));
}
