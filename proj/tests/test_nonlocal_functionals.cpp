#include <cmath>
#include <functional>
#include <vector>

#include "aniso/fields.hpp"
#include "aniso/nonlocal_functionals.hpp"
#include "aniso/quadrature.hpp"
#include "aniso/random.hpp"
#include "doctest.h"

using namespace aniso;

namespace {

IntegrationBudget tensor_budget(int nodes) {
    IntegrationBudget b;
    b.outer = OuterScheme::tensor_grid;
    b.outer_nodes = nodes;
    return b;
}

// int_{S^1} f(sigma) dsigma by Gauss-Legendre on eighths of the circle, so
// kinks of polygonal gauges at multiples of pi/4 fall on panel ends.
double circle_integral(const std::function<double(const RVec&)>& f) {
    double s = 0.0;
    for (int k = 0; k < 8; ++k) {
        s += integrate_gl([&](double th) { return f(RVec{std::cos(th), std::sin(th)}); }, k * kPi / 4.0,
                          (k + 1) * kPi / 4.0, 64);
    }
    return s;
}

// Raw Gagliardo seminorm of e^{-|x|^2/2} in the plane, p = 2. With
// int_x |u(x+z) - u(x)|^2 dx = 2 pi (1 - e^{-|z|^2/4}) the double integral
// factorizes into (int_S ||s||_K^{-2-2s}) * int_0^inf 2 pi (1 - e^{-r^2/4}) r^{-1-2s} dr,
// and the radial factor is pi 2^{-2s} Gamma(1 - s) / s.
double gaussian_gagliardo_oracle(const ConvexBody& body, double s) {
    const double angular = circle_integral([&](const RVec& sg) { return std::pow(body.gauge(sg), -2.0 - 2.0 * s); });
    const double radial = kPi * std::pow(2.0, -2.0 * s) * std::tgamma(1.0 - s) / s;
    return angular * radial;
}

// Shrinking-uniform BBM value of the unit-square indicator at p = 1 from its
// covariogram: |E| - |E cap (E+z)| = |z1| + |z2| - |z1 z2| for |z_i| <= 1.
double square_bbm_oracle(const ConvexBody& body, int n) {
    return circle_integral([&](const RVec& sg) {
        const double g = body.gauge(sg);
        const double a = std::abs(sg[0]) + std::abs(sg[1]);
        const double b = std::abs(sg[0] * sg[1]);
        return 2.0 * a / (g * g * g) - 4.0 / (3.0 * n) * b / (g * g * g * g);
    });
}

// Direct Monte Carlo over (x, y) in R^2 x R^2 for a symmetric integrand F.
// Only pairs with |x| < |y| are sampled (doubling the result); x is Gaussian,
// y = x + r sigma with r drawn from a two-piece power law around r0.
struct RadialLaw {
    double alpha;   // density ~ r^{alpha - 1} on (0, r0)
    double r0;
    double beta;    // density ~ r^{-1 - beta} on (r0, inf)
    double inner;   // probability of the inner piece
};

Estimate direct_montecarlo(const std::function<double(const RVec&, const RVec&)>& f, const RadialLaw& law,
                           std::size_t samples, std::uint64_t seed) {
    Rng rng = make_rng(seed, "direct-mc");
    double sum = 0.0;
    double sum2 = 0.0;
    for (std::size_t k = 0; k < samples; ++k) {
        const RVec x{standard_normal(rng), standard_normal(rng)};
        const double qx = std::exp(-0.5 * dot(x, x)) / (2.0 * kPi);
        const double th = 2.0 * kPi * uniform01(rng);
        double r = 0.0;
        if (uniform01(rng) < law.inner) {
            r = law.r0 * std::pow(1.0 - uniform01(rng), 1.0 / law.alpha);
        } else {
            r = law.r0 * std::pow(1.0 - uniform01(rng), -1.0 / law.beta);
        }
        const double qr = r < law.r0 ? law.inner * law.alpha * std::pow(r / law.r0, law.alpha - 1.0) / law.r0
                                     : (1.0 - law.inner) * law.beta * std::pow(r / law.r0, -1.0 - law.beta) / law.r0;
        double w = 0.0;
        const RVec y = x + r * RVec{std::cos(th), std::sin(th)};
        if (dot(y, y) > dot(x, x) && qr > 0.0) w = 2.0 * f(x, y) * r * 2.0 * kPi / (qr * qx);
        sum += w;
        sum2 += w * w;
    }
    const double n = static_cast<double>(samples);
    const double mean = sum / n;
    return {mean, std::sqrt(std::max(0.0, sum2 / n - mean * mean) / (n - 1.0))};
}

}  // namespace

TEST_CASE("mollifier families") {
    for (int dim : {1, 2, 3}) {
        for (double p : {1.0, 2.0, 3.0}) {
            const MollifierFamily lud = MollifierFamily::ludwig(p, dim);
            const MollifierFamily shr = MollifierFamily::shrinking_uniform(p, dim);
            for (int n : {2, 4, 16, 64}) {
                CHECK(lud.normalization(n) == doctest::Approx(1.0).epsilon(1e-10));
                CHECK(shr.normalization(n) == doctest::Approx(1.0).epsilon(1e-10));
                // normalization against direct quadrature of rho_n r^{N-1}
                const double direct = integrate_gl([&](double r) { return shr.rho(n, r) * std::pow(r, dim - 1); },
                                                   0.0, 1.0 / n, 8);
                CHECK(direct == doctest::Approx(1.0).epsilon(1e-12));
            }
            for (double delta : {0.1, 0.5, 1.0}) {
                double prev_l = INFINITY;
                double prev_s = INFINITY;
                for (int n : {2, 4, 8, 16, 32, 64}) {
                    const double tl = lud.tail_integral(n, delta);
                    const double ts = shr.tail_integral(n, delta);
                    const double s = 1.0 - 1.0 / n;
                    CHECK(tl == doctest::Approx((1.0 - s) / s * std::pow(delta, -p * s)).epsilon(1e-12));
                    // (1-s)/s delta^{-ps} decreases in n once n > p ln(1/delta);
                    // the shrinking tail vanishes once 1/n <= delta
                    if (n / 2 > p * std::log(1.0 / delta)) CHECK(tl <= prev_l);
                    if (1.0 / n <= delta) {
                        CHECK(ts == 0.0);
                        CHECK(ts <= prev_s);
                    }
                    prev_l = tl;
                    prev_s = ts;
                }
                CHECK(lud.tail_integral(100000, delta) < 1e-4 * std::pow(delta, -p));
            }
        }
    }
    const MollifierFamily lud = MollifierFamily::ludwig(2.0, 2);
    CHECK(lud.s_of(4) == doctest::Approx(0.75));
    CHECK(lud.rho(4, 0.5) == doctest::Approx(2.0 * 0.25 * std::pow(0.5, 2.0 - 2.0 - 1.5)).epsilon(1e-14));
    CHECK_THROWS((void)lud.rho(0, 0.5));
}

TEST_CASE("specification validation") {
    const ConvexBody ball = ConvexBody::ball(2);
    const MagneticPotential rot = MagneticPotential::rotational(1.0);
    CHECK_THROWS(FunctionalSpec::gagliardo(ball, 2.0, 1.0).validate());
    CHECK_THROWS(FunctionalSpec::gagliardo(ball, 2.0, 0.0).validate());
    CHECK_THROWS(FunctionalSpec::gagliardo(ball, 2.0, 0.5, rot).validate());
    CHECK_THROWS(FunctionalSpec::gagliardo(ball, 0.5, 0.5).validate());
    CHECK_THROWS(FunctionalSpec::nguyen(ball, 2.0, 0.0, rot).validate());
    CHECK_THROWS(FunctionalSpec::nguyen(ball, 2.0, -1.0, rot).validate());
    CHECK_THROWS(FunctionalSpec::bbm(ball, 2.0, MollifierFamily::shrinking_uniform(2.0, 3), 4, rot).validate());
    CHECK_THROWS(FunctionalSpec::bbm(ball, 2.0, MollifierFamily::shrinking_uniform(2.0, 2), 0, rot).validate());
    CHECK_NOTHROW(FunctionalSpec::bbm(ball, 2.0, MollifierFamily::ludwig(2.0, 2), 4, rot).validate());

    const FieldPtr ind = indicator_field(Region::box({0.0, 0.0}, {1.0, 1.0}));
    const auto fam = MollifierFamily::shrinking_uniform(2.0, 2);
    CHECK_THROWS(nguyen(*ind, FunctionalSpec::nguyen(ball, 2.0, 0.1, MagneticPotential::zero(2))));
    CHECK_THROWS(bbm(*ind, FunctionalSpec::bbm(ball, 2.0, fam, 4, MagneticPotential::zero(2))));
    CHECK_THROWS(bbm(*ind, FunctionalSpec::bbm(ball, 1.0, MollifierFamily::shrinking_uniform(1.0, 2), 4, rot)));
    // field and body dimensions must agree
    CHECK_THROWS(gagliardo(*gaussian_field(3), FunctionalSpec::gagliardo(ball, 2.0, 0.5)));
}

TEST_CASE("zero field") {
    const ConvexBody ball = ConvexBody::ball(2);
    const MagneticPotential rot = MagneticPotential::rotational(1.0);
    const FieldPtr z = zero_field(2);
    CHECK(gagliardo(*z, FunctionalSpec::gagliardo(ball, 2.0, 0.5)).value == 0.0);
    CHECK(nguyen(*z, FunctionalSpec::nguyen(ball, 2.0, 0.1, rot)).value == 0.0);
    CHECK(bbm(*z, FunctionalSpec::bbm(ball, 2.0, MollifierFamily::shrinking_uniform(2.0, 2), 8, rot)).value == 0.0);
}

TEST_CASE("gagliardo matches the Gaussian closed form") {
    for (const ConvexBody& body : {ConvexBody::ball(2), ConvexBody::ellipsoid_axes({2.0, 1.0}), ConvexBody::cube(2)}) {
        for (double s : {0.5, 0.9}) {
            CAPTURE(body.describe());
            CAPTURE(s);
            const double exact = gaussian_gagliardo_oracle(body, s);
            const FunctionalResult r = gagliardo(*gaussian_field(2), FunctionalSpec::gagliardo(body, 2.0, s));
            CHECK(r.error > 0.0);
            CHECK(std::abs(r.value - exact) <= 3.0 * r.error);
            CHECK(std::abs(r.value - exact) <= 1e-3 * exact);
        }
    }
}

TEST_CASE("gagliardo N = 1: tensor grid and Monte Carlo agree") {
    const FunctionalSpec spec = FunctionalSpec::gagliardo(ConvexBody::ball(1), 2.0, 0.5);
    const FieldPtr u = gaussian_field(1);
    const FunctionalResult t = gagliardo(*u, spec);
    IntegrationBudget mc;
    mc.outer = OuterScheme::montecarlo;
    mc.samples = 20000;
    mc.seed = 3;
    const FunctionalResult m = gagliardo(*u, spec, mc);
    CHECK(m.error > 0.0);
    CHECK(std::abs(t.value - m.value) <= 3.0 * std::hypot(t.error, m.error));
    // 1-D closed form: int_x |u(x+z) - u(x)|^2 dx = 2 sqrt(pi) (1 - e^{-z^2/4}) and
    // int_0^inf (1 - e^{-r^2/4}) r^{-2} dr = sqrt(pi) / 2, so the value is 2 pi
    CHECK(std::abs(t.value - 2.0 * kPi) <= 3.0 * t.error);
    CHECK(std::abs(m.value - 2.0 * kPi) <= 3.0 * m.error);
}

TEST_CASE("body monotonicity: ball inside cube") {
    // B subset [-1,1]^2, so ||z||_B >= ||z||_cube and the ball integrand is smaller
    const FieldPtr u = gaussian_field(2);
    const IntegrationBudget b = tensor_budget(24);
    for (double s : {0.3, 0.7}) {
        const double vb = gagliardo(*u, FunctionalSpec::gagliardo(ConvexBody::ball(2), 2.0, s), b).value;
        const double vc = gagliardo(*u, FunctionalSpec::gagliardo(ConvexBody::cube(2), 2.0, s), b).value;
        const double vs = gagliardo(*u, FunctionalSpec::gagliardo(ConvexBody::ball(2, 0.5), 2.0, s), b).value;
        CHECK(vb <= vc);
        CHECK(vs <= vb);
    }
}

TEST_CASE("direct Monte Carlo over (x, y) agrees with the spherical decomposition") {
    const FieldPtr gauss = gaussian_field(2);
    const FieldPtr mod = modulated_gaussian_field({1.0, 0.5});
    const MagneticPotential rot = MagneticPotential::rotational(1.0);
    const ConvexBody ell = ConvexBody::ellipsoid_axes({2.0, 1.0});
    const IntegrationBudget budget = tensor_budget(32);
    const std::size_t samples = 400000;

    SUBCASE("gagliardo") {
        const double s = 0.5;
        const FunctionalResult r = gagliardo(*gauss, FunctionalSpec::gagliardo(ell, 2.0, s), budget);
        const Estimate d = direct_montecarlo(
            [&](const RVec& x, const RVec& y) {
                return std::norm(gauss->value(x) - gauss->value(y)) / std::pow(ell.gauge(y - x), 2.0 + 2.0 * s);
            },
            {1.0, 1.0, 1.0, 0.5}, samples, 1);
        CHECK(std::abs(r.value - d.value) <= 3.0 * std::hypot(r.error, d.error));
        CHECK(d.error < 0.02 * d.value);
    }
    SUBCASE("nguyen") {
        const double delta = 0.1;
        const FunctionalResult r = nguyen(*mod, FunctionalSpec::nguyen(ell, 2.0, delta, rot), budget);
        const Estimate d = direct_montecarlo(
            [&](const RVec& x, const RVec& y) {
                if (std::abs(psi(*mod, rot, x, y) - mod->value(x)) <= delta) return 0.0;
                return delta * delta / std::pow(ell.gauge(y - x), 4.0);
            },
            {1.0, delta, 2.0, 0.5}, samples, 2);
        CHECK(std::abs(r.value - d.value) <= 3.0 * std::hypot(r.error, d.error));
        CHECK(d.error < 0.02 * d.value);
    }
    SUBCASE("bbm") {
        const int n = 4;
        const auto fam = MollifierFamily::shrinking_uniform(2.0, 2);
        const FunctionalResult r = bbm(*mod, FunctionalSpec::bbm(ell, 2.0, fam, n, rot), budget);
        const double rmax = ell.bounding_radii().outer / n;
        const Estimate d = direct_montecarlo(
            [&](const RVec& x, const RVec& y) {
                const double g = ell.gauge(y - x);
                return std::norm(psi(*mod, rot, x, y) - mod->value(x)) / (g * g) * fam.rho(n, g);
            },
            {2.0, rmax, 1.0, 1.0}, samples, 3);
        CHECK(std::abs(r.value - d.value) <= 3.0 * std::hypot(r.error, d.error));
        CHECK(d.error < 0.02 * d.value);
    }
}

TEST_CASE("nguyen: superlevel measure shrinks with delta") {
    const FieldPtr u = modulated_gaussian_field({1.0, 0.0});
    const MagneticPotential rot = MagneticPotential::rotational(1.0);
    const IntegrationBudget b = tensor_budget(16);
    double prev = INFINITY;
    for (double delta : {0.05, 0.1, 0.2, 0.4}) {
        const FunctionalResult r = nguyen(*u, FunctionalSpec::nguyen(ConvexBody::ball(2), 2.0, delta, rot), b);
        const double raw = r.value / (delta * delta);
        CHECK(raw <= prev);
        prev = raw;
    }
    const FunctionalResult p1 =
        nguyen(*gaussian_field(2), FunctionalSpec::nguyen(ConvexBody::ball(2), 1.0, 0.1, MagneticPotential::zero(2)), b);
    CHECK(p1.lower_bound_only);
    const FunctionalResult p2 = nguyen(*u, FunctionalSpec::nguyen(ConvexBody::ball(2), 2.0, 0.1, rot), b);
    CHECK_FALSE(p2.lower_bound_only);
}

TEST_CASE("bbm with the ludwig family is p (1 - s_n) times gagliardo") {
    const IntegrationBudget b = tensor_budget(12);
    const MagneticPotential zero = MagneticPotential::zero(2);
    for (const ConvexBody& body : {ConvexBody::ball(2), ConvexBody::ellipsoid_axes({2.0, 1.0})}) {
        for (int n : {3, 10}) {
            const auto fam = MollifierFamily::ludwig(2.0, 2);
            const double s = fam.s_of(n);
            const double vb = bbm(*gaussian_field(2), FunctionalSpec::bbm(body, 2.0, fam, n, zero), b).value;
            const double vg = gagliardo(*gaussian_field(2), FunctionalSpec::gagliardo(body, 2.0, s), b).value;
            CHECK(vb == doctest::Approx(2.0 * (1.0 - s) * vg).epsilon(1e-10));
        }
    }
}

TEST_CASE("bbm shrinking family near its limit on the ellipse") {
    const FieldPtr u = gaussian_field(2);
    const MagneticPotential rot = MagneticPotential::rotational(1.0);
    const ConvexBody ell = ConvexBody::ellipsoid_axes({2.0, 1.0});
    const auto fam = MollifierFamily::shrinking_uniform(2.0, 2);
    const FunctionalResult r = bbm(*u, FunctionalSpec::bbm(ell, 2.0, fam, 64, rot));
    const Estimate target = local_energy(*u, rot, ell, 2.0);
    CHECK(std::abs(r.value - 2.0 * target.value) <= 3.0 * std::hypot(r.error, 2.0 * target.error));
}

TEST_CASE("indicator route: unit square against its covariogram") {
    const FieldPtr sq = indicator_field(Region::box({0.0, 0.0}, {1.0, 1.0}));
    const MagneticPotential zero = MagneticPotential::zero(2);
    for (const ConvexBody& body : {ConvexBody::ball(2), ConvexBody::cube(2), ConvexBody::ellipsoid_axes({2.0, 1.0})}) {
        for (int n : {2, 4, 16, 64}) {
            CAPTURE(body.describe());
            CAPTURE(n);
            const auto fam = MollifierFamily::shrinking_uniform(1.0, 2);
            const FunctionalResult r = bbm(*sq, FunctionalSpec::bbm(body, 1.0, fam, n, zero));
            CHECK(r.value == doctest::Approx(square_bbm_oracle(body, n)).epsilon(1e-8));
        }
    }
    // the disk case in closed form
    const auto fam = MollifierFamily::shrinking_uniform(1.0, 2);
    CHECK(bbm(*sq, FunctionalSpec::bbm(ConvexBody::ball(2), 1.0, fam, 8, zero)).value ==
          doctest::Approx(16.0 - 8.0 / 24.0).epsilon(1e-9));
}

TEST_CASE("results do not depend on the thread count") {
    const FieldPtr u = modulated_gaussian_field({1.0, 0.0});
    const MagneticPotential rot = MagneticPotential::rotational(1.0);
    const FunctionalSpec spec = FunctionalSpec::nguyen(ConvexBody::cube(2), 2.0, 0.1, rot);
    IntegrationBudget b = tensor_budget(12);
    IntegrationBudget b3 = b;
    b3.threads = 3;
    const FunctionalResult a = nguyen(*u, spec, b);
    const FunctionalResult c = nguyen(*u, spec, b3);
    CHECK(a.value == c.value);
    CHECK(a.error == c.error);

    IntegrationBudget m;
    m.outer = OuterScheme::montecarlo;
    m.samples = 512;
    IntegrationBudget m3 = m;
    m3.threads = 3;
    const FunctionalResult x = nguyen(*u, spec, m);
    const FunctionalResult y = nguyen(*u, spec, m3);
    CHECK(x.value == y.value);
    CHECK(x.error == y.error);
    IntegrationBudget other = m;
    other.seed = 99;
    CHECK(nguyen(*u, spec, other).value != x.value);
}
