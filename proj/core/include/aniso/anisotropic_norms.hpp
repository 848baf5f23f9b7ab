#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "aniso/convex_body.hpp"
#include "aniso/estimate.hpp"
#include "aniso/sphere_rule.hpp"
#include "aniso/vec.hpp"

namespace aniso {

/// |z|_p = (|Re z|^p + |Im z|^p)^{1/p} with Euclidean |.| on the coordinate vectors.
double mixed_modulus(const CVec& z, double p);
/// Scalar case (N = 1 complex vector).
double mixed_modulus(complex z, double p);
/// |z|_p^p for a complex scalar, without the final root.
inline double mixed_modulus_pow(complex z, double p) {
    if (p == 2.0) return z.real() * z.real() + z.imag() * z.imag();
    if (p == 1.0) return std::abs(z.real()) + std::abs(z.imag());
    return std::pow(std::abs(z.real()), p) + std::pow(std::abs(z.imag()), p);
}

/// K_{p,N} = (1/p) int_{S^{N-1}} |omega.x|^p dsigma, evaluated with omega = e_1
/// by one-dimensional Gauss-Legendre quadrature.
double kpn_constant(double p, int dim);

/// (1/p) int_{S^{N-1}} |omega.x|^p dsigma for an arbitrary nonzero omega, N <= 3.
/// Integrates directly on the sphere with the kink set {omega.x = 0} resolved.
double sphere_abs_moment(double p, const RVec& omega);

struct BodyMonteCarlo {
    std::size_t samples = 20000;
    std::uint64_t seed = 1;
};

struct SphereQuadrature {
    int resolution = 2048;
};

using MomentMethod = std::variant<BodyMonteCarlo, SphereQuadrature>;

/// Norm of the polar L_p-moment body,
///   ||v||_{Z*_p K} = ((N+p)/p int_K |v.x|_p^p dx)^{1/p},  v in C^N,
/// through either the body integral (Monte Carlo) or the equivalent sphere
/// integral (1/p) int |v.sigma|_p^p / ||sigma||_K^{N+p} dsigma.
class MomentNormEvaluator {
public:
    MomentNormEvaluator(ConvexBody body, double p, MomentMethod method = SphereQuadrature{});

    [[nodiscard]] const ConvexBody& body() const { return body_; }
    [[nodiscard]] double exponent() const { return p_; }
    [[nodiscard]] const MomentMethod& method() const { return method_; }
    /// (N + p) / p.
    [[nodiscard]] double normalizer() const { return normalizer_; }

    /// Dispatches on the configured method. `call_index` selects the Monte Carlo
    /// stream; equal indices reuse the same samples.
    [[nodiscard]] Estimate evaluate(const CVec& v, std::uint64_t call_index = 0) const;
    [[nodiscard]] Estimate montecarlo(const CVec& v, std::uint64_t call_index) const;
    /// Sphere route with breakpoints placed at the kinks of |v.sigma|_p (N = 2) or
    /// the polar axis along Re v (N = 3); error is the difference to the
    /// half-resolution rule.
    [[nodiscard]] Estimate sphere(const CVec& v) const;
    /// ||v||^p on the kink-resolving rule of sphere(v), without the error estimate.
    [[nodiscard]] double sphere_pow(const CVec& v) const;
    /// Sphere route with a caller-supplied rule; error against rule.coarsened().
    [[nodiscard]] Estimate sphere(const CVec& v, const SphereRule& rule) const;

    /// ||v||^p for inner loops, using ||v||^p = ||Re v||^p + ||Im v||^p.
    /// N = 2 interpolates a table of ||(cos a, sin a)||^p (kinks resolved when
    /// the table is built); N >= 3 uses the fixed rule of the body.
    [[nodiscard]] double norm_pow(const CVec& v) const;
    [[nodiscard]] double norm_pow(const RVec& v) const;
    [[nodiscard]] const SphereRule& fixed_rule() const { return fixed_rule_; }

private:
    [[nodiscard]] double sphere_pow_with(const CVec& v, const SphereRule& rule) const;
    [[nodiscard]] SphereRule adaptive_rule(const CVec& v) const;

    ConvexBody body_;
    double p_;
    MomentMethod method_;
    double normalizer_;
    int resolution_;
    SphereRule fixed_rule_;
    std::vector<double> fixed_coef_;
    std::vector<double> angle_table_;
};

/// ||.||_{Z_1* K}^* on R^N: sup{<v, w> : ||v||_{Z_1* K} <= 1}. Evaluated as the
/// maximum of <sigma, w> / ||sigma||_{Z_1* K} over directions, seeded at every
/// node of the rule and refined by pattern search on the sphere.
class DualNormEvaluator {
public:
    /// resolution <= 0 picks a per-dimension default (2048 at N = 2, 128 at N = 3).
    explicit DualNormEvaluator(const ConvexBody& body, int resolution = 0);
    DualNormEvaluator(const ConvexBody& body, const SphereRule& rule);

    [[nodiscard]] double primal(const RVec& v) const;
    [[nodiscard]] double dual(const RVec& w) const;

private:
    [[nodiscard]] double ratio(const RVec& sigma, const RVec& w) const;

    int dim_;
    std::vector<RVec> nodes_;
    std::vector<double> coef_;
    std::vector<double> node_primal_;
};

double dual_norm_z1(const ConvexBody& body, const RVec& w, const SphereRule& rule);
double dual_norm_z1(const ConvexBody& body, const CVec& w, const SphereRule& rule);

}  // namespace aniso
