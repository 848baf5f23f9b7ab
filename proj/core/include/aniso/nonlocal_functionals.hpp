#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>

#include "aniso/convex_body.hpp"
#include "aniso/estimate.hpp"
#include "aniso/fields.hpp"

namespace aniso {

enum class FunctionalKind { gagliardo, nguyen, bbm };
enum class MollifierKind { ludwig, shrinking_uniform };

const char* to_string(FunctionalKind kind);
const char* to_string(MollifierKind kind);

/// Radial mollifiers rho_n on [0, inf).
///   ludwig:            rho_n(r) = p (1 - s_n) r^{p - N - p s_n},  s_n = 1 - 1/n
///   shrinking_uniform: rho_n(r) = N n^N 1_{[0, 1/n]}(r)
class MollifierFamily {
public:
    static MollifierFamily ludwig(double p, int dim);
    static MollifierFamily shrinking_uniform(double p, int dim);

    [[nodiscard]] MollifierKind kind() const { return kind_; }
    [[nodiscard]] double exponent() const { return p_; }
    [[nodiscard]] int dimension() const { return dim_; }

    /// s_n for the ludwig family (n >= 2).
    [[nodiscard]] double s_of(int n) const;
    [[nodiscard]] double rho(int n, double r) const;
    /// int_0^r rho_n(t) t^{N-1} dt.
    [[nodiscard]] double mass(int n, double r) const;
    /// mass(n, 1); equals 1 for both families.
    [[nodiscard]] double normalization(int n) const { return mass(n, 1.0); }
    /// int_a^b rho_n(r) r^{N-1-p} dr, b may be infinite.
    [[nodiscard]] double tail_integral(int n, double a, double b = std::numeric_limits<double>::infinity()) const;
    /// End of the support of rho_n (infinite for ludwig).
    [[nodiscard]] double support_end(int n) const;
    [[nodiscard]] std::string describe() const;

private:
    MollifierFamily(MollifierKind kind, double p, int dim);
    void check_index(int n) const;

    MollifierKind kind_;
    double p_;
    int dim_;
};

/// One nonlocal functional with its parameters.
struct FunctionalSpec {
    FunctionalKind kind = FunctionalKind::gagliardo;
    double p = 2.0;
    ConvexBody body = ConvexBody::ball(2);
    MagneticPotential potential = MagneticPotential::zero(2);
    double s = 0.0;      ///< gagliardo
    double delta = 0.0;  ///< nguyen
    std::optional<MollifierFamily> family;  ///< bbm
    int n = 0;                              ///< bbm

    static FunctionalSpec gagliardo(const ConvexBody& body, double p, double s);
    /// Rejected later by validate() when the potential is nonzero.
    static FunctionalSpec gagliardo(const ConvexBody& body, double p, double s, const MagneticPotential& a);
    static FunctionalSpec nguyen(const ConvexBody& body, double p, double delta, const MagneticPotential& a);
    static FunctionalSpec bbm(const ConvexBody& body, double p, const MollifierFamily& family, int n,
                              const MagneticPotential& a);

    /// Throws std::invalid_argument on out-of-range parameters or incompatible
    /// potential/mollifier dimensions.
    void validate() const;
    /// s, delta or n as a real number.
    [[nodiscard]] double parameter() const;
    [[nodiscard]] std::string describe() const;
};

enum class OuterScheme { tensor_grid, montecarlo };

/// Quadrature budget for the x / sigma / h decomposition.
struct IntegrationBudget {
    OuterScheme outer = OuterScheme::tensor_grid;
    /// Tensor nodes per axis across the interior ball; 0 picks a per-dimension default.
    int outer_nodes = 0;
    /// Monte Carlo points for each of the two outer integrals.
    std::size_t samples = 4096;
    std::uint64_t seed = 1;
    int sphere_resolution = 128;
    /// Place sphere-rule panel breaks at the body's gauge kinks (N = 2).
    bool body_adapted_sphere = true;
    /// Geometric ratio of the radial grid; spacing is capped by a quarter of
    /// the field's feature length.
    double grading_ratio = 1.05;
    /// h_min = h_min_factor * support radius.
    double h_min_factor = 1e-6;
    /// Gauss-Legendre nodes for bounded radial pieces.
    int radial_nodes = 24;
    /// Tensor schemes also evaluate the half budget to report |fine - coarse|.
    bool estimate_error = true;
    int threads = 1;

    [[nodiscard]] IntegrationBudget coarsened() const;
};

struct FunctionalResult {
    double value = 0.0;
    double error = 0.0;
    /// p = 1 Nguyen values only bound the local energy from below.
    bool lower_bound_only = false;
    std::string route;

    [[nodiscard]] Estimate estimate() const { return {value, error}; }
};

/// Raw double integral int int |u(x) - u(y)|^p / ||x - y||_K^{N+ps} dx dy (no (1 - s) factor).
FunctionalResult gagliardo(const ComplexField& u, const FunctionalSpec& spec, const IntegrationBudget& budget = {});
/// I_delta^K(u) = int int delta^p ||x - y||_K^{-(N+p)} 1{|Psi_u(x,y) - Psi_u(x,x)|_p > delta} dx dy.
FunctionalResult nguyen(const ComplexField& u, const FunctionalSpec& spec, const IntegrationBudget& budget = {});
/// int int |Psi_u(x,y) - Psi_u(x,x)|_p^p / ||x - y||_K^p rho_n(||x - y||_K) dx dy.
FunctionalResult bbm(const ComplexField& u, const FunctionalSpec& spec, const IntegrationBudget& budget = {});
/// Dispatches on spec.kind.
FunctionalResult evaluate_functional(const ComplexField& u, const FunctionalSpec& spec,
                                     const IntegrationBudget& budget = {});

}  // namespace aniso
