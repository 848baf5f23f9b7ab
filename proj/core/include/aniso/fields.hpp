#pragma once

#include <memory>
#include <string>
#include <variant>
#include <vector>

#include "aniso/convex_body.hpp"
#include "aniso/estimate.hpp"
#include "aniso/vec.hpp"

namespace aniso {

/// Axis-aligned box [lo, hi].
struct AxisBox {
    RVec lo;
    RVec hi;
};

/// Bounded convex region E used by indicator fields: an axis-aligned box in
/// any dimension or a convex polygon in the plane.
class Region {
public:
    struct Facet {
        RVec normal;  ///< outward unit normal
        double measure = 0.0;
        RVec a;  ///< planar polygons: edge endpoints (counter-clockwise)
        RVec b;
    };

    static Region box(const RVec& lo, const RVec& hi);
    /// Convex polygon; vertices may be given in either orientation.
    static Region polygon(std::vector<RVec> vertices);

    [[nodiscard]] int dimension() const { return dim_; }
    [[nodiscard]] bool is_box() const { return is_box_; }
    [[nodiscard]] bool contains(const RVec& x) const;
    /// Lebesgue measure |E|.
    [[nodiscard]] double measure() const { return measure_; }
    [[nodiscard]] const std::vector<Facet>& facets() const { return facets_; }
    [[nodiscard]] AxisBox bounds() const { return bounds_; }
    /// Counter-clockwise vertices of planar regions (boxes included).
    [[nodiscard]] const std::vector<RVec>& vertices() const { return vertices_; }
    /// |E cap (E + z)|.
    [[nodiscard]] double covariogram(const RVec& z) const;
    /// Parameters t0 <= t1 with x + t sigma in E exactly for t in [t0, t1];
    /// returns false when the line misses E.
    [[nodiscard]] bool chord(const RVec& x, const RVec& sigma, double& t0, double& t1) const;
    /// Euclidean distance from x to the boundary of E.
    [[nodiscard]] double boundary_distance(const RVec& x) const;
    [[nodiscard]] std::string describe() const;

private:
    int dim_ = 0;
    bool is_box_ = false;
    double measure_ = 0.0;
    AxisBox bounds_;
    std::vector<Facet> facets_;
    std::vector<RVec> vertices_;
};

enum class Smoothness { smooth, indicator };

/// Complex scalar field u: R^N -> C with an analytic gradient. Implementations
/// are immutable and safe to evaluate concurrently.
class ComplexField {
public:
    virtual ~ComplexField() = default;

    [[nodiscard]] int dimension() const { return dim_; }
    [[nodiscard]] virtual complex value(const RVec& x) const = 0;
    /// Throws std::domain_error for indicator fields.
    [[nodiscard]] virtual CVec gradient(const RVec& x) const = 0;
    /// u and its gradient vanish (or are below 1e-16) outside this ball.
    [[nodiscard]] virtual double support_radius() const = 0;
    /// Box containing the support; defaults to the cube around the support ball.
    [[nodiscard]] virtual AxisBox support_box() const;
    /// Length scale a grid must resolve.
    [[nodiscard]] virtual double feature_scale() const { return 1.0; }
    [[nodiscard]] virtual Smoothness smoothness() const { return Smoothness::smooth; }
    /// Region and amplitude of indicator fields; nullptr otherwise.
    [[nodiscard]] virtual const Region* region() const { return nullptr; }
    [[nodiscard]] virtual double amplitude() const { return 1.0; }
    [[nodiscard]] virtual bool is_zero() const { return false; }
    [[nodiscard]] virtual std::string describe() const = 0;

protected:
    explicit ComplexField(int dim);

private:
    int dim_;
};

using FieldPtr = std::shared_ptr<const ComplexField>;

FieldPtr zero_field(int dim);
/// e^{-|x|^2/2}, treated as supported in |x| <= 8.6.
FieldPtr gaussian_field(int dim);
/// e^{i k.x} e^{-|x|^2/2}.
FieldPtr modulated_gaussian_field(const RVec& k);
/// exp(1 - 1/(1 - |x|^2)) on |x| < 1.
FieldPtr bump_field(int dim);
/// amplitude * 1_E.
FieldPtr indicator_field(const Region& region, double amplitude = 1.0);
/// tau_m * u with tau_m the normalized bump of radius 1/m. Indicators are
/// supported for planar regions and intervals.
FieldPtr mollify(const FieldPtr& u, int m);

/// A(x) = a + B x on R^N.
class MagneticPotential {
public:
    static MagneticPotential zero(int dim);
    static MagneticPotential constant(const RVec& a);
    static MagneticPotential linear(const Matrix& b);
    /// (b/2)(-x_2, x_1) in the plane.
    static MagneticPotential rotational(double b);

    [[nodiscard]] int dimension() const { return dim_; }
    [[nodiscard]] RVec operator()(const RVec& x) const;
    /// Spectral norm of B.
    [[nodiscard]] double lipschitz_constant() const { return lipschitz_; }
    [[nodiscard]] bool is_zero() const { return zero_; }
    [[nodiscard]] std::string describe() const { return description_; }

private:
    MagneticPotential(RVec a, Matrix b, std::string description);

    int dim_ = 0;
    RVec a_;
    Matrix b_;
    double lipschitz_ = 0.0;
    bool zero_ = true;
    std::string description_;
};

/// Compactly supported smooth real vector field with analytic divergence.
class VectorField {
public:
    /// beta(|x - c|/r) (w0 + W (x - c)) with beta(t) = exp(1 - 1/(1 - t^2)).
    VectorField(RVec center, double radius, RVec w0, Matrix w);

    [[nodiscard]] int dimension() const { return center_.size(); }
    [[nodiscard]] RVec operator()(const RVec& x) const;
    [[nodiscard]] double divergence(const RVec& x) const;
    [[nodiscard]] AxisBox support_box() const;
    [[nodiscard]] VectorField scaled(double factor) const;
    /// True when W = 0, so phi(x) is a nonnegative multiple of w0.
    [[nodiscard]] bool constant_direction() const;
    [[nodiscard]] const RVec& direction() const { return w0_; }
    /// max_x |phi(x)| bound: |w0| + ||W|| r.
    [[nodiscard]] double magnitude_bound() const;

private:
    RVec center_;
    double radius_;
    RVec w0_;
    Matrix w_;
};

/// Midpoint tensor grid over the support box of the integrand. Zero picks a
/// resolution from the field's feature scale.
struct GridConfig {
    int nodes_per_axis = 0;
    int sphere_resolution = 2048;
    int threads = 1;
};

/// e^{i (x - y).A((x + y)/2)} u(y).
complex psi(const ComplexField& u, const MagneticPotential& a, const RVec& x, const RVec& y);

/// grad u(x) - i A(x) u(x).
CVec magnetic_gradient(const ComplexField& u, const MagneticPotential& a, const RVec& x);

/// int ||grad u - i A u||^p_{Z*_p K} dx; error is |fine - half-resolution|.
Estimate local_energy(const ComplexField& u, const MagneticPotential& a, const ConvexBody& body, double p,
                      const GridConfig& grid = {});

/// local_energy at p = 1.
Estimate total_variation_smooth(const ComplexField& u, const MagneticPotential& a, const ConvexBody& body,
                                const GridConfig& grid = {});

/// int ||grad Re u + A Im u|| + ||grad Im u - A Re u|| dx with norms of Z_1* K,
/// each evaluated by the kink-resolving sphere quadrature (independent of the
/// table interpolation used by local_energy).
Estimate total_variation_split(const ComplexField& u, const MagneticPotential& a, const ConvexBody& body,
                               const GridConfig& grid = {});

/// sum over facets of measure(F) ||nu_F||_{Z_1* K}.
double anisotropic_perimeter(const Region& region, const ConvexBody& body);

struct PairingResult {
    Estimate first;   ///< int Re u div phi - A.phi Im u dx
    Estimate second;  ///< int Im u div phi + A.phi Re u dx
};

PairingResult variational_pairing(const ComplexField& u, const MagneticPotential& a, const VectorField& phi,
                                  const GridConfig& grid = {});

/// Grid over `box` with the requested nodes per axis (even, >= 2).
struct BoxGrid {
    AxisBox box;
    int nodes_per_axis = 0;

    [[nodiscard]] std::vector<RVec> nodes() const;
    [[nodiscard]] double cell_volume() const;
    [[nodiscard]] BoxGrid coarsened() const;
};

/// Default resolution for a field: about eight nodes per feature length,
/// capped per dimension.
int default_nodes_per_axis(const AxisBox& box, double feature_scale);

}  // namespace aniso
