#pragma once

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "aniso/vec.hpp"

namespace aniso {

struct EuclideanBall {
    double radius = 1.0;
};

/// {x : x.Mx <= 1} for symmetric positive-definite M.
struct Ellipsoid {
    Matrix m;
};

/// {x : n_i.x <= c_i for all i}; facets come in (n, c), (-n, c) pairs and the
/// normals are stored with unit length.
struct SymmetricPolytope {
    std::vector<RVec> normals;
    std::vector<double> offsets;
};

/// Unit ball of the l_q norm, q in [1, inf]; q = inf is the cube [-1, 1]^N.
struct LqBall {
    double q = 2.0;
};

using BodyShape = std::variant<EuclideanBall, Ellipsoid, SymmetricPolytope, LqBall>;

struct BoundingRadii {
    double inner = 0.0;
    double outer = 0.0;
};

/// Origin-symmetric convex body K in R^N with a closed-form gauge
/// ||x||_K = inf{t > 0 : x/t in K}. Immutable after construction.
class ConvexBody {
public:
    static ConvexBody ball(int dim, double radius = 1.0);
    static ConvexBody ellipsoid(const Matrix& m);
    static ConvexBody ellipsoid_axes(const RVec& semi_axes);
    /// Validates central symmetry; general polytopes are limited to N <= 2,
    /// for N >= 3 the facets must form a parallelotope.
    static ConvexBody polytope(std::vector<RVec> normals, std::vector<double> offsets);
    static ConvexBody cube(int dim, double half_side = 1.0);
    /// Regular polygon with an even number of sides and the given inradius.
    static ConvexBody regular_polygon(int sides, double inradius = 1.0);
    static ConvexBody lq_ball(int dim, double q);

    [[nodiscard]] int dimension() const { return dim_; }
    [[nodiscard]] const BodyShape& shape() const { return shape_; }
    [[nodiscard]] std::string describe() const;

    [[nodiscard]] double gauge(const RVec& x) const;
    /// Exact shape membership; the boundary counts as inside.
    [[nodiscard]] bool contains(const RVec& x) const;
    [[nodiscard]] BoundingRadii bounding_radii() const { return radii_; }
    [[nodiscard]] double volume() const { return volume_; }

    /// Directions (angles in [0, 2pi)) where the gauge restricted to the circle
    /// is not smooth. Empty unless the body is a planar polytope or l_1/l_inf ball.
    [[nodiscard]] const std::vector<double>& kink_angles() const { return kinks_; }

    /// Uniform points in K by rejection from the circumscribed ball; at most
    /// 10^4 attempts per point.
    [[nodiscard]] std::vector<RVec> sample_uniform(std::size_t count, std::uint64_t seed) const;

    /// Polygon vertices (counter-clockwise) for planar polytopes, else empty.
    [[nodiscard]] const std::vector<RVec>& vertices() const { return vertices_; }

private:
    ConvexBody(int dim, BodyShape shape);
    void finalize();

    int dim_ = 0;
    BodyShape shape_;
    BoundingRadii radii_;
    double volume_ = 0.0;
    std::vector<double> kinks_;
    std::vector<RVec> vertices_;
};

}  // namespace aniso
