#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "aniso/convex_body.hpp"
#include "aniso/vec.hpp"

namespace aniso {

/// Recipe for a quadrature rule on S^{N-1}. Keeping the recipe lets callers
/// rebuild the same rule at half resolution for error estimates.
struct SphereRuleSpec {
    int dim = 2;
    /// N = 2: total node count. N = 3: azimuthal node count (polar count is half).
    /// N >= 4: Monte Carlo node count is resolution^2 / 2.
    int resolution = 2048;
    /// N = 2 only: angles where the integrand may have a kink; arcs between
    /// consecutive break angles get their own Gauss-Legendre panel.
    std::vector<double> break_angles;
    /// N = 3 only: polar axis of the product rule; the polar angle is split at
    /// the equator of this axis.
    std::optional<RVec> pole;
    std::uint64_t seed = 0x5eed;
};

/// Nodes and positive weights on the unit sphere; weights sum to |S^{N-1}|.
class SphereRule {
public:
    static SphereRule build(const SphereRuleSpec& spec);
    /// Default rule for integrands whose only kinks come from the gauge of `body`.
    static SphereRule for_body(const ConvexBody& body, int resolution, std::vector<double> extra_breaks = {});

    [[nodiscard]] int dimension() const { return spec_.dim; }
    [[nodiscard]] const std::vector<RVec>& nodes() const { return nodes_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] std::size_t size() const { return nodes_.size(); }
    [[nodiscard]] const SphereRuleSpec& spec() const { return spec_; }
    [[nodiscard]] double total_weight() const;
    [[nodiscard]] SphereRule coarsened() const;

    template <class F>
    double integrate(F&& f) const {
        double s = 0.0;
        for (std::size_t j = 0; j < nodes_.size(); ++j) s += weights_[j] * f(nodes_[j]);
        return s;
    }

private:
    SphereRuleSpec spec_;
    std::vector<RVec> nodes_;
    std::vector<double> weights_;
};

/// Angle of the direction perpendicular to v in the plane (both +-pi/2 offsets
/// are returned); empty when v = 0.
std::vector<double> perpendicular_angles(const RVec& v);

}  // namespace aniso
