#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aniso/fields.hpp"
#include "aniso/nonlocal_functionals.hpp"

namespace aniso {

enum class ScheduleKind { s_values, delta_values, n_values };

const char* to_string(ScheduleKind kind);

/// Parameter sequence approaching the limit: s increasing to 1, delta
/// decreasing to 0 or n increasing to infinity.
struct Schedule {
    ScheduleKind kind = ScheduleKind::s_values;
    std::vector<double> values;
    /// Monte Carlo budgets scale the sample count like t_0 / t along the schedule.
    bool grow_samples = true;

    static Schedule default_s();
    static Schedule default_delta();
    static Schedule default_n();
    static Schedule for_kind(FunctionalKind kind);

    /// Throws std::invalid_argument unless monotone as required with >= 4 points.
    void validate() const;
    /// Distance to the limit: 1 - s, delta or 1/n.
    [[nodiscard]] double t_of(double value) const;
};

/// What the normalized values converge to.
enum class TargetMode { local_energy, p_local_energy, perimeter };

const char* to_string(TargetMode mode);

struct StudyPoint {
    double parameter = 0.0;
    double t = 0.0;
    double value = 0.0;  ///< normalized
    double error = 0.0;
};

struct Extrapolation {
    double limit = 0.0;
    double uncertainty = 0.0;
    double rate = 1.0;
    double amplitude = 0.0;
    /// Weighted sum of squared residuals.
    double residual = 0.0;
    double aitken = 0.0;
    bool rate_determined = true;
    bool linear_fallback = false;
};

struct StudyEcho {
    std::string functional;
    std::string field;
    std::string body;
    std::string potential;
    std::string family;
    double p = 0.0;
    ScheduleKind schedule_kind = ScheduleKind::s_values;
    std::vector<double> schedule;
    double tolerance = 0.0;
    std::uint64_t seed = 0;
    std::string outer;
};

struct ConvergenceReport {
    StudyEcho study;
    std::vector<StudyPoint> points;
    Extrapolation extrapolation;
    TargetMode target_mode = TargetMode::local_energy;
    double target = 0.0;
    double target_error = 0.0;
    /// |C - target| / |target|, or absolute when the target is zero.
    double gap = 0.0;
    double allowed = 0.0;
    bool pass = false;
    /// "quadrature" or "schedule truncation".
    std::string dominant_error;
};

struct StudyDefinition {
    FieldPtr field;
    /// Functional template; its parameter is replaced at each schedule point.
    FunctionalSpec spec;
    Schedule schedule;
    IntegrationBudget budget;
    /// Grid for the local-energy target.
    GridConfig target_grid;
    double tolerance = 0.01;
};

/// Fits value ~ C + a t^b with weights 1/error^2. Throws std::invalid_argument
/// for fewer than 4 points or t not strictly decreasing and positive.
Extrapolation extrapolate(const std::vector<StudyPoint>& points);

struct Comparison {
    bool pass = false;
    double gap = 0.0;
    double allowed = 0.0;
    std::string dominant_error;
};

/// pass iff |C - target| <= tolerance |target| + 3 uncertainty; with a zero or
/// non-finite target the tolerance is absolute.
Comparison compare(const ConvergenceReport& report, double tolerance);

TargetMode target_mode_for(const FunctionalSpec& spec, const ComplexField& u);

/// Local energy, p times it, or the perimeter for indicators (p = 1 only).
Estimate compute_target(const ComplexField& u, const FunctionalSpec& spec, const GridConfig& grid);

ConvergenceReport run_study(const StudyDefinition& study);

/// CSV with header "parameter,value,error" in %.17g.
std::string points_csv(const ConvergenceReport& report);
/// Two space-separated columns: parameter and normalized value.
std::string plot_data(const ConvergenceReport& report);

}  // namespace aniso
