#include "aniso/limit_analysis.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace aniso {

const char* to_string(ScheduleKind kind) {
    switch (kind) {
        case ScheduleKind::s_values:
            return "s_values";
        case ScheduleKind::delta_values:
            return "delta_values";
        case ScheduleKind::n_values:
            return "n_values";
    }
    return "?";
}

const char* to_string(TargetMode mode) {
    switch (mode) {
        case TargetMode::local_energy:
            return "local_energy";
        case TargetMode::p_local_energy:
            return "p_local_energy";
        case TargetMode::perimeter:
            return "perimeter";
    }
    return "?";
}

Schedule Schedule::default_s() { return {ScheduleKind::s_values, {0.80, 0.88, 0.93, 0.96, 0.98, 0.99}, true}; }
Schedule Schedule::default_delta() { return {ScheduleKind::delta_values, {0.1, 0.05, 0.02, 0.01, 0.005}, true}; }
Schedule Schedule::default_n() { return {ScheduleKind::n_values, {4, 8, 16, 32, 64}, true}; }

Schedule Schedule::for_kind(FunctionalKind kind) {
    switch (kind) {
        case FunctionalKind::gagliardo:
            return default_s();
        case FunctionalKind::nguyen:
            return default_delta();
        case FunctionalKind::bbm:
            return default_n();
    }
    return default_s();
}

void Schedule::validate() const {
    if (values.size() < 4) throw std::invalid_argument("schedule needs at least 4 points");
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double v = values[i];
        switch (kind) {
            case ScheduleKind::s_values:
                if (!(v > 0.0 && v < 1.0)) throw std::invalid_argument("schedule: s values must lie in (0, 1)");
                break;
            case ScheduleKind::delta_values:
                if (!(v > 0.0) || !std::isfinite(v)) throw std::invalid_argument("schedule: delta values must be > 0");
                break;
            case ScheduleKind::n_values:
                if (!(v >= 1.0) || v != std::floor(v) || v > 1e9) {
                    throw std::invalid_argument("schedule: n values must be positive integers");
                }
                break;
        }
        if (i > 0) {
            const bool ok = kind == ScheduleKind::delta_values ? v < values[i - 1] : v > values[i - 1];
            if (!ok) throw std::invalid_argument("schedule: values are not strictly monotone toward the limit");
        }
    }
}

double Schedule::t_of(double value) const {
    switch (kind) {
        case ScheduleKind::s_values:
            return 1.0 - value;
        case ScheduleKind::delta_values:
            return value;
        case ScheduleKind::n_values:
            return 1.0 / value;
    }
    return value;
}

namespace {

struct LinearFit {
    double c = 0.0;
    double a = 0.0;
    double chi2 = 0.0;
    double var_c = 0.0;
    double cond = 0.0;
};

/// Weighted least squares for v = c + a f.
LinearFit fit_fixed_basis(const std::vector<double>& f, const std::vector<double>& v, const std::vector<double>& w) {
    double s00 = 0.0, s01 = 0.0, s11 = 0.0, r0 = 0.0, r1 = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) {
        s00 += w[i];
        s01 += w[i] * f[i];
        s11 += w[i] * f[i] * f[i];
        r0 += w[i] * v[i];
        r1 += w[i] * f[i] * v[i];
    }
    LinearFit fit;
    const double det = s00 * s11 - s01 * s01;
    // Condition number of the column-scaled design (sqrt of the normal matrix's).
    const double d0 = std::sqrt(s00);
    const double d1 = std::sqrt(s11);
    const double corr = d0 > 0.0 && d1 > 0.0 ? std::abs(s01) / (d0 * d1) : 1.0;
    fit.cond = corr >= 1.0 ? std::numeric_limits<double>::infinity() : std::sqrt((1.0 + corr) / (1.0 - corr));
    if (!(det > 0.0)) {
        fit.cond = std::numeric_limits<double>::infinity();
        return fit;
    }
    fit.c = (s11 * r0 - s01 * r1) / det;
    fit.a = (s00 * r1 - s01 * r0) / det;
    fit.var_c = s11 / det;
    for (std::size_t i = 0; i < f.size(); ++i) {
        const double r = v[i] - fit.c - fit.a * f[i];
        fit.chi2 += w[i] * r * r;
    }
    return fit;
}

LinearFit fit_rate(const std::vector<double>& t, const std::vector<double>& v, const std::vector<double>& w,
                   double b) {
    std::vector<double> f(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) f[i] = std::pow(t[i], b);
    return fit_fixed_basis(f, v, w);
}

}  // namespace

Extrapolation extrapolate(const std::vector<StudyPoint>& points) {
    const std::size_t n = points.size();
    if (n < 4) throw std::invalid_argument("extrapolate: need at least 4 points");
    std::vector<double> t(n), v(n), w(n);
    double scale = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (!(points[i].t > 0.0) || !std::isfinite(points[i].t)) {
            throw std::invalid_argument("extrapolate: t must be positive");
        }
        if (i > 0 && !(points[i].t < points[i - 1].t)) {
            throw std::invalid_argument("extrapolate: t must decrease strictly");
        }
        t[i] = points[i].t;
        v[i] = points[i].value;
        scale = std::max(scale, std::abs(v[i]));
    }
    // 1e-100 keeps 1/e^2 finite when every value (and error) is zero
    const double floor = std::max(1e-12 * scale, 1e-100);
    for (std::size_t i = 0; i < n; ++i) {
        const double e = std::max(points[i].error, floor);
        w[i] = 1.0 / (e * e);
    }

    Extrapolation out;
    {
        const double a = v[n - 3], b = v[n - 2], c = v[n - 1];
        const double denom = (c - b) - (b - a);
        out.aitken = denom != 0.0 ? c - (c - b) * (c - b) / denom : c;
    }

    double spread = 0.0;
    for (std::size_t i = 0; i < n; ++i) spread = std::max(spread, std::abs(v[i] - v[0]));
    if (spread <= 1e-14 * scale) {
        double sw = 0.0, sv = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            sw += w[i];
            sv += w[i] * v[i];
        }
        out.limit = sv / sw;
        out.uncertainty = std::sqrt(1.0 / sw);
        out.rate = std::numeric_limits<double>::quiet_NaN();
        out.rate_determined = false;
        return out;
    }

    // chi^2(b) on a grid, then golden-section refinement around the best node.
    constexpr double b_lo = 0.25;
    constexpr double b_hi = 3.0;
    constexpr int grid = 56;
    double best_b = 1.0;
    double best_chi = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= grid; ++k) {
        const double b = b_lo + (b_hi - b_lo) * k / grid;
        const LinearFit f = fit_rate(t, v, w, b);
        if (std::isfinite(f.cond) && f.chi2 < best_chi) {
            best_chi = f.chi2;
            best_b = b;
        }
    }
    {
        const double step = (b_hi - b_lo) / grid;
        double lo = std::max(b_lo, best_b - step);
        double hi = std::min(b_hi, best_b + step);
        const double g = 0.5 * (std::sqrt(5.0) - 1.0);
        double x1 = hi - g * (hi - lo);
        double x2 = lo + g * (hi - lo);
        double f1 = fit_rate(t, v, w, x1).chi2;
        double f2 = fit_rate(t, v, w, x2).chi2;
        for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - g * (hi - lo);
                f1 = fit_rate(t, v, w, x1).chi2;
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + g * (hi - lo);
                f2 = fit_rate(t, v, w, x2).chi2;
            }
        }
        const double cand = 0.5 * (lo + hi);
        if (fit_rate(t, v, w, cand).chi2 <= best_chi) best_b = cand;
    }

    LinearFit fit = fit_rate(t, v, w, best_b);
    if (!(fit.cond <= 1e8)) {
        best_b = 1.0;
        fit = fit_rate(t, v, w, 1.0);
        out.linear_fallback = true;
    }
    out.limit = fit.c;
    out.amplitude = fit.a;
    out.rate = best_b;
    out.residual = fit.chi2;
    // Birge ratio: scale the covariance when the scatter exceeds the stated errors.
    const double dof = static_cast<double>(n) - 3.0;
    const double birge = std::max(1.0, std::sqrt(fit.chi2 / dof));
    out.uncertainty = std::sqrt(std::max(fit.var_c, 0.0)) * birge;
    return out;
}

Comparison compare(const ConvergenceReport& report, double tolerance) {
    Comparison c;
    const double limit = report.extrapolation.limit;
    const double unc = report.extrapolation.uncertainty;
    const double target = report.target;
    const double diff = std::abs(limit - target);
    if (std::isfinite(target) && target != 0.0) {
        c.gap = diff / std::abs(target);
        c.allowed = tolerance * std::abs(target) + 3.0 * unc;
    } else {
        c.gap = diff;
        c.allowed = tolerance + 3.0 * unc;
    }
    c.pass = std::isfinite(limit) && diff <= c.allowed;
    double quadrature = 0.0;
    for (const StudyPoint& pt : report.points) quadrature = std::max(quadrature, pt.error);
    const double truncation = report.points.empty() ? 0.0 : std::abs(limit - report.points.back().value);
    c.dominant_error = quadrature >= truncation ? "quadrature" : "schedule truncation";
    return c;
}

TargetMode target_mode_for(const FunctionalSpec& spec, const ComplexField& u) {
    if (u.smoothness() == Smoothness::indicator) return TargetMode::perimeter;
    return spec.kind == FunctionalKind::bbm ? TargetMode::p_local_energy : TargetMode::local_energy;
}

Estimate compute_target(const ComplexField& u, const FunctionalSpec& spec, const GridConfig& grid) {
    if (u.is_zero()) return {0.0, 0.0};
    if (u.smoothness() == Smoothness::indicator) {
        if (spec.p != 1.0) throw std::invalid_argument("target unavailable: indicator fields need p = 1");
        if (!spec.potential.is_zero()) throw std::invalid_argument("target unavailable: indicator fields need A = 0");
        return {std::abs(u.amplitude()) * anisotropic_perimeter(*u.region(), spec.body), 0.0};
    }
    Estimate e = local_energy(u, spec.potential, spec.body, spec.p, grid);
    if (spec.kind == FunctionalKind::bbm) {
        e.value *= spec.p;
        e.error *= spec.p;
    }
    return e;
}

namespace {

void apply_parameter(FunctionalSpec& spec, ScheduleKind kind, double value) {
    switch (spec.kind) {
        case FunctionalKind::gagliardo:
            if (kind != ScheduleKind::s_values) throw std::invalid_argument("gagliardo studies need an s schedule");
            spec.s = value;
            break;
        case FunctionalKind::nguyen:
            if (kind != ScheduleKind::delta_values) throw std::invalid_argument("nguyen studies need a delta schedule");
            spec.delta = value;
            break;
        case FunctionalKind::bbm:
            if (kind != ScheduleKind::n_values) throw std::invalid_argument("bbm studies need an n schedule");
            spec.n = static_cast<int>(value);
            break;
    }
}

}  // namespace

ConvergenceReport run_study(const StudyDefinition& study) {
    if (!study.field) throw std::invalid_argument("study: field missing");
    study.schedule.validate();
    const ComplexField& u = *study.field;

    ConvergenceReport report;
    report.study.functional = to_string(study.spec.kind);
    report.study.field = u.describe();
    report.study.body = study.spec.body.describe();
    report.study.potential = study.spec.potential.describe();
    report.study.family = study.spec.family ? study.spec.family->describe() : "";
    report.study.p = study.spec.p;
    report.study.schedule_kind = study.schedule.kind;
    report.study.schedule = study.schedule.values;
    report.study.tolerance = study.tolerance;
    report.study.seed = study.budget.seed;
    report.study.outer = study.budget.outer == OuterScheme::tensor_grid ? "tensor_grid" : "montecarlo";

    // Validate everything before the expensive part.
    report.target_mode = target_mode_for(study.spec, u);
    FunctionalSpec first = study.spec;
    apply_parameter(first, study.schedule.kind, study.schedule.values.front());
    first.validate();
    require_same_dim(u.dimension(), first.body.dimension(), "study field");
    const Estimate target = compute_target(u, first, study.target_grid);
    report.target = target.value;
    report.target_error = target.error;

    const double t0 = study.schedule.t_of(study.schedule.values.front());
    for (double value : study.schedule.values) {
        FunctionalSpec spec = study.spec;
        apply_parameter(spec, study.schedule.kind, value);
        IntegrationBudget budget = study.budget;
        const double t = study.schedule.t_of(value);
        if (budget.outer == OuterScheme::montecarlo && study.schedule.grow_samples) {
            budget.samples = static_cast<std::size_t>(std::ceil(static_cast<double>(budget.samples) * t0 / t));
        }
        const FunctionalResult r = evaluate_functional(u, spec, budget);
        StudyPoint pt;
        pt.parameter = value;
        pt.t = t;
        const double scale = spec.kind == FunctionalKind::gagliardo ? 1.0 - spec.s : 1.0;
        pt.value = scale * r.value;
        pt.error = scale * r.error;
        report.points.push_back(pt);
    }
    report.extrapolation = extrapolate(report.points);
    const Comparison c = compare(report, study.tolerance);
    report.gap = c.gap;
    report.allowed = c.allowed;
    report.pass = c.pass;
    report.dominant_error = c.dominant_error;
    return report;
}

std::string points_csv(const ConvergenceReport& report) {
    std::string out = "parameter,value,error\n";
    std::array<char, 128> buf{};
    for (const StudyPoint& pt : report.points) {
        std::snprintf(buf.data(), buf.size(), "%.17g,%.17g,%.17g\n", pt.parameter, pt.value, pt.error);
        out += buf.data();
    }
    return out;
}

std::string plot_data(const ConvergenceReport& report) {
    std::string out;
    std::array<char, 96> buf{};
    for (const StudyPoint& pt : report.points) {
        std::snprintf(buf.data(), buf.size(), "%.17g %.17g\n", pt.parameter, pt.value);
        out += buf.data();
    }
    return out;
}

}  // namespace aniso
