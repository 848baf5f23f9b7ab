#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "aniso/fields.hpp"
#include "aniso/limit_analysis.hpp"
#include "aniso/random.hpp"
#include "doctest.h"

using namespace aniso;

namespace {

std::vector<StudyPoint> synthetic(const std::vector<double>& ts, double c, double a, double b, double noise = 0.0,
                                  std::uint64_t seed = 1) {
    Rng rng = make_rng(seed, "synthetic");
    std::vector<StudyPoint> pts;
    for (double t : ts) {
        StudyPoint p;
        p.t = t;
        p.parameter = t;
        p.value = c + a * std::pow(t, b) + noise * standard_normal(rng);
        p.error = noise > 0.0 ? noise : 1e-12;
        pts.push_back(p);
    }
    return pts;
}

const std::vector<double> kTs{0.2, 0.12, 0.07, 0.04, 0.02, 0.01};

ConvergenceReport report_with(double limit, double target, double unc) {
    ConvergenceReport r;
    r.extrapolation.limit = limit;
    r.extrapolation.uncertainty = unc;
    r.target = target;
    return r;
}

}  // namespace

TEST_CASE("extrapolation recovers synthetic models") {
    const Extrapolation lin = extrapolate(synthetic(kTs, 3.0, 2.0, 1.0));
    CHECK(lin.limit == doctest::Approx(3.0).epsilon(1e-9));
    CHECK(lin.rate == doctest::Approx(1.0).epsilon(1e-5));
    // chi^2 in units of the stated 1e-12 errors
    CHECK(lin.residual < 1.0);
    CHECK(lin.rate_determined);

    const Extrapolation half = extrapolate(synthetic(kTs, -1.5, 0.7, 0.5, 1e-6, 4));
    CHECK(std::abs(half.limit + 1.5) < 1e-4);
    CHECK(half.rate == doctest::Approx(0.5).epsilon(0.05));

    const Extrapolation quad = extrapolate(synthetic({1.0, 0.5, 0.25, 0.125, 0.0625}, 10.0, -4.0, 2.0));
    CHECK(quad.limit == doctest::Approx(10.0).epsilon(1e-8));
    CHECK(quad.rate == doctest::Approx(2.0).epsilon(1e-5));
}

TEST_CASE("constant data leaves the rate undetermined") {
    const Extrapolation e = extrapolate(synthetic(kTs, 2.5, 0.0, 1.0));
    CHECK(e.limit == doctest::Approx(2.5).epsilon(1e-15));
    CHECK_FALSE(e.rate_determined);
    CHECK(e.residual == 0.0);
}

TEST_CASE("Aitken cross-check on a geometric sequence") {
    std::vector<StudyPoint> pts;
    for (int k = 0; k < 5; ++k) {
        StudyPoint p;
        p.t = std::pow(0.5, k);
        p.value = 1.0 + 3.0 * std::pow(0.5, k);
        p.error = 1e-12;
        pts.push_back(p);
    }
    CHECK(extrapolate(pts).aitken == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("extrapolation input errors") {
    CHECK_THROWS(extrapolate(synthetic({0.3, 0.2, 0.1}, 1.0, 1.0, 1.0)));
    CHECK_THROWS(extrapolate(synthetic({0.3, 0.2, 0.25, 0.1}, 1.0, 1.0, 1.0)));
    CHECK_THROWS(extrapolate(synthetic({0.3, 0.2, 0.1, 0.0}, 1.0, 1.0, 1.0)));
}

TEST_CASE("compare") {
    CHECK(compare(report_with(5.0, 5.0, 0.0), 0.01).pass);
    CHECK_FALSE(compare(report_with(1.02, 1.0, 0.0), 0.01).pass);
    CHECK(compare(report_with(1.02, 1.0, 0.0), 0.03).pass);
    const Comparison c = compare(report_with(1.02, 1.0, 0.0), 0.01);
    CHECK(c.gap == doctest::Approx(0.02));
    // fit uncertainty widens the band by three standard deviations
    CHECK(compare(report_with(1.02, 1.0, 0.004), 0.01).pass);
    CHECK_FALSE(compare(report_with(1.02, 1.0, 0.003), 0.01).pass);
    // zero target switches to an absolute tolerance
    CHECK(compare(report_with(0.005, 0.0, 0.0), 0.01).pass);
    CHECK_FALSE(compare(report_with(0.02, 0.0, 0.0), 0.01).pass);
    CHECK_FALSE(compare(report_with(NAN, 1.0, 0.0), 0.01).pass);
}

TEST_CASE("schedules") {
    CHECK(Schedule::default_s().values == std::vector<double>{0.80, 0.88, 0.93, 0.96, 0.98, 0.99});
    CHECK(Schedule::default_delta().values == std::vector<double>{0.1, 0.05, 0.02, 0.01, 0.005});
    CHECK(Schedule::default_n().values == std::vector<double>{4, 8, 16, 32, 64});
    CHECK(Schedule::default_s().t_of(0.96) == doctest::Approx(0.04));
    CHECK(Schedule::default_delta().t_of(0.02) == doctest::Approx(0.02));
    CHECK(Schedule::default_n().t_of(16) == doctest::Approx(1.0 / 16));
    CHECK(Schedule::for_kind(FunctionalKind::nguyen).kind == ScheduleKind::delta_values);
    CHECK_NOTHROW(Schedule::default_s().validate());
    Schedule bad = Schedule::default_s();
    bad.values = {0.8, 0.9, 0.95};
    CHECK_THROWS(bad.validate());
    bad.values = {0.8, 0.9, 0.85, 0.95};
    CHECK_THROWS(bad.validate());
    bad.values = {0.8, 0.9, 0.95, 1.0};
    CHECK_THROWS(bad.validate());
    Schedule n = Schedule::default_n();
    n.values = {4, 8, 16.5, 32};
    CHECK_THROWS(n.validate());
    Schedule d = Schedule::default_delta();
    d.values = {0.1, 0.2, 0.05, 0.01};
    CHECK_THROWS(d.validate());
}

TEST_CASE("zero field study passes trivially") {
    for (FunctionalKind kind : {FunctionalKind::gagliardo, FunctionalKind::nguyen, FunctionalKind::bbm}) {
        StudyDefinition st;
        st.field = zero_field(2);
        const ConvexBody ball = ConvexBody::ball(2);
        if (kind == FunctionalKind::gagliardo) st.spec = FunctionalSpec::gagliardo(ball, 2.0, 0.5);
        if (kind == FunctionalKind::nguyen)
            st.spec = FunctionalSpec::nguyen(ball, 2.0, 0.1, MagneticPotential::rotational(1.0));
        if (kind == FunctionalKind::bbm)
            st.spec = FunctionalSpec::bbm(ball, 2.0, MollifierFamily::shrinking_uniform(2.0, 2), 4,
                                          MagneticPotential::zero(2));
        st.schedule = Schedule::for_kind(kind);
        const ConvergenceReport r = run_study(st);
        CHECK(r.pass);
        CHECK(r.target == 0.0);
        CHECK(r.extrapolation.limit == 0.0);
        for (const StudyPoint& p : r.points) CHECK(p.value == 0.0);
    }
}

TEST_CASE("perimeter study of the unit-square indicator") {
    StudyDefinition st;
    st.field = indicator_field(Region::box({0.0, 0.0}, {1.0, 1.0}));
    st.spec = FunctionalSpec::bbm(ConvexBody::ball(2), 1.0, MollifierFamily::shrinking_uniform(1.0, 2), 4,
                                  MagneticPotential::zero(2));
    st.schedule = Schedule::default_n();
    st.tolerance = 0.03;
    const ConvergenceReport r = run_study(st);
    CHECK(r.target_mode == TargetMode::perimeter);
    CHECK(r.target == doctest::Approx(16.0).epsilon(1e-9));
    CHECK(r.pass);
    CHECK(r.points.size() == 5);
    CHECK(r.points.back().t == doctest::Approx(1.0 / 64));
    // gap and pass are recomputable from the stored values
    const Comparison c = compare(r, st.tolerance);
    CHECK(c.pass == r.pass);
    CHECK(c.gap == r.gap);

    const std::string csv = points_csv(r);
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    CHECK(line == "parameter,value,error");
    int rows = 0;
    while (std::getline(in, line)) ++rows;
    CHECK(rows == 5);

    // indicator targets need p = 1
    StudyDefinition bad = st;
    bad.spec = FunctionalSpec::bbm(ConvexBody::ball(2), 2.0, MollifierFamily::shrinking_uniform(2.0, 2), 4,
                                   MagneticPotential::zero(2));
    CHECK_THROWS(run_study(bad));
    StudyDefinition short_schedule = st;
    short_schedule.schedule.values = {4, 8, 16};
    CHECK_THROWS(run_study(short_schedule));
    StudyDefinition wrong_kind = st;
    wrong_kind.schedule = Schedule::default_s();
    CHECK_THROWS(run_study(wrong_kind));
}

TEST_CASE("gagliardo points carry the (1 - s) normalization") {
    StudyDefinition st;
    st.field = gaussian_field(2);
    st.spec = FunctionalSpec::gagliardo(ConvexBody::ball(2), 2.0, 0.5);
    st.schedule.kind = ScheduleKind::s_values;
    st.schedule.values = {0.3, 0.4, 0.5, 0.6};
    st.budget.outer_nodes = 8;
    st.budget.estimate_error = false;
    const ConvergenceReport r = run_study(st);
    REQUIRE(r.points.size() == 4);
    for (const StudyPoint& p : r.points) {
        FunctionalSpec s = st.spec;
        s.s = p.parameter;
        const double raw = gagliardo(*st.field, s, st.budget).value;
        CHECK(p.value == doctest::Approx((1.0 - p.parameter) * raw).epsilon(1e-14));
        CHECK(p.t == doctest::Approx(1.0 - p.parameter));
    }
    CHECK(r.target_mode == TargetMode::local_energy);
}

TEST_CASE("targets") {
    const FieldPtr u = modulated_gaussian_field({1.0, 0.0});
    const MagneticPotential rot = MagneticPotential::rotational(1.0);
    const ConvexBody ball = ConvexBody::ball(2);
    const FunctionalSpec ng = FunctionalSpec::nguyen(ball, 2.0, 0.1, rot);
    const FunctionalSpec bb = FunctionalSpec::bbm(ball, 2.0, MollifierFamily::shrinking_uniform(2.0, 2), 4, rot);
    CHECK(target_mode_for(ng, *u) == TargetMode::local_energy);
    CHECK(target_mode_for(bb, *u) == TargetMode::p_local_energy);
    const double le = compute_target(*u, ng, {}).value;
    CHECK(le == doctest::Approx(9.0 * 3.14159265358979323846 * 3.14159265358979323846 / 8.0).epsilon(1e-8));
    CHECK(compute_target(*u, bb, {}).value == doctest::Approx(2.0 * le).epsilon(1e-14));
}
