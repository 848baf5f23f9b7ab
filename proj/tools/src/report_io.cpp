#include "aniso_tools/report_io.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace aniso::tools {

using nlohmann::json;

namespace {

// JSON has no NaN/inf; those are stored as strings.
json num(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

double from_num(const json& j) {
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
        if (s == "inf") return std::numeric_limits<double>::infinity();
        if (s == "-inf") return -std::numeric_limits<double>::infinity();
        throw std::runtime_error("report: bad number \"" + s + "\"");
    }
    return j.get<double>();
}

ScheduleKind schedule_kind_from(const std::string& s) {
    if (s == "s_values") return ScheduleKind::s_values;
    if (s == "delta_values") return ScheduleKind::delta_values;
    if (s == "n_values") return ScheduleKind::n_values;
    throw std::runtime_error("report: unknown schedule kind " + s);
}

TargetMode target_mode_from(const std::string& s) {
    if (s == "local_energy") return TargetMode::local_energy;
    if (s == "p_local_energy") return TargetMode::p_local_energy;
    if (s == "perimeter") return TargetMode::perimeter;
    throw std::runtime_error("report: unknown target mode " + s);
}

}  // namespace

std::string report_to_json(const ConvergenceReport& r) {
    json doc;
    doc["schema_version"] = 1;
    json study;
    study["functional"] = r.study.functional;
    study["field"] = r.study.field;
    study["body"] = r.study.body;
    study["potential"] = r.study.potential;
    study["family"] = r.study.family;
    study["p"] = num(r.study.p);
    study["schedule_kind"] = to_string(r.study.schedule_kind);
    json sched = json::array();
    for (double v : r.study.schedule) sched.push_back(num(v));
    study["schedule"] = sched;
    study["tolerance"] = num(r.study.tolerance);
    study["seed"] = r.study.seed;
    study["outer"] = r.study.outer;
    doc["study"] = study;

    json points = json::array();
    for (const StudyPoint& p : r.points) {
        points.push_back({{"parameter", num(p.parameter)}, {"t", num(p.t)}, {"value", num(p.value)},
                          {"error", num(p.error)}});
    }
    doc["points"] = points;

    const Extrapolation& e = r.extrapolation;
    doc["extrapolation"] = {{"limit", num(e.limit)},
                            {"uncertainty", num(e.uncertainty)},
                            {"rate", num(e.rate)},
                            {"amplitude", num(e.amplitude)},
                            {"residual", num(e.residual)},
                            {"aitken", num(e.aitken)},
                            {"rate_determined", e.rate_determined},
                            {"linear_fallback", e.linear_fallback}};
    doc["target_mode"] = to_string(r.target_mode);
    doc["target"] = num(r.target);
    doc["target_error"] = num(r.target_error);
    doc["gap"] = num(r.gap);
    doc["allowed"] = num(r.allowed);
    doc["pass"] = r.pass;
    doc["dominant_error"] = r.dominant_error;
    return doc.dump(2) + "\n";
}

ConvergenceReport report_from_json(const std::string& text) {
    const json doc = json::parse(text);
    if (doc.at("schema_version").get<int>() != 1) throw std::runtime_error("report: unsupported schema_version");
    ConvergenceReport r;
    const json& s = doc.at("study");
    r.study.functional = s.at("functional").get<std::string>();
    r.study.field = s.at("field").get<std::string>();
    r.study.body = s.at("body").get<std::string>();
    r.study.potential = s.at("potential").get<std::string>();
    r.study.family = s.at("family").get<std::string>();
    r.study.p = from_num(s.at("p"));
    r.study.schedule_kind = schedule_kind_from(s.at("schedule_kind").get<std::string>());
    for (const json& v : s.at("schedule")) r.study.schedule.push_back(from_num(v));
    r.study.tolerance = from_num(s.at("tolerance"));
    r.study.seed = s.at("seed").get<std::uint64_t>();
    r.study.outer = s.at("outer").get<std::string>();
    for (const json& p : doc.at("points")) {
        r.points.push_back({from_num(p.at("parameter")), from_num(p.at("t")), from_num(p.at("value")),
                            from_num(p.at("error"))});
    }
    const json& e = doc.at("extrapolation");
    r.extrapolation.limit = from_num(e.at("limit"));
    r.extrapolation.uncertainty = from_num(e.at("uncertainty"));
    r.extrapolation.rate = from_num(e.at("rate"));
    r.extrapolation.amplitude = from_num(e.at("amplitude"));
    r.extrapolation.residual = from_num(e.at("residual"));
    r.extrapolation.aitken = from_num(e.at("aitken"));
    r.extrapolation.rate_determined = e.at("rate_determined").get<bool>();
    r.extrapolation.linear_fallback = e.at("linear_fallback").get<bool>();
    r.target_mode = target_mode_from(doc.at("target_mode").get<std::string>());
    r.target = from_num(doc.at("target"));
    r.target_error = from_num(doc.at("target_error"));
    r.gap = from_num(doc.at("gap"));
    r.allowed = from_num(doc.at("allowed"));
    r.pass = doc.at("pass").get<bool>();
    r.dominant_error = doc.at("dominant_error").get<std::string>();
    return r;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_report_files(const ConvergenceReport& report, const std::string& dir) {
    const std::filesystem::path d(dir);
    write_text_file((d / "report.json").string(), report_to_json(report));
    write_text_file((d / "points.csv").string(), points_csv(report));
    write_text_file((d / "plot.dat").string(), plot_data(report));
}

}  // namespace aniso::tools
