#include "aniso_tools/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace aniso::tools {

using nlohmann::json;

namespace {

/// Maps JSON keys back to source lines. nlohmann::json keeps no positions, so
/// a key is located by searching for `"key":` after its parent's position.
class Locator {
public:
    Locator(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    [[nodiscard]] std::size_t find_key(const std::string& key, std::size_t from) const {
        const std::string quoted = "\"" + key + "\"";
        std::size_t pos = from;
        while ((pos = text_.find(quoted, pos)) != std::string::npos) {
            std::size_t after = pos + quoted.size();
            while (after < text_.size() && std::isspace(static_cast<unsigned char>(text_[after]))) ++after;
            if (after < text_.size() && text_[after] == ':') return pos;
            pos += quoted.size();
        }
        return from;
    }

    [[nodiscard]] int line_at(std::size_t pos) const {
        pos = std::min(pos, text_.size());
        return 1 + static_cast<int>(std::count(text_.begin(), text_.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
    }

    [[nodiscard]] const std::string& source() const { return source_; }

private:
    const std::string& text_;
    std::string source_;
};

struct Node {
    const json& j;
    std::string path;
    std::size_t pos;
    const Locator& loc;

    [[noreturn]] void fail(const std::string& msg) const {
        std::ostringstream os;
        os << loc.source() << ":" << loc.line_at(pos) << ": " << (path.empty() ? "<root>" : path) << ": " << msg;
        throw ConfigError(os.str());
    }

    [[nodiscard]] bool has(const std::string& key) const { return j.is_object() && j.contains(key); }

    [[nodiscard]] Node child(const std::string& key) const {
        if (!has(key)) fail("missing key \"" + key + "\"");
        return {j.at(key), path.empty() ? key : path + "." + key, loc.find_key(key, pos), loc};
    }

    [[nodiscard]] Node element(std::size_t i) const { return {j.at(i), path + "[" + std::to_string(i) + "]", pos, loc}; }

    void expect_object() const {
        if (!j.is_object()) fail("expected an object");
    }

    void allow_keys(std::initializer_list<const char*> keys) const {
        expect_object();
        for (const auto& item : j.items()) {
            const bool known = std::any_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; });
            if (!known) {
                const Node bad{item.value(), path.empty() ? item.key() : path + "." + item.key(),
                               loc.find_key(item.key(), pos), loc};
                bad.fail("unknown key");
            }
        }
    }

    [[nodiscard]] double number() const {
        if (!j.is_number()) fail("expected a number");
        const double v = j.get<double>();
        if (!std::isfinite(v)) fail("expected a finite number");
        return v;
    }

    [[nodiscard]] long long integer() const {
        if (!j.is_number_integer()) fail("expected an integer");
        return j.get<long long>();
    }

    [[nodiscard]] bool boolean() const {
        if (!j.is_boolean()) fail("expected true or false");
        return j.get<bool>();
    }

    [[nodiscard]] std::string string() const {
        if (!j.is_string()) fail("expected a string");
        return j.get<std::string>();
    }

    [[nodiscard]] std::size_t array_size() const {
        if (!j.is_array()) fail("expected an array");
        return j.size();
    }

    [[nodiscard]] RVec rvec() const {
        const std::size_t n = array_size();
        if (n < 1 || n > static_cast<std::size_t>(kMaxDim)) fail("vector length must be in [1, " + std::to_string(kMaxDim) + "]");
        RVec v(static_cast<int>(n));
        for (std::size_t i = 0; i < n; ++i) v[static_cast<int>(i)] = element(i).number();
        return v;
    }

    /// Entries are numbers or [re, im] pairs.
    [[nodiscard]] CVec cvec() const {
        const std::size_t n = array_size();
        if (n < 1 || n > static_cast<std::size_t>(kMaxDim)) fail("vector length must be in [1, " + std::to_string(kMaxDim) + "]");
        CVec v(static_cast<int>(n));
        for (std::size_t i = 0; i < n; ++i) {
            const Node e = element(i);
            if (e.j.is_array()) {
                if (e.j.size() != 2) e.fail("complex entries are [re, im]");
                v[static_cast<int>(i)] = complex(e.element(0).number(), e.element(1).number());
            } else {
                v[static_cast<int>(i)] = e.number();
            }
        }
        return v;
    }

    [[nodiscard]] Matrix matrix() const {
        const std::size_t n = array_size();
        std::vector<std::vector<double>> rows;
        for (std::size_t i = 0; i < n; ++i) rows.push_back(element(i).rvec().to_vector());
        try {
            return Matrix::from_rows(rows);
        } catch (const std::exception& e) {
            fail(e.what());
        }
    }

    [[nodiscard]] int dim() const {
        const long long d = integer();
        if (d < 1 || d > kMaxDim) fail("dimension must be in [1, " + std::to_string(kMaxDim) + "]");
        return static_cast<int>(d);
    }

    [[nodiscard]] double positive() const {
        const double v = number();
        if (!(v > 0.0)) fail("must be > 0");
        return v;
    }
};

/// Runs a library factory and reports its exception at this node.
template <class F>
auto build(const Node& node, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        node.fail(e.what());
    }
}

ConvexBody parse_body(const Node& n) {
    n.expect_object();
    const std::string shape = n.child("shape").string();
    if (shape == "ball") {
        n.allow_keys({"shape", "dim", "radius"});
        const int dim = n.child("dim").dim();
        const double r = n.has("radius") ? n.child("radius").positive() : 1.0;
        return build(n, [&] { return ConvexBody::ball(dim, r); });
    }
    if (shape == "ellipsoid") {
        n.allow_keys({"shape", "axes", "matrix"});
        if (n.has("axes") == n.has("matrix")) n.fail("ellipsoid needs exactly one of \"axes\" or \"matrix\"");
        if (n.has("axes")) {
            const RVec axes = n.child("axes").rvec();
            return build(n, [&] { return ConvexBody::ellipsoid_axes(axes); });
        }
        const Matrix m = n.child("matrix").matrix();
        return build(n, [&] { return ConvexBody::ellipsoid(m); });
    }
    if (shape == "cube") {
        n.allow_keys({"shape", "dim", "half_side"});
        const int dim = n.child("dim").dim();
        const double h = n.has("half_side") ? n.child("half_side").positive() : 1.0;
        return build(n, [&] { return ConvexBody::cube(dim, h); });
    }
    if (shape == "polytope") {
        n.allow_keys({"shape", "normals", "offsets"});
        const Node normals = n.child("normals");
        const Node offsets = n.child("offsets");
        std::vector<RVec> ns;
        std::vector<double> cs;
        for (std::size_t i = 0; i < normals.array_size(); ++i) ns.push_back(normals.element(i).rvec());
        for (std::size_t i = 0; i < offsets.array_size(); ++i) cs.push_back(offsets.element(i).number());
        return build(n, [&] { return ConvexBody::polytope(ns, cs); });
    }
    if (shape == "regular_polygon") {
        n.allow_keys({"shape", "sides", "inradius"});
        const long long sides = n.child("sides").integer();
        const double r = n.has("inradius") ? n.child("inradius").positive() : 1.0;
        return build(n, [&] { return ConvexBody::regular_polygon(static_cast<int>(sides), r); });
    }
    if (shape == "lq_ball") {
        n.allow_keys({"shape", "dim", "q"});
        const int dim = n.child("dim").dim();
        const Node qn = n.child("q");
        const double q = qn.j.is_string() && qn.string() == "inf" ? std::numeric_limits<double>::infinity() : qn.number();
        return build(n, [&] { return ConvexBody::lq_ball(dim, q); });
    }
    n.child("shape").fail("unknown shape \"" + shape + "\"");
}

Region parse_region(const Node& n) {
    n.allow_keys({"box", "polygon"});
    if (n.has("box") == n.has("polygon")) n.fail("region needs exactly one of \"box\" or \"polygon\"");
    if (n.has("box")) {
        const Node b = n.child("box");
        b.allow_keys({"lo", "hi"});
        const RVec lo = b.child("lo").rvec();
        const RVec hi = b.child("hi").rvec();
        return build(b, [&] { return Region::box(lo, hi); });
    }
    const Node p = n.child("polygon");
    std::vector<RVec> vs;
    for (std::size_t i = 0; i < p.array_size(); ++i) vs.push_back(p.element(i).rvec());
    return build(p, [&] { return Region::polygon(vs); });
}

FieldPtr parse_field(const Node& n) {
    n.expect_object();
    const std::string family = n.child("family").string();
    if (family == "zero" || family == "gaussian" || family == "bump") {
        n.allow_keys({"family", "dim"});
        const int dim = n.child("dim").dim();
        if (family == "zero") return zero_field(dim);
        if (family == "gaussian") return gaussian_field(dim);
        return bump_field(dim);
    }
    if (family == "modulated_gaussian") {
        n.allow_keys({"family", "k"});
        const RVec k = n.child("k").rvec();
        return modulated_gaussian_field(k);
    }
    if (family == "indicator") {
        n.allow_keys({"family", "region", "amplitude"});
        const Region r = parse_region(n.child("region"));
        const double a = n.has("amplitude") ? n.child("amplitude").number() : 1.0;
        return build(n, [&] { return indicator_field(r, a); });
    }
    if (family == "mollified") {
        n.allow_keys({"family", "base", "m"});
        const FieldPtr base = parse_field(n.child("base"));
        const long long m = n.child("m").integer();
        if (m < 1 || m > 100000) n.child("m").fail("m must be in [1, 100000]");
        return build(n, [&] { return mollify(base, static_cast<int>(m)); });
    }
    n.child("family").fail("unknown field family \"" + family + "\"");
}

MagneticPotential parse_potential(const Node& n, int dim_hint) {
    n.expect_object();
    const std::string type = n.child("type").string();
    if (type == "zero") {
        n.allow_keys({"type", "dim"});
        const int dim = n.has("dim") ? n.child("dim").dim() : dim_hint;
        if (dim < 1) n.fail("zero potential needs \"dim\" when no body is given");
        return MagneticPotential::zero(dim);
    }
    if (type == "constant") {
        n.allow_keys({"type", "a"});
        const RVec a = n.child("a").rvec();
        return MagneticPotential::constant(a);
    }
    if (type == "linear") {
        n.allow_keys({"type", "matrix"});
        const Matrix m = n.child("matrix").matrix();
        return build(n, [&] { return MagneticPotential::linear(m); });
    }
    if (type == "rotational") {
        n.allow_keys({"type", "b"});
        const double b = n.child("b").number();
        return MagneticPotential::rotational(b);
    }
    n.child("type").fail("unknown potential type \"" + type + "\"");
}

Schedule parse_schedule(const Node& n) {
    n.allow_keys({"kind", "values", "grow_samples"});
    Schedule s;
    const std::string kind = n.child("kind").string();
    if (kind == "s_values") {
        s.kind = ScheduleKind::s_values;
    } else if (kind == "delta_values") {
        s.kind = ScheduleKind::delta_values;
    } else if (kind == "n_values") {
        s.kind = ScheduleKind::n_values;
    } else {
        n.child("kind").fail("unknown schedule kind \"" + kind + "\"");
    }
    const Node values = n.child("values");
    for (std::size_t i = 0; i < values.array_size(); ++i) s.values.push_back(values.element(i).number());
    if (n.has("grow_samples")) s.grow_samples = n.child("grow_samples").boolean();
    build(n, [&] {
        s.validate();
        return 0;
    });
    return s;
}

IntegrationBudget parse_budget(const Node& n) {
    n.allow_keys({"outer", "outer_nodes", "samples", "sphere_resolution", "body_adapted_sphere", "grading_ratio",
                  "h_min_factor", "radial_nodes", "estimate_error"});
    IntegrationBudget b;
    if (n.has("outer")) {
        const std::string o = n.child("outer").string();
        if (o == "tensor_grid") {
            b.outer = OuterScheme::tensor_grid;
        } else if (o == "montecarlo") {
            b.outer = OuterScheme::montecarlo;
        } else {
            n.child("outer").fail("expected \"tensor_grid\" or \"montecarlo\"");
        }
    }
    auto int_in = [&](const char* key, long long lo, long long hi) {
        const Node c = n.child(key);
        const long long v = c.integer();
        if (v < lo || v > hi) c.fail("must be in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
        return v;
    };
    if (n.has("outer_nodes")) b.outer_nodes = static_cast<int>(int_in("outer_nodes", 0, 4096));
    if (n.has("samples")) b.samples = static_cast<std::size_t>(int_in("samples", 2, 100000000));
    if (n.has("sphere_resolution")) b.sphere_resolution = static_cast<int>(int_in("sphere_resolution", 8, 65536));
    if (n.has("body_adapted_sphere")) b.body_adapted_sphere = n.child("body_adapted_sphere").boolean();
    if (n.has("grading_ratio")) {
        b.grading_ratio = n.child("grading_ratio").number();
        if (!(b.grading_ratio > 1.0 && b.grading_ratio <= 2.0)) n.child("grading_ratio").fail("must be in (1, 2]");
    }
    if (n.has("h_min_factor")) {
        b.h_min_factor = n.child("h_min_factor").number();
        if (!(b.h_min_factor > 0.0 && b.h_min_factor < 0.1)) n.child("h_min_factor").fail("must be in (0, 0.1)");
    }
    if (n.has("radial_nodes")) b.radial_nodes = static_cast<int>(int_in("radial_nodes", 2, 256));
    if (n.has("estimate_error")) b.estimate_error = n.child("estimate_error").boolean();
    return b;
}

}  // namespace

Config parse_config(const std::string& text, const std::string& source) {
    json root;
    try {
        root = json::parse(text);
    } catch (const json::parse_error& e) {
        const Locator loc(text, source);
        std::ostringstream os;
        os << source << ":" << loc.line_at(e.byte > 0 ? e.byte - 1 : 0) << ": malformed JSON: " << e.what();
        throw ConfigError(os.str());
    }
    const Locator loc(text, source);
    const Node top{root, "", 0, loc};
    top.allow_keys({"schema_version", "body", "field", "potential", "p", "functional", "schedule", "budget",
                    "target_grid", "seed", "tolerance", "output", "vectors", "moment", "check_id2", "region",
                    "mollify"});
    if (top.child("schema_version").integer() != 1) top.child("schema_version").fail("only schema_version 1 is supported");

    Config c;
    c.source = source;
    if (top.has("body")) c.body = parse_body(top.child("body"));
    if (top.has("field")) c.field = parse_field(top.child("field"));
    if (top.has("potential")) c.potential = parse_potential(top.child("potential"), c.body ? c.body->dimension() : 0);
    if (top.has("p")) {
        c.p = top.child("p").number();
        c.p_given = true;
        if (!(c.p >= 1.0)) top.child("p").fail("p must be >= 1");
    }
    if (top.has("functional")) {
        const Node f = top.child("functional");
        f.allow_keys({"kind", "family"});
        const std::string kind = f.child("kind").string();
        if (kind == "gagliardo") {
            c.functional = FunctionalKind::gagliardo;
        } else if (kind == "nguyen") {
            c.functional = FunctionalKind::nguyen;
        } else if (kind == "bbm") {
            c.functional = FunctionalKind::bbm;
        } else {
            f.child("kind").fail("unknown functional \"" + kind + "\"");
        }
        if (f.has("family")) {
            if (c.functional != FunctionalKind::bbm) f.child("family").fail("only bbm takes a mollifier family");
            const std::string fam = f.child("family").string();
            if (fam == "ludwig") {
                c.family = MollifierKind::ludwig;
            } else if (fam == "shrinking_uniform") {
                c.family = MollifierKind::shrinking_uniform;
            } else {
                f.child("family").fail("unknown mollifier family \"" + fam + "\"");
            }
        } else if (c.functional == FunctionalKind::bbm) {
            f.fail("bbm needs \"family\"");
        }
    }
    if (top.has("schedule")) c.schedule = parse_schedule(top.child("schedule"));
    if (top.has("budget")) c.budget = parse_budget(top.child("budget"));
    if (top.has("target_grid")) {
        const Node g = top.child("target_grid");
        g.allow_keys({"nodes_per_axis", "sphere_resolution"});
        if (g.has("nodes_per_axis")) {
            const long long v = g.child("nodes_per_axis").integer();
            if (v < 0 || v > 100000) g.child("nodes_per_axis").fail("must be in [0, 100000]");
            c.target_grid.nodes_per_axis = static_cast<int>(v);
        }
        if (g.has("sphere_resolution")) {
            const long long v = g.child("sphere_resolution").integer();
            if (v < 8 || v > 65536) g.child("sphere_resolution").fail("must be in [8, 65536]");
            c.target_grid.sphere_resolution = static_cast<int>(v);
        }
    }
    if (top.has("seed")) {
        const Node s = top.child("seed");
        if (!s.j.is_number_unsigned() && !(s.j.is_number_integer() && s.j.get<long long>() >= 0)) {
            s.fail("seed must be a non-negative integer");
        }
        c.seed = s.j.get<std::uint64_t>();
    }
    c.budget.seed = c.seed;
    if (top.has("tolerance")) {
        c.tolerance = top.child("tolerance").number();
        if (c.tolerance < 0.0) top.child("tolerance").fail("tolerance must be >= 0");
    }
    if (top.has("output")) {
        const Node o = top.child("output");
        o.allow_keys({"dir"});
        c.out_dir = o.child("dir").string();
    }
    if (top.has("vectors")) {
        const Node v = top.child("vectors");
        for (std::size_t i = 0; i < v.array_size(); ++i) c.vectors.push_back(v.element(i).cvec());
    }
    if (top.has("moment")) {
        const Node m = top.child("moment");
        m.allow_keys({"method", "samples", "resolution"});
        const std::string method = m.has("method") ? m.child("method").string() : "quadrature";
        if (method == "montecarlo") {
            c.moment.montecarlo = true;
        } else if (method != "quadrature") {
            m.child("method").fail("expected \"quadrature\" or \"montecarlo\"");
        }
        if (m.has("samples")) {
            const long long s = m.child("samples").integer();
            if (s < 2) m.child("samples").fail("samples must be >= 2");
            c.moment.samples = static_cast<std::size_t>(s);
        }
        if (m.has("resolution")) {
            const long long r = m.child("resolution").integer();
            if (r < 8 || r > 65536) m.child("resolution").fail("must be in [8, 65536]");
            c.moment.resolution = static_cast<int>(r);
        }
    }
    if (top.has("check_id2")) {
        const Node k = top.child("check_id2");
        k.allow_keys({"count", "samples", "sigmas"});
        if (k.has("count")) {
            const long long v = k.child("count").integer();
            if (v < 1 || v > 1000000) k.child("count").fail("must be in [1, 1000000]");
            c.check_id2.count = static_cast<int>(v);
        }
        if (k.has("samples")) {
            const long long v = k.child("samples").integer();
            if (v < 2) k.child("samples").fail("samples must be >= 2");
            c.check_id2.samples = static_cast<std::size_t>(v);
        }
        if (k.has("sigmas")) {
            c.check_id2.sigmas = k.child("sigmas").number();
            if (c.check_id2.sigmas < 0.0) k.child("sigmas").fail("must be >= 0");
        }
    }
    if (top.has("region")) c.region = parse_region(top.child("region"));
    if (top.has("mollify")) {
        const Node m = top.child("mollify");
        for (std::size_t i = 0; i < m.array_size(); ++i) {
            const long long v = m.element(i).integer();
            if (v < 1 || v > 100000) m.element(i).fail("m must be in [1, 100000]");
            c.mollify.push_back(static_cast<int>(v));
        }
    }

    // Dimension coherence.
    if (c.body) {
        const int dim = c.body->dimension();
        if (c.field && c.field->dimension() != dim) top.child("field").fail("field dimension differs from the body");
        if (c.potential && c.potential->dimension() != dim) {
            top.child("potential").fail("potential dimension differs from the body");
        }
        for (std::size_t i = 0; i < c.vectors.size(); ++i) {
            if (c.vectors[i].size() != dim) top.child("vectors").element(i).fail("vector dimension differs from the body");
        }
        if (c.region && c.region->dimension() != dim) top.child("region").fail("region dimension differs from the body");
    }
    return c;
}

Config load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

StudyDefinition study_from_config(const Config& c) {
    auto need = [&](bool ok, const char* what) {
        if (!ok) throw ConfigError(c.source + ": limit-study needs \"" + what + "\"");
    };
    need(c.body.has_value(), "body");
    need(c.field != nullptr, "field");
    need(c.functional.has_value(), "functional");
    need(c.p_given, "p");
    const int dim = c.body->dimension();
    const MagneticPotential a = c.potential ? *c.potential : MagneticPotential::zero(dim);

    StudyDefinition s;
    s.field = c.field;
    switch (*c.functional) {
        case FunctionalKind::gagliardo:
            s.spec = FunctionalSpec::gagliardo(*c.body, c.p, 0.5, a);
            break;
        case FunctionalKind::nguyen:
            s.spec = FunctionalSpec::nguyen(*c.body, c.p, 0.1, a);
            break;
        case FunctionalKind::bbm: {
            const MollifierFamily fam = *c.family == MollifierKind::ludwig ? MollifierFamily::ludwig(c.p, dim)
                                                                          : MollifierFamily::shrinking_uniform(c.p, dim);
            s.spec = FunctionalSpec::bbm(*c.body, c.p, fam, 4, a);
            break;
        }
    }
    s.schedule = c.schedule ? *c.schedule : Schedule::for_kind(*c.functional);
    s.budget = c.budget;
    s.target_grid = c.target_grid;
    s.tolerance = c.tolerance;

    // Reject incompatible combinations before any work starts.
    try {
        s.schedule.validate();
        FunctionalSpec first = s.spec;
        const double v0 = s.schedule.values.front();
        if (first.kind == FunctionalKind::gagliardo) first.s = v0;
        if (first.kind == FunctionalKind::nguyen) first.delta = v0;
        if (first.kind == FunctionalKind::bbm) first.n = static_cast<int>(v0);
        const bool expected = (first.kind == FunctionalKind::gagliardo && s.schedule.kind == ScheduleKind::s_values) ||
                              (first.kind == FunctionalKind::nguyen && s.schedule.kind == ScheduleKind::delta_values) ||
                              (first.kind == FunctionalKind::bbm && s.schedule.kind == ScheduleKind::n_values);
        if (!expected) throw std::invalid_argument("schedule kind does not match the functional");
        first.validate();
        const bool indicator = s.field->smoothness() == Smoothness::indicator;
        if (indicator && first.kind == FunctionalKind::nguyen) {
            throw std::invalid_argument("nguyen does not accept indicator fields");
        }
        if (indicator && (c.p != 1.0 || !a.is_zero())) {
            throw std::invalid_argument("indicator fields need p = 1 and A = 0");
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(c.source + ": " + e.what());
    }
    return s;
}

}  // namespace aniso::tools
