#include "aniso_tools/commands.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include "CLI11.hpp"
#include "aniso/anisotropic_norms.hpp"
#include "aniso/fields.hpp"
#include "aniso/limit_analysis.hpp"
#include "aniso/random.hpp"
#include "aniso_tools/acceptance.hpp"
#include "aniso_tools/config.hpp"
#include "aniso_tools/report_io.hpp"
#include "json.hpp"

namespace aniso::tools {

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string vec_text(const CVec& v) {
    std::string s = "(";
    for (int i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += short_num(v[i].real());
        if (v[i].imag() != 0.0) s += (v[i].imag() < 0 ? "-" : "+") + short_num(std::abs(v[i].imag())) + "i";
    }
    return s + ")";
}

Config load(const CommandOptions& o) {
    if (o.config_path.empty()) throw ConfigError("--config is required");
    Config c = load_config(o.config_path);
    if (o.seed) {
        c.seed = *o.seed;
        c.budget.seed = *o.seed;
    }
    if (o.threads < 1) throw ConfigError("--threads must be >= 1");
    c.budget.threads = o.threads;
    c.target_grid.threads = o.threads;
    return c;
}

/// Output directory from --out or the config; it must already exist.
std::string output_dir(const CommandOptions& o, const Config* c, bool required) {
    std::string dir = !o.out_dir.empty() ? o.out_dir : (c ? c->out_dir : std::string());
    if (dir.empty()) {
        if (required) throw ConfigError("an output directory is required (--out or output.dir)");
        return dir;
    }
    if (!std::filesystem::is_directory(dir)) throw ConfigError("output directory does not exist: " + dir);
    return dir;
}

std::string join(const std::string& dir, const std::string& name) {
    return (std::filesystem::path(dir) / name).string();
}

template <class F>
int guarded(std::ostream& err, F&& body) {
    try {
        return body();
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitFail;
    }
}

}  // namespace

int cmd_norms(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Config c = load(o);
        if (!c.body) throw ConfigError(c.source + ": norms needs \"body\"");
        if (c.vectors.empty()) throw ConfigError(c.source + ": norms needs \"vectors\"");
        const std::string dir = output_dir(o, &c, false);
        MomentMethod method = SphereQuadrature{c.moment.resolution};
        if (c.moment.montecarlo) method = BodyMonteCarlo{c.moment.samples, derive_seed(c.seed, "norms_body_samples")};
        const MomentNormEvaluator ev(*c.body, c.p, method);

        std::string csv = "index,gauge,moment_norm,error\n";
        out << "body " << c.body->describe() << ", p = " << c.p << "\n";
        out << "vector                          gauge            moment_norm      error\n";
        for (std::size_t i = 0; i < c.vectors.size(); ++i) {
            const CVec& v = c.vectors[i];
            bool real = true;
            RVec re(v.size());
            for (int d = 0; d < v.size(); ++d) {
                re[d] = v[d].real();
                real = real && v[d].imag() == 0.0;
            }
            const double gauge = real ? c.body->gauge(re) : std::nan("");
            const Estimate m = ev.evaluate(v, i);
            char line[160];
            std::snprintf(line, sizeof line, "%-30s  %-15s  %-15.10g  %.3g\n", vec_text(v).c_str(),
                          real ? short_num(gauge).c_str() : "-", m.value, m.error);
            out << line;
            csv += std::to_string(i) + "," + (real ? g17(gauge) : std::string("nan")) + "," + g17(m.value) + "," +
                   g17(m.error) + "\n";
        }
        if (!dir.empty()) write_text_file(join(dir, "norms.csv"), csv);
        return static_cast<int>(kExitPass);
    });
}

int cmd_check_id2(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Config c = load(o);
        if (!c.body) throw ConfigError(c.source + ": check-id2 needs \"body\"");
        const std::string dir = output_dir(o, &c, false);
        const int dim = c.body->dimension();
        const MomentNormEvaluator mc(*c.body, c.p,
                                     BodyMonteCarlo{c.check_id2.samples, derive_seed(c.seed, "id2_body_samples")});
        const MomentNormEvaluator sph(*c.body, c.p, SphereQuadrature{});
        std::string csv = "index,body_integral,body_error,sphere_integral,sphere_error,z\n";
        int failures = 0;
        double worst = 0.0;
        for (int i = 0; i < c.check_id2.count; ++i) {
            Rng rng = make_rng(c.seed, "check_id2_vectors", static_cast<std::uint64_t>(i));
            CVec v(dim);
            for (int d = 0; d < dim; ++d) {
                const double re = standard_normal(rng);
                v[d] = complex(re, standard_normal(rng));
            }
            const Estimate a = mc.evaluate(v, 0);
            const Estimate s = sph.sphere(v);
            const double combined = std::hypot(a.error, s.error);
            const double diff = std::abs(a.value - s.value);
            const double z = combined > 0.0 ? diff / combined : (diff > 0.0 ? INFINITY : 0.0);
            worst = std::max(worst, z);
            if (!(diff <= c.check_id2.sigmas * combined)) ++failures;
            csv += std::to_string(i) + "," + g17(a.value) + "," + g17(a.error) + "," + g17(s.value) + "," +
                   g17(s.error) + "," + g17(z) + "\n";
        }
        if (!dir.empty()) write_text_file(join(dir, "id2.csv"), csv);
        out << "body " << c.body->describe() << ", p = " << c.p << ": " << failures << " of " << c.check_id2.count
            << " vectors outside " << c.check_id2.sigmas << " combined errors (max z = " << short_num(worst) << ")\n";
        return static_cast<int>(failures == 0 ? kExitPass : kExitFail);
    });
}

int cmd_limit_study(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Config c = load(o);
        const std::string dir = output_dir(o, &c, true);
        const StudyDefinition study = study_from_config(c);
        const ConvergenceReport r = run_study(study);
        write_report_files(r, dir);
        out << "study: " << r.study.functional << " p=" << r.study.p << " body=" << r.study.body
            << " field=" << r.study.field << "\n";
        for (const StudyPoint& pt : r.points) {
            out << "  " << to_string(r.study.schedule_kind) << " " << short_num(pt.parameter) << "  value "
                << short_num(pt.value) << "  error " << short_num(pt.error) << "\n";
        }
        out << "limit " << short_num(r.extrapolation.limit) << " +- " << short_num(r.extrapolation.uncertainty)
            << " (rate " << short_num(r.extrapolation.rate) << ", aitken " << short_num(r.extrapolation.aitken)
            << ")\n";
        out << "target (" << to_string(r.target_mode) << ") " << short_num(r.target) << ", relative gap "
            << short_num(r.gap) << ", dominant error: " << r.dominant_error << "\n";
        out << (r.pass ? "PASS" : "FAIL") << "\n";
        return static_cast<int>(r.pass ? kExitPass : kExitFail);
    });
}

int cmd_perimeter(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const Config c = load(o);
        if (!c.body) throw ConfigError(c.source + ": perimeter needs \"body\"");
        if (!c.region) throw ConfigError(c.source + ": perimeter needs \"region\"");
        const std::string dir = output_dir(o, &c, false);
        if (!c.mollify.empty() && c.region->dimension() > 2) {
            throw ConfigError(c.source + ": mollified indicators are limited to N <= 2");
        }
        const double per = anisotropic_perimeter(*c.region, *c.body);
        out << "region " << c.region->describe() << ", body " << c.body->describe() << "\n";
        out << "anisotropic perimeter " << short_num(per) << "\n";
        std::string csv = "m,total_variation,error,perimeter,gap\n";
        const auto ind = indicator_field(*c.region);
        const MagneticPotential zero = MagneticPotential::zero(c.region->dimension());
        for (int m : c.mollify) {
            const Estimate tv = total_variation_smooth(*mollify(ind, m), zero, *c.body, c.target_grid);
            const double gap = per != 0.0 ? std::abs(tv.value - per) / per : std::abs(tv.value);
            out << "  m=" << m << "  TV " << short_num(tv.value) << " +- " << short_num(tv.error) << "  gap "
                << short_num(gap) << "\n";
            csv += std::to_string(m) + "," + g17(tv.value) + "," + g17(tv.error) + "," + g17(per) + "," + g17(gap) +
                   "\n";
        }
        if (!dir.empty()) write_text_file(join(dir, "perimeter.csv"), csv);
        return static_cast<int>(kExitPass);
    });
}

int cmd_acceptance(const CommandOptions& o, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        AcceptanceOptions opt;
        if (!o.config_path.empty()) throw ConfigError("acceptance takes no config; budgets and seeds are pinned");
        if (o.seed) opt.seed = *o.seed;
        if (o.threads < 1) throw ConfigError("--threads must be >= 1");
        opt.threads = o.threads;
        for (const std::string& item : o.only) {
            std::stringstream ss(item);
            std::string part;
            while (std::getline(ss, part, ',')) {
                if (!part.empty()) opt.only.push_back(part);
            }
        }
        const std::string dir = output_dir(o, nullptr, false);
        const std::vector<CriterionOutcome> results = run_acceptance(opt);
        bool all = true;
        for (const CriterionOutcome& r : results) {
            all = all && r.pass;
            if (!dir.empty()) {
                for (const auto& [name, content] : r.csv) write_text_file(join(dir, name), content);
            }
        }
        if (o.json) {
            nlohmann::json doc;
            doc["schema_version"] = 1;
            doc["seed"] = opt.seed;
            doc["threads"] = opt.threads;
            doc["pass"] = all;
            nlohmann::json list = nlohmann::json::array();
            for (const CriterionOutcome& r : results) {
                list.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail},
                                {"seconds", r.seconds}});
            }
            doc["criteria"] = list;
            out << doc.dump(2) << "\n";
        } else {
            for (const CriterionOutcome& r : results) out << format_outcome(r) << "\n";
            out << (all ? "ALL PASS" : "SOME CRITERIA FAILED") << "\n";
        }
        return static_cast<int>(all ? kExitPass : kExitFail);
    });
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Anisotropic magnetic nonlocal functionals: norms, identities and limit studies", "aniso"};
    app.require_subcommand(1);
    CommandOptions o;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub, bool with_config) {
        if (with_config) sub->add_option("--config", o.config_path, "JSON configuration file")->required();
        sub->add_option("--out", o.out_dir, "existing output directory");
        sub->add_option("--seed", seed, "root seed (overrides the config)");
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::Range(1, 1024));
    };
    CLI::App* norms = app.add_subcommand("norms", "gauge and moment-body norms of listed vectors");
    add_common(norms, true);
    CLI::App* id2 = app.add_subcommand("check-id2", "body integral vs sphere integral of the moment norm");
    add_common(id2, true);
    CLI::App* study = app.add_subcommand("limit-study", "run a parameter schedule and extrapolate the limit");
    add_common(study, true);
    CLI::App* perim = app.add_subcommand("perimeter", "anisotropic perimeter and mollified total variation");
    add_common(perim, true);
    CLI::App* acc = app.add_subcommand("acceptance", "run the acceptance suite with pinned budgets");
    add_common(acc, false);
    acc->add_option("--only", o.only, "criterion ids or names (comma separated)");
    acc->add_flag("--json", o.json, "machine-readable summary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitPass : kExitUsage;
    }
    for (CLI::App* sub : {norms, id2, study, perim, acc}) {
        if (sub->parsed() && sub->count("--seed") > 0) o.seed = seed;
    }
    if (norms->parsed()) return cmd_norms(o, out, err);
    if (id2->parsed()) return cmd_check_id2(o, out, err);
    if (study->parsed()) return cmd_limit_study(o, out, err);
    if (perim->parsed()) return cmd_perimeter(o, out, err);
    return cmd_acceptance(o, out, err);
}

}  // namespace aniso::tools
