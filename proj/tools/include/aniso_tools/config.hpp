#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aniso/convex_body.hpp"
#include "aniso/fields.hpp"
#include "aniso/limit_analysis.hpp"
#include "aniso/nonlocal_functionals.hpp"

namespace aniso::tools {

/// Bad configuration or usage; maps to exit code 2.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct MomentConfig {
    bool montecarlo = false;
    std::size_t samples = 20000;
    int resolution = 2048;
};

struct CheckId2Config {
    int count = 100;
    std::size_t samples = 20000;
    /// Allowed |difference| in units of the combined error.
    double sigmas = 3.0;
};

/// Everything a subcommand may read. Keys are optional individually; each
/// command checks for the ones it needs.
struct Config {
    std::string source;  ///< file path, for messages
    std::optional<ConvexBody> body;
    FieldPtr field;
    std::optional<MagneticPotential> potential;
    double p = 2.0;
    bool p_given = false;
    std::optional<FunctionalKind> functional;
    std::optional<MollifierKind> family;
    std::optional<Schedule> schedule;
    IntegrationBudget budget;
    GridConfig target_grid;
    std::uint64_t seed = 1;
    double tolerance = 0.01;
    std::string out_dir;
    std::vector<CVec> vectors;
    MomentConfig moment;
    CheckId2Config check_id2;
    std::optional<Region> region;
    std::vector<int> mollify;
};

/// Parses strict JSON (schema_version 1). Unknown keys, wrong types and
/// incoherent dimensions throw ConfigError with "path:line: message".
Config parse_config(const std::string& text, const std::string& source = "config");
Config load_config(const std::string& path);

/// Builds the study for limit-study; throws ConfigError when something is missing.
StudyDefinition study_from_config(const Config& config);

}  // namespace aniso::tools
