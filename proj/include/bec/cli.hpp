#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bec/errors.hpp"
#include "bec/lattice.hpp"
#include "bec/tdlimit.hpp"

namespace bec::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitNumeric = 3;

/// Config rejected by the schema; what() names the offending field.
class ConfigError : public DomainError {
public:
    using DomainError::DomainError;
};

enum class Command { Sweep, SolveMu, Genfun, Condense, KacCheck, Equiv, Scaling, Positivity };

std::string to_string(Command c);

struct Grid {
    std::vector<double> beta;
    std::vector<double> mu;
    std::vector<double> rho;
    std::vector<double> L;

    bool by_rho() const { return !rho.empty(); }
    const std::vector<double>& control() const { return by_rho() ? rho : mu; }
};

struct RunConfig {
    Command command = Command::Sweep;
    ModelParams model;
    Grid grid;
    std::optional<TestFunction> tf;
    std::string format = "csv";
    // command options
    std::vector<double> deltas{0.5};
    tdlimit::KacFamily family = tdlimit::KacFamily::Interacting;
    double quad_tol = 1e-10;
    int sets = 20;
    std::uint64_t seed = 1;
    /// The document as given, echoed into JSON results and hashed for file names.
    nlohmann::json raw;
};

/// Full schema validation; throws ConfigError.
RunConfig parse_config(const nlohmann::json& doc);

struct Artifact {
    std::string filename;
    std::string content;
};

/// Runs every grid point in memory and returns the files to write. One line
/// per grid point goes to log. Nothing is written to disk here.
std::vector<Artifact> run(const RunConfig& config, std::ostream& log);

/// CSV layouts per command, for --help.
std::string columns_help();

}  // namespace bec::cli
