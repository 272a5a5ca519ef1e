#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "extraction/boundary.hpp"
#include "extraction/oracle.hpp"
#include "extraction/params.hpp"
#include "extraction/sim.hpp"

namespace extraction::config {

struct SimSection {
    sim::SimConfig sim;
    double x = 0.5;
    double y = 1.0;
    bool dominance = false;
    std::vector<double> shifts;  // absolute boundary shifts; empty selects +-5% of the boundary range
    bool trace = false;
    int trace_stride = 100;
};

struct SweepSection {
    std::string parameter = "a";
    std::vector<double> values{0.4, 0.5, 0.6, 0.7};
};

struct VerifySection {
    std::size_t samples = 500;  // states per region
    std::uint64_t seed = 17;
};

struct OutputSection {
    std::string dir = "out";
    std::string format = "csv";  // csv | json
};

/// Everything a subcommand needs. The [model] section is mandatory and must
/// set all six constants; every other key has the default shown in
/// default_config_text().
struct RunConfig {
    ModelParams model;
    QuadratureSpec quadrature;
    boundary::Grading boundary;
    std::optional<oracle::GridSpec> grid;  // absent: default_grid(sol, 400, 60)
    SimSection sim;
    SweepSection sweep;
    VerifySection verify;
    OutputSection output;

    /// Throws ConfigError (or DomainError from the model) on invalid values.
    void validate() const;
};

/// Parses an INI document with sections [model] [quadrature] [boundary]
/// [grid] [sim] [sweep] [verify] [output]. Unknown sections or keys,
/// malformed numbers and a missing model constant raise ConfigError.
RunConfig parse_config(std::istream& in);
RunConfig load_config(const std::string& path);

/// EXTRACT_OUT_DIR and EXTRACT_SEED.
void apply_environment(RunConfig& cfg);

/// A complete document with every key at its default.
std::string default_config_text();

std::vector<double> parse_list(const std::string& text);

}  // namespace extraction::config
