#pragma once

#include "formation/bifurcation.hpp"
#include "formation/dynamics.hpp"
#include "formation/equilibria.hpp"
#include "formation/rigidity.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace formation::cli {

inline constexpr const char* kFormat = "formation-forge/1";

enum class ExperimentType { census, spectrum, sweep, sotomayor, simulate, rigidity };

std::string_view to_string(ExperimentType t);

struct Experiment {
    ExperimentType type = ExperimentType::census;
    CensusOptions census;
    std::vector<ReferenceSpectrum> reference;  // labels (census) or reference tuples (spectrum)
    double eps = 0.2;
    int samples = 21;
    std::size_t edge = 2;  // 0-based; 1-based in the file
    bool require_singular = true;
    std::optional<num::Vector> positions;
    double t_end = 10.0;
    double step = 1e-3;
    std::size_t sample_every = 100;
};

struct Scenario {
    std::string name;
    FormationGraph graph;
    num::Vector values;           // lengths as written, in file order
    std::vector<std::size_t> order;  // edge (0-based) receiving each value
    bool values_are_squared = false;
    TargetLengths lengths;
    ControlLaw law;
    Experiment experiment;
    std::uint64_t seed = 1;
    std::string output;
};

/// Parses and validates a scenario. Throws ConfigError with code
/// "parse_error" (line and column in the message) or "schema_error", and the
/// graph, law and length errors of the library.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);

struct RunOptions {
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<double> tol;
};

struct Artifact {
    std::string name;
    std::string content;
};

struct Outputs {
    std::string summary;
    std::vector<Artifact> files;
};

/// Runs the experiment in memory; no files are touched.
Outputs run_experiment(const Scenario& s, const RunOptions& opts = {});

struct RunResult {
    int exit_code = 0;
    std::string out_dir;
    std::string summary;
    std::vector<std::string> artifacts;
    std::string error_code;
    std::string error_message;
    std::string error_record;  // one-line JSON
};

/// Parse, run and write artifacts plus summary.txt. Never throws for
/// library errors: 2 = validation error, 3 = numerical failure.
RunResult run_scenario(const std::string& path, const RunOptions& opts = {});

/// 2 for input validation codes, 3 for numerical failures.
int exit_code_for(const std::string& error_code);

/// Fixed significant digits, no negative zero.
std::string format_number(double v, int significant = 6);

/// Eigenvalues as "a+bi" tokens separated by spaces.
std::string format_spectrum(const num::Spectrum& s);

/// Labels from reference spectra: each tuple names its best match and any
/// record with an identical spectrum (mirror twins).
std::vector<std::string> assign_labels(const std::vector<EquilibriumRecord>& records,
                                       const std::vector<ReferenceSpectrum>& reference);

std::string census_csv(const CensusReport& rep, const std::vector<std::string>& labels);
std::string census_report(const std::string& title, const CensusReport& rep, const std::vector<std::string>& labels);
std::string sweep_csv(const std::vector<BranchPoint>& points);
std::string sweep_report(const std::vector<BranchPoint>& points, const TranscriticalReport& det);
std::string rigidity_report(const Framework& f);

}  // namespace formation::cli
