#pragma once

// Orchestration: run configuration with presets, deterministic parallel
// (beta, trajectory) sweeps, CSV serialization, NDJSON manifest.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qduff/diagnostics.hpp"
#include "qduff/lindblad.hpp"
#include "qduff/qsd.hpp"

namespace qduff {

struct RunConfig {
    double Gamma = 0.3;
    double g = 0.3;
    double Omega = 1.0;
    std::vector<double> beta_list = {1.0};

    std::size_t steps_per_period = 4096;
    std::size_t cutoff = 0;  // 0 = auto per beta
    double recenter_threshold = 1.0;
    double leakage_bound = 1e-6;
    bool renormalize_every_step = true;
    bool moving_frame = true;

    std::size_t periods_total = 600;
    std::size_t transient_periods = 100;
    // Dense enough that the drive line and its broadband skirt stay above the
    // rise metric's reference band instead of folding into it.
    std::size_t fine_sample_per_period = 16;

    double alpha_re = 0.7;
    double alpha_im = -0.2;

    std::uint64_t base_seed = 1;
    std::size_t trajectories = 1;

    std::string output_dir = "out";

    std::size_t knot_count = 24;
    double threshold_fraction = 0.5;
    double band_low_edge = 0.1;
    double band_ref_lo = 0.5;
    double band_ref_hi = 0.8;

    void validate() const;
    ModelParams model_for(double beta) const;
    std::size_t cutoff_for(double beta) const;
    IntegratorConfig integrator_for(double beta) const;
};

/// Parse a flat key-value config ("model.beta = 0.3" per line; '#' comments).
/// Unknown keys are a hard error. Parsing starts from `base` (defaults or a
/// preset) and overrides fields present in the text.
RunConfig parse_config(const std::string& text, RunConfig base = RunConfig{});

/// Named presets matching the figure captions: "fig1" (Gamma=0.125) and
/// "fig3" (Gamma=0.3), both with beta in {0.01, 0.3, 1.0}.
RunConfig preset_config(const std::string& name);

struct JobResult {
    double beta = 0.0;
    std::size_t beta_index = 0;
    std::size_t trajectory_index = 0;
    std::uint64_t seed = 0;
    bool ok = false;
    std::string error;
    TrajectoryRecord record;  // valid when ok
};

struct RunManifest {
    std::vector<JobResult> jobs;  // records dropped, status only
    std::map<std::string, std::uint64_t> file_checksums;
    std::string version;
    double wall_seconds = 0.0;
    bool all_ok = true;
};

/// Execute all (beta, trajectory) jobs, write per-beta CSV products, the
/// sweep-level transition report, and the NDJSON manifest. Returns the
/// manifest; all_ok=false when any trajectory aborted.
RunManifest run(const RunConfig& config, std::size_t jobs = 1);

/// Classical reference products for the config's (Gamma, g, Omega):
/// section CSV and a Lyapunov report.
RunManifest run_classical(const RunConfig& config);

struct OracleCheckResult {
    EnsembleSummary ensemble;
    ObservableSeries oracle;
    std::vector<double> checkpoints;
    bool pass = false;
    double worst_sigma = 0.0;  // max |mean - oracle| / stderr over all checks
};

/// QSD-ensemble-versus-master-equation comparison at 3 standard errors.
OracleCheckResult oracle_check(const RunConfig& config, double beta, std::size_t cutoff,
                               std::size_t trajectories, std::size_t periods,
                               std::size_t num_checkpoints = 10, std::size_t jobs = 1);

std::uint64_t fnv1a_file(const std::string& path);

std::string format_double(double v);  // bit-stable CSV float formatting

}  // namespace qduff
