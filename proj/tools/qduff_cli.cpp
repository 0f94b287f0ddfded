// Command-line front end: run/sweep QSD trajectories, classical references,
// and the ensemble-versus-master-equation oracle check.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "qduff/runner.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw qduff::Error("cannot read config file " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir;
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::size_t jobs = 1;
    std::vector<std::string> overrides;
};

qduff::RunConfig resolve_config(const CommonOpts& o) {
    qduff::RunConfig cfg;
    if (!o.preset.empty()) cfg = qduff::preset_config(o.preset);
    if (!o.config_path.empty()) cfg = qduff::parse_config(read_file(o.config_path), cfg);
    if (!o.overrides.empty()) {
        std::string text;
        for (const auto& kv : o.overrides) text += kv + "\n";
        cfg = qduff::parse_config(text, cfg);
    }
    if (o.seed_set) cfg.base_seed = o.seed;
    if (!o.out_dir.empty()) cfg.output_dir = o.out_dir;
    cfg.validate();
    return cfg;
}

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "Config file (flat key = value lines)");
    cmd->add_option("--preset", o.preset, "Named preset: fig1 or fig3");
    cmd->add_option("--seed", o.seed, "Base seed")->each([&](const std::string&) {
        o.seed_set = true;
    });
    cmd->add_option("--out", o.out_dir, "Output directory");
    cmd->add_option("--jobs", o.jobs, "Worker threads");
    cmd->add_option("--set", o.overrides, "Inline config override, e.g. --set model.beta=0.3");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Quantum state diffusion simulator for the driven Duffing oscillator"};
    app.require_subcommand(1);

    CommonOpts run_opts, sweep_opts, classical_opts, oracle_opts;

    auto* cmd_run = app.add_subcommand("run", "Integrate trajectories for a single beta");
    add_common(cmd_run, run_opts);

    auto* cmd_sweep = app.add_subcommand("sweep", "Run every beta in the config's beta_list");
    add_common(cmd_sweep, sweep_opts);

    auto* cmd_classical =
        app.add_subcommand("classical", "Classical section, fine series and Lyapunov report");
    add_common(cmd_classical, classical_opts);

    auto* cmd_oracle = app.add_subcommand(
        "oracle-check", "Compare a QSD ensemble against the dense master-equation oracle");
    add_common(cmd_oracle, oracle_opts);
    double oc_beta = 1.0;
    std::size_t oc_cutoff = 30, oc_traj = 500, oc_periods = 10;
    cmd_oracle->add_option("--beta", oc_beta, "beta value");
    cmd_oracle->add_option("--cutoff", oc_cutoff, "Fock cutoff (dense oracle too)");
    cmd_oracle->add_option("--trajectories", oc_traj, "Ensemble size M");
    cmd_oracle->add_option("--periods", oc_periods, "Drive periods to integrate");

    CLI11_PARSE(app, argc, argv);

    try {
        if (cmd_run->parsed() || cmd_sweep->parsed()) {
            const CommonOpts& o = cmd_run->parsed() ? run_opts : sweep_opts;
            qduff::RunConfig cfg = resolve_config(o);
            if (cmd_run->parsed() && cfg.beta_list.size() > 1)
                cfg.beta_list = {cfg.beta_list.front()};
            const qduff::RunManifest mf = qduff::run(cfg, o.jobs);
            std::size_t aborted = 0;
            for (const auto& j : mf.jobs)
                if (!j.ok) {
                    ++aborted;
                    std::cerr << "abort: beta=" << j.beta << " traj=" << j.trajectory_index
                              << ": " << j.error << "\n";
                }
            std::cout << mf.jobs.size() - aborted << "/" << mf.jobs.size()
                      << " jobs ok, outputs in " << cfg.output_dir << " ("
                      << mf.wall_seconds << " s)\n";
            return mf.all_ok ? 0 : 1;
        }
        if (cmd_classical->parsed()) {
            qduff::RunConfig cfg = resolve_config(classical_opts);
            qduff::run_classical(cfg);
            std::cout << "classical products written to " << cfg.output_dir << "\n";
            return 0;
        }
        if (cmd_oracle->parsed()) {
            qduff::RunConfig cfg = resolve_config(oracle_opts);
            const auto res = qduff::oracle_check(cfg, oc_beta, oc_cutoff, oc_traj, oc_periods,
                                                 10, oracle_opts.jobs);
            std::filesystem::create_directories(cfg.output_dir);
            std::ofstream out(cfg.output_dir + "/oracle_check.csv", std::ios::binary);
            out << "t,q_mean,q_stderr,q_oracle,p_mean,p_stderr,p_oracle,"
                   "energy_mean,energy_stderr,energy_oracle\n";
            for (std::size_t i = 0; i < res.checkpoints.size(); ++i) {
                out << qduff::format_double(res.checkpoints[i]) << ','
                    << qduff::format_double(res.ensemble.q_mean[i]) << ','
                    << qduff::format_double(res.ensemble.q_stderr[i]) << ','
                    << qduff::format_double(res.oracle.q_exp[i]) << ','
                    << qduff::format_double(res.ensemble.p_mean[i]) << ','
                    << qduff::format_double(res.ensemble.p_stderr[i]) << ','
                    << qduff::format_double(res.oracle.p_exp[i]) << ','
                    << qduff::format_double(res.ensemble.energy_mean[i]) << ','
                    << qduff::format_double(res.ensemble.energy_stderr[i]) << ','
                    << qduff::format_double(res.oracle.energy[i]) << '\n';
            }
            std::ofstream verdict(cfg.output_dir + "/oracle_check_verdict.txt",
                                  std::ios::binary);
            verdict << (res.pass ? "PASS" : "FAIL") << " worst_sigma="
                    << qduff::format_double(res.worst_sigma) << "\n";
            std::cout << (res.pass ? "PASS" : "FAIL") << " (worst deviation "
                      << res.worst_sigma << " standard errors)\n";
            return res.pass ? 0 : 1;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
