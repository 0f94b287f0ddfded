#include "qduff/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <thread>

#include "qduff/classical.hpp"

namespace qduff {

namespace fs = std::filesystem;

static const char* kVersion = "qduff 0.1.0";

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::uint64_t fnv1a_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("fnv1a_file: cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char c;
    while (in.get(c)) {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ULL;
    }
    return h;
}

void RunConfig::validate() const {
    if (beta_list.empty()) throw Error("config: beta_list must not be empty");
    for (double b : beta_list)
        if (!(b > 0.0)) throw Error("config: beta must be positive");
    if (!(Omega > 0.0)) throw Error("config: Omega must be positive");
    if (Gamma < 0.0 || g < 0.0) throw Error("config: Gamma and g must be >= 0");
    if (periods_total <= transient_periods)
        throw Error("config: periods_total must exceed transient_periods");
    if (trajectories == 0) throw Error("config: need at least one trajectory");
    integrator_for(beta_list.front()).validate();
}

ModelParams RunConfig::model_for(double beta) const {
    ModelParams m;
    m.Gamma = Gamma;
    m.g = g;
    m.Omega = Omega;
    m.beta = beta;
    return m;
}

std::size_t RunConfig::cutoff_for(double beta) const {
    if (cutoff != 0) return cutoff;
    if (beta >= 0.75) return 64;
    if (beta >= 0.2) return 128;
    return 256;
}

IntegratorConfig RunConfig::integrator_for(double beta) const {
    IntegratorConfig ic;
    ic.steps_per_period = steps_per_period;
    ic.cutoff = cutoff_for(beta);
    ic.recenter_threshold = recenter_threshold;
    ic.leakage_bound = leakage_bound;
    ic.renormalize_every_step = renormalize_every_step;
    ic.moving_frame = moving_frame;
    return ic;
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

double parse_num(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error("config: value '" + v + "' for key '" + key + "' is not a number");
    }
}

std::size_t parse_uint(const std::string& key, const std::string& v) {
    const double x = parse_num(key, v);
    if (x < 0.0 || x != std::floor(x))
        throw Error("config: key '" + key + "' needs a non-negative integer");
    return static_cast<std::size_t>(x);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw Error("config: key '" + key + "' needs a boolean (true/false)");
}

}  // namespace

RunConfig parse_config(const std::string& text, RunConfig base) {
    RunConfig c = base;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw Error("config: expected 'key = value' in: " + line);
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));

        if (key == "model.Gamma") c.Gamma = parse_num(key, val);
        else if (key == "model.g") c.g = parse_num(key, val);
        else if (key == "model.Omega") c.Omega = parse_num(key, val);
        else if (key == "model.beta") c.beta_list = {parse_num(key, val)};
        else if (key == "model.beta_list") {
            c.beta_list.clear();
            std::istringstream bs(val);
            std::string tok;
            while (std::getline(bs, tok, ',')) c.beta_list.push_back(parse_num(key, trim(tok)));
            if (c.beta_list.empty()) throw Error("config: empty beta_list");
        }
        else if (key == "integrator.steps_per_period") c.steps_per_period = parse_uint(key, val);
        else if (key == "integrator.cutoff") c.cutoff = parse_uint(key, val);
        else if (key == "integrator.recenter_threshold") c.recenter_threshold = parse_num(key, val);
        else if (key == "integrator.leakage_bound") c.leakage_bound = parse_num(key, val);
        else if (key == "integrator.renormalize_every_step")
            c.renormalize_every_step = parse_bool(key, val);
        else if (key == "integrator.moving_frame") c.moving_frame = parse_bool(key, val);
        else if (key == "protocol.periods_total") c.periods_total = parse_uint(key, val);
        else if (key == "protocol.transient_periods") c.transient_periods = parse_uint(key, val);
        else if (key == "protocol.fine_sample_per_period")
            c.fine_sample_per_period = parse_uint(key, val);
        else if (key == "initial.alpha_re") c.alpha_re = parse_num(key, val);
        else if (key == "initial.alpha_im") c.alpha_im = parse_num(key, val);
        else if (key == "seeds.base") c.base_seed = static_cast<std::uint64_t>(parse_num(key, val));
        else if (key == "seeds.trajectories") c.trajectories = parse_uint(key, val);
        else if (key == "outputs.dir") c.output_dir = val;
        else if (key == "diagnostics.knot_count") c.knot_count = parse_uint(key, val);
        else if (key == "diagnostics.threshold_fraction") c.threshold_fraction = parse_num(key, val);
        else if (key == "diagnostics.band_low_edge") c.band_low_edge = parse_num(key, val);
        else if (key == "diagnostics.band_ref_lo") c.band_ref_lo = parse_num(key, val);
        else if (key == "diagnostics.band_ref_hi") c.band_ref_hi = parse_num(key, val);
        else throw Error("config: unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

RunConfig preset_config(const std::string& name) {
    RunConfig c;
    if (name == "fig1") {
        c.Gamma = 0.125;
        c.beta_list = {0.01, 0.3, 1.0};
    } else if (name == "fig3") {
        c.Gamma = 0.3;
        c.beta_list = {0.01, 0.3, 1.0};
    } else {
        throw Error("unknown preset '" + name + "' (available: fig1, fig3)");
    }
    return c;
}

namespace {

struct CsvFile {
    std::ofstream out;
    std::string path;
    explicit CsvFile(const std::string& p) : out(p, std::ios::binary), path(p) {
        if (!out) throw Error("cannot open output file " + p);
    }
    void row(const std::vector<std::string>& cells) {
        for (std::size_t i = 0; i < cells.size(); ++i) {
            if (i) out << ',';
            out << cells[i];
        }
        out << '\n';
    }
};

std::string beta_tag(double beta) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", beta);
    return buf;
}

void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& body) {
    jobs = std::max<std::size_t>(1, jobs);
    if (jobs == 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(jobs);
    for (std::size_t w = 0; w < jobs; ++w) {
        workers.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                body(i);
            }
        });
    }
    for (auto& t : workers) t.join();
}

void write_strobe_csv(const std::string& path, const TrajectoryRecord& rec) {
    CsvFile f(path);
    f.out << "period,t,q_exp,p_exp,q_scaled,p_scaled,energy,norm_deficit_max,leakage_max\n";
    const double b = rec.params.beta;
    for (const auto& s : rec.strobes) {
        f.row({std::to_string(s.period), format_double(s.t), format_double(s.q_exp),
               format_double(s.p_exp), format_double(b * s.q_exp), format_double(b * s.p_exp),
               format_double(s.energy), format_double(s.norm_deficit_max),
               format_double(s.leakage_max)});
    }
}

void write_fine_csv(const std::string& path, const TrajectoryRecord& rec) {
    CsvFile f(path);
    f.out << "t,q_exp,p_exp,energy\n";
    for (const auto& s : rec.fine)
        f.row({format_double(s.t), format_double(s.q_exp), format_double(s.p_exp),
               format_double(s.energy)});
}

void write_spectrum_csv(const std::string& path, const PowerSpectrum& ps) {
    CsvFile f(path);
    f.out << "omega,S_raw,S_smooth\n";
    for (std::size_t i = 0; i < ps.omega.size(); ++i)
        f.row({format_double(ps.omega[i]), format_double(ps.s_raw[i]),
               format_double(ps.s_smooth.empty() ? 0.0 : ps.s_smooth[i])});
}

void write_events_csv(const std::string& path, const EventList& ev) {
    CsvFile f(path);
    f.out << "t,direction,energy,below_barrier\n";
    for (const auto& e : ev.events)
        f.row({format_double(e.t), std::to_string(e.direction), format_double(e.energy),
               e.below_barrier ? "1" : "0"});
}

void write_section_csv(const std::string& path, const PoincareSection& sec) {
    CsvFile f(path);
    f.out << "period,q_exp,p_exp,q_scaled,p_scaled\n";
    for (std::size_t i = 0; i < sec.points.size(); ++i)
        f.row({std::to_string(sec.periods[i]), format_double(sec.points[i].first),
               format_double(sec.points[i].second), format_double(sec.scaled_points[i].first),
               format_double(sec.scaled_points[i].second)});
}

std::string json_escape(const std::string& s) {
    std::string out;
    for (char ch : s) {
        if (ch == '"' || ch == '\\') out += '\\';
        if (ch == '\n') {
            out += "\\n";
            continue;
        }
        out += ch;
    }
    return out;
}

}  // namespace

/// Extracts the post-transient fine <Q> series and its power spectrum.
static PowerSpectrum spectrum_for(const RunConfig& cfg, const TrajectoryRecord& rec) {
    const std::size_t fpp = cfg.fine_sample_per_period;
    const std::size_t skip = cfg.transient_periods * fpp;
    std::vector<double> series;
    for (std::size_t i = skip; i < rec.fine.size(); ++i) series.push_back(rec.fine[i].q_exp);
    const double dt = rec.period / static_cast<double>(fpp);
    PowerSpectrum ps = periodogram(series, dt);
    spline_smooth(ps, cfg.knot_count);
    return ps;
}

RunManifest run(const RunConfig& config, std::size_t jobs) {
    config.validate();
    const auto t_start = std::chrono::steady_clock::now();
    fs::create_directories(config.output_dir);

    const std::size_t nbeta = config.beta_list.size();
    const std::size_t njobs = nbeta * config.trajectories;
    std::vector<JobResult> results(njobs);

    parallel_for(njobs, jobs, [&](std::size_t i) {
        const std::size_t bi = i / config.trajectories;
        const std::size_t ti = i % config.trajectories;
        JobResult& jr = results[i];
        jr.beta = config.beta_list[bi];
        jr.beta_index = bi;
        jr.trajectory_index = ti;
        jr.seed = NoiseStream::derive_seed(config.base_seed, bi, ti);
        try {
            const ModelParams model = config.model_for(jr.beta);
            const IntegratorConfig ic = config.integrator_for(jr.beta);
            const Complex alpha{config.alpha_re, config.alpha_im};
            FockState initial = coherent_state(alpha, ic.cutoff).state;
            jr.record = evolve(initial, model, ic, config.periods_total,
                               config.transient_periods, jr.seed,
                               config.fine_sample_per_period);
            jr.ok = true;
        } catch (const std::exception& e) {
            jr.ok = false;
            jr.error = e.what();
        }
    });

    RunManifest manifest;
    manifest.version = kVersion;

    std::vector<BetaSummary> summaries;
    std::vector<std::string> written;
    for (std::size_t i = 0; i < njobs; ++i) {
        const JobResult& jr = results[i];
        if (!jr.ok) {
            manifest.all_ok = false;
            continue;
        }
        const std::string tag =
            "beta" + beta_tag(jr.beta) +
            (config.trajectories > 1 ? "_t" + std::to_string(jr.trajectory_index) : "");
        const std::string base = config.output_dir + "/" + tag;
        write_strobe_csv(base + "_strobe.csv", jr.record);
        write_fine_csv(base + "_fine.csv", jr.record);
        written.push_back(base + "_strobe.csv");
        written.push_back(base + "_fine.csv");

        // Section and spectrum need a minimum run length; miniature runs
        // still get strobe/fine/events files.
        std::optional<PoincareSection> sec;
        std::optional<PowerSpectrum> ps;
        try {
            sec = strobe_section(jr.record, config.transient_periods);
            write_section_csv(base + "_section.csv", sec.value());
            written.push_back(base + "_section.csv");
        } catch (const Error&) {
        }
        try {
            ps = spectrum_for(config, jr.record);
            write_spectrum_csv(base + "_spectrum.csv", ps.value());
            written.push_back(base + "_spectrum.csv");
        } catch (const Error&) {
        }
        const EventList ev = interwell_events(jr.record, config.threshold_fraction);
        write_events_csv(base + "_events.csv", ev);
        written.push_back(base + "_events.csv");

        if (jr.trajectory_index == 0 && sec && ps) {
            try {
                BetaSummary bs;
                bs.beta = jr.beta;
                bs.rise = low_freq_rise(ps.value(), config.Omega, config.band_low_edge,
                                        config.band_ref_lo, config.band_ref_hi);
                bs.interwell_count = ev.events.size();
                bs.tunneling_count = tunneling_events(ev).events.size();
                bs.section_rms = sec->scaled_rms_dispersion();
                summaries.push_back(bs);
            } catch (const Error&) {
                // too little data for the rise metric; row skipped
            }
        }
    }

    if (summaries.size() >= 2) {
        const TransitionReport rep = transition_report(summaries);
        const std::string path = config.output_dir + "/transition_report.csv";
        CsvFile f(path);
        f.out << "beta,R,interwell_count,tunneling_count,section_rms,verdict\n";
        for (const auto& r : rep.rows)
            f.row({format_double(r.beta), format_double(r.rise),
                   std::to_string(r.interwell_count), std::to_string(r.tunneling_count),
                   format_double(r.section_rms), to_string(rep.verdict)});
        written.push_back(path);
    }

    for (const auto& p : written) manifest.file_checksums[p] = fnv1a_file(p);
    for (auto& jr : results) {
        JobResult slim = jr;
        slim.record = TrajectoryRecord{};
        manifest.jobs.push_back(std::move(slim));
    }
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

    // NDJSON manifest: one object per job, then a summary object.
    {
        std::ofstream mf(config.output_dir + "/manifest.ndjson", std::ios::binary);
        for (const auto& j : manifest.jobs) {
            mf << "{\"type\":\"job\",\"beta\":" << format_double(j.beta)
               << ",\"beta_index\":" << j.beta_index
               << ",\"trajectory\":" << j.trajectory_index << ",\"seed\":" << j.seed
               << ",\"status\":\"" << (j.ok ? "ok" : "abort") << "\"";
            if (!j.ok) mf << ",\"cause\":\"" << json_escape(j.error) << "\"";
            mf << "}\n";
        }
        mf << "{\"type\":\"summary\",\"version\":\"" << json_escape(manifest.version)
           << "\",\"base_seed\":" << config.base_seed << ",\"all_ok\":"
           << (manifest.all_ok ? "true" : "false") << ",\"checksums\":{";
        bool first = true;
        for (const auto& [path, sum] : manifest.file_checksums) {
            if (!first) mf << ",";
            first = false;
            char hex[20];
            std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(sum));
            mf << "\"" << json_escape(path) << "\":\"" << hex << "\"";
        }
        mf << "}}\n";
    }
    return manifest;
}

RunManifest run_classical(const RunConfig& config) {
    config.validate();
    fs::create_directories(config.output_dir);
    ModelParams model = config.model_for(config.beta_list.front());

    // Classical coordinates are q = beta Q; scale the quantum initial centroid.
    const double q0 = model.beta * std::sqrt(2.0) * config.alpha_re;
    const double p0 = model.beta * std::sqrt(2.0) * config.alpha_im;
    const ClassicalState s0{q0, p0, 0.0};
    const double dt = default_classical_dt(model);
    const double period = 2.0 * std::numbers::pi / model.Omega;

    ClassicalTrajectory strobed =
        integrate(s0, model, dt, static_cast<double>(config.periods_total) * period, true);
    std::vector<std::pair<double, double>> pts;
    for (const auto& s : strobed.samples) pts.emplace_back(s.q, s.p);
    const PoincareSection sec = classical_section(pts, config.transient_periods);

    std::vector<std::string> written;
    {
        const std::string path = config.output_dir + "/classical_section.csv";
        write_section_csv(path, sec);
        written.push_back(path);
    }
    {
        // Fine series for the event detector; classical energy is
        // p^2/2 + q^4/4 - q^2/2. Integrated at the accurate dt, emitted at
        // the fine sample rate.
        ClassicalTrajectory fine = integrate(
            s0, model, dt, static_cast<double>(config.periods_total) * period, false);
        const std::size_t per_period = static_cast<std::size_t>(std::lround(period / dt));
        const std::size_t stride =
            std::max<std::size_t>(1, per_period / config.fine_sample_per_period);
        std::vector<ClassicalState> kept;
        for (std::size_t i = 0; i < fine.samples.size(); i += stride)
            kept.push_back(fine.samples[i]);
        const std::string path = config.output_dir + "/classical_fine.csv";
        CsvFile f(path);
        f.out << "t,q_exp,p_exp,energy\n";
        for (const auto& s : kept) {
            const double e = 0.5 * s.p * s.p + 0.25 * s.q * s.q * s.q * s.q - 0.5 * s.q * s.q;
            f.row({format_double(s.t), format_double(s.q), format_double(s.p),
                   format_double(e)});
        }
        written.push_back(path);
    }
    {
        const LyapunovResult lyap =
            lyapunov_max(model, s0, dt, 5000.0 * period, period, 100.0, true);
        const std::string path = config.output_dir + "/classical_lyapunov.csv";
        CsvFile f(path);
        f.out << "Gamma,g,Omega,lambda_max,lambda_sum\n";
        f.row({format_double(model.Gamma), format_double(model.g), format_double(model.Omega),
               format_double(lyap.lambda_max), format_double(lyap.lambda_sum)});
        written.push_back(path);
    }

    RunManifest manifest;
    manifest.version = kVersion;
    for (const auto& p : written) manifest.file_checksums[p] = fnv1a_file(p);
    std::ofstream mf(config.output_dir + "/manifest.ndjson", std::ios::binary);
    mf << "{\"type\":\"summary\",\"version\":\"" << json_escape(manifest.version)
       << "\",\"mode\":\"classical\",\"all_ok\":true}\n";
    return manifest;
}

OracleCheckResult oracle_check(const RunConfig& config, double beta, std::size_t cutoff,
                               std::size_t trajectories, std::size_t periods,
                               std::size_t num_checkpoints, std::size_t jobs) {
    ModelParams model = config.model_for(beta);
    IntegratorConfig ic = config.integrator_for(beta);
    ic.cutoff = cutoff;
    ic.moving_frame = false;  // matches the fixed-frame dense oracle
    // The agreement check itself guards accuracy; the leakage bound only has
    // to catch runaway truncation, and small oracle cutoffs carry physical
    // tails near 1e-4.
    ic.leakage_bound = 5e-2;

    const double period = 2.0 * std::numbers::pi / model.Omega;
    std::vector<double> checkpoints;
    for (std::size_t i = 1; i <= num_checkpoints; ++i) {
        const std::size_t k = std::max<std::size_t>(
            1, (i * periods + num_checkpoints / 2) / num_checkpoints);
        checkpoints.push_back(static_cast<double>(k) * period);
    }
    checkpoints.erase(std::unique(checkpoints.begin(), checkpoints.end()), checkpoints.end());

    const Complex alpha{config.alpha_re, config.alpha_im};
    std::vector<TrajectoryRecord> records(trajectories);
    parallel_for(trajectories, jobs, [&](std::size_t ti) {
        const std::uint64_t seed = NoiseStream::derive_seed(config.base_seed, 0, ti);
        FockState initial = coherent_state(alpha, cutoff).state;
        records[ti] = evolve(initial, model, ic, periods, 0, seed, 1);
    });

    OracleCheckResult res;
    res.checkpoints = checkpoints;
    res.ensemble = ensemble_reduce(records, checkpoints);

    FockState initial = coherent_state(alpha, cutoff).state;
    DensityMatrix rho0 = pure_density(initial);
    res.oracle = evolve_density(rho0, model, period / 2048.0, checkpoints);

    res.pass = true;
    res.worst_sigma = 0.0;
    auto check = [&](const std::vector<double>& mean, const std::vector<double>& se,
                     const std::vector<double>& oracle) {
        for (std::size_t i = 0; i < mean.size(); ++i) {
            const double sigma = std::max(se[i], 1e-12);
            const double z = std::abs(mean[i] - oracle[i]) / sigma;
            res.worst_sigma = std::max(res.worst_sigma, z);
            if (z > 3.0) res.pass = false;
        }
    };
    check(res.ensemble.q_mean, res.ensemble.q_stderr, res.oracle.q_exp);
    check(res.ensemble.p_mean, res.ensemble.p_stderr, res.oracle.p_exp);
    check(res.ensemble.energy_mean, res.ensemble.energy_stderr, res.oracle.energy);
    return res;
}

}  // namespace qduff
