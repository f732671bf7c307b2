#pragma once

// Command-line front end: solve, sweep, validate.
//
// Exit codes: 0 success (including runs that miss the target), 1 validate
// mismatch, 2 bad flags or memory guard, 3 I/O or parse failure.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "qapswarm.hpp"

namespace qapswarm::cli {

enum ExitCode : int { kOk = 0, kMismatch = 1, kBadFlags = 2, kIoError = 3 };

inline constexpr std::uint64_t kDefaultMemCap = 4ull << 30;

struct RunOptions {
    std::string instance_path;
    std::string solution_path;
    std::optional<double> known_best;
    SolverConfig config;
    std::string sv = "norm";
    std::string sx = "second-target";
    std::size_t repeats = 1;
    std::string out = "results";
    std::uint64_t mem_cap = kDefaultMemCap;
    bool swarm_stats = false;
};

/// A run that finished, with everything needed for a summary line or sweep row.
struct RunSummary {
    std::string instance;
    std::uint64_t seed = 0;
    std::string fingerprint;
    RunResult result;
    std::optional<double> reference;
};

class CliError : public std::runtime_error {
public:
    CliError(int code, const std::string& what) : std::runtime_error(what), code_(code) {}
    int code() const { return code_; }

private:
    int code_;
};

inline std::size_t default_workers() {
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

/// Registers the solver flags on app; defaults come from SolverConfig.
inline void add_run_options(CLI::App& app, RunOptions& o) {
    auto& c = o.config;
    c.workers = default_workers();
    app.add_option("--swarms", c.swarms, "Number of swarms")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--swarm-size", c.swarm_size, "Particles per swarm")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--c1", c.coefficients.c1, "Inertia")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app.add_option("--c2", c.coefficients.c2, "Self recognition")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app.add_option("--c3", c.coefficients.c3, "Social factor")->capture_default_str()->check(CLI::Range(0.0, 1.0));
    app.add_option("--sv", o.sv, "Velocity kernel")->capture_default_str()->check(CLI::IsMember({"raw", "norm"}));
    app.add_option("--sx", o.sx, "Aggregation kernel")
        ->capture_default_str()
        ->check(CLI::IsMember({"global-max", "pick-column", "second-target"}));
    app.add_option("--depth", c.coefficients.depth, "SecondTarget depth")->capture_default_str();
    app.add_option("--vmax", c.coefficients.v_max, "Velocity clamp")->capture_default_str();
    app.add_option("--migration", c.migration_factor, "Migration factor in [0,0.5)")->capture_default_str();
    app.add_option("--max-iters", c.max_iterations, "Iteration limit")->capture_default_str();
    app.add_option("--target", c.target_cost, "Stop once the best cost is <= target");
    app.add_option("--seed", c.seed, "Random seed (repeat r uses seed + r)")->capture_default_str();
    app.add_option("--repeats", o.repeats, "Runs with consecutive seeds")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--workers", c.workers, "Worker threads")
        ->envname("QAPSWARM_WORKERS")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--out", o.out, "Output directory")->capture_default_str();
    app.add_option("--stats-stride", c.stats.stride, "Collect stats every k iterations")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    app.add_option("--pmf-bins", c.stats.pmf_bins, "PMF histogram bins")->capture_default_str()->check(CLI::PositiveNumber);
    app.add_option("--mem-cap", o.mem_cap, "Refuse runs whose buffers exceed this size (e.g. 4GiB)")
        ->transform(CLI::AsSizeValue(false))
        ->default_str("4GiB");
    app.add_option("--init-velocity", c.init_velocity_amplitude, "Initial velocity amplitude")->capture_default_str();
    app.add_option("--known-best", o.known_best, "Reference value for the gap");
    app.add_option("--sln", o.solution_path, "QAPLIB .sln file; its cost becomes the reference value");
    app.add_flag("--all-swarm-percentiles", c.stats.all_swarm_percentiles, "Record percentiles of every swarm");
    app.add_flag("--swarm-stats", o.swarm_stats, "Also write swarms.csv");
    app.add_flag("--timing,!--no-timing", c.stats.record_timing,
                 "Record iteration times; --no-timing writes time_ms = 0 for byte-reproducible stats.csv");
}

inline void finalize_options(RunOptions& o) {
    o.config.coefficients.sv_mode = o.sv == "raw" ? VelocityMode::Raw : VelocityMode::Norm;
    if (o.sx == "global-max") {
        o.config.coefficients.sx_mode = AggregationMode::GlobalMax;
    } else if (o.sx == "pick-column") {
        o.config.coefficients.sx_mode = AggregationMode::PickColumn;
    } else {
        o.config.coefficients.sx_mode = AggregationMode::SecondTarget;
    }
}

/// Stable hash of the settings that shape the optimization (not seed, workers or paths).
inline std::string config_fingerprint(const SolverConfig& c) {
    std::ostringstream s;
    s << std::setprecision(17) << c.swarms << '|' << c.swarm_size << '|' << c.coefficients.c1 << '|'
      << c.coefficients.c2 << '|' << c.coefficients.c3 << '|' << c.coefficients.v_max << '|'
      << to_string(c.coefficients.sv_mode) << '|' << to_string(c.coefficients.sx_mode) << '|' << c.coefficients.depth
      << '|' << c.migration_factor << '|' << c.max_iterations << '|' << c.init_velocity_amplitude << '|'
      << (c.target_cost ? *c.target_cost : -1.0);
    std::uint64_t h = 14695981039346656037ull;  // FNV-1a
    for (unsigned char ch : s.str()) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    std::ostringstream hex;
    hex << std::hex << std::setw(16) << std::setfill('0') << h;
    return hex.str();
}

inline std::string format_percent(double fraction) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(2) << fraction * 100.0 << '%';
    return s.str();
}

/// Loads inputs, checks the memory guard and runs every repeat. Throws CliError.
inline std::vector<RunSummary> execute(const RunOptions& o, std::ostream& out, bool write_files) {
    QapInstance instance;
    try {
        instance = load_instance(o.instance_path);
        if (!o.solution_path.empty()) {
            const auto sln = load_reference_solution(o.solution_path);
            if (sln.n != instance.n) throw std::runtime_error(o.solution_path + ": size does not match the instance");
            instance.known_best = sln.cost;
        }
    } catch (const std::exception& e) {
        throw CliError(kIoError, e.what());
    }
    if (o.known_best) instance.known_best = *o.known_best;

    try {
        o.config.validate(instance.n);
    } catch (const std::invalid_argument& e) {
        throw CliError(kBadFlags, e.what());
    }

    const std::size_t bytes = projected_buffer_bytes(o.config, instance.n);
    out << "buffers: " << bytes << " bytes for " << o.config.particles() << " particles of size " << instance.n
        << '\n';
    if (bytes > o.mem_cap) {
        throw CliError(kBadFlags, "projected buffer size " + std::to_string(bytes) + " exceeds --mem-cap " +
                                      std::to_string(o.mem_cap));
    }

    std::vector<RunSummary> runs;
    const std::string fingerprint = config_fingerprint(o.config);
    for (std::size_t r = 0; r < o.repeats; ++r) {
        SolverConfig config = o.config;
        config.seed = o.config.seed + r;
        RunSummary summary{instance.name, config.seed, fingerprint, run(config, instance), instance.known_best};

        const double check = evaluate_cost(instance, summary.result.best);
        if (check != summary.result.best_cost) {
            throw CliError(kIoError, "internal error: reported goal does not match the emitted solution");
        }

        if (write_files) {
            const std::filesystem::path dir =
                o.repeats == 1 ? std::filesystem::path(o.out)
                               : std::filesystem::path(o.out) / ("seed_" + std::to_string(config.seed));
            try {
                export_csv(summary.result.stats, dir);
                write_text(dir / "solution.txt", format_solution(summary.result.best.perm(), summary.result.best_cost));
                if (o.swarm_stats) write_text(dir / "swarms.csv", swarm_csv(summary.result.stats));
            } catch (const std::exception& e) {
                throw CliError(kIoError, e.what());
            }
        }
        runs.push_back(std::move(summary));
    }
    return runs;
}

inline void print_summary(const RunSummary& s, std::ostream& out) {
    const auto& r = s.result;
    out << "instance=" << s.instance << " config=" << s.fingerprint << " seed=" << s.seed
        << " goal=" << detail::fmt_number(r.best_cost)
        << " gap=" << (r.gap ? format_percent(*r.gap) : std::string("n/a")) << " iteration=" << r.iteration_found
        << " iterations=" << r.iterations << " time_per_iter_ms=" << std::fixed << std::setprecision(3)
        << r.mean_iteration_ms() << std::defaultfloat << '\n';
}

inline int cmd_solve(const RunOptions& o, std::ostream& out, std::ostream& err) {
    try {
        for (const auto& s : execute(o, out, true)) print_summary(s, out);
    } catch (const CliError& e) {
        err << "error: " << e.what() << '\n';
        return e.code();
    }
    return kOk;
}

inline int cmd_validate(const std::string& instance_path, const std::string& solution_path, std::ostream& out,
                        std::ostream& err) {
    QapInstance instance;
    ReferenceSolution sln;
    try {
        instance = load_instance(instance_path);
        sln = load_reference_solution(solution_path);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kIoError;
    }
    if (sln.n != instance.n) {
        err << "error: " << solution_path << ": n=" << sln.n << " does not match instance n=" << instance.n << '\n';
        return kIoError;
    }
    const double cost = evaluate_cost(instance, sln.permutation);
    if (cost == sln.cost) {
        out << "match: " << detail::fmt_number(cost) << '\n';
        return kOk;
    }
    out << "mismatch: declared " << detail::fmt_number(sln.cost) << ", recomputed " << detail::fmt_number(cost) << '\n';
    return kMismatch;
}

inline const char* kSweepHeader =
    "instance,swarms,swarm_size,total_particles,c1,c2,c3,velocity_kernel,migration_factor,reached_goal,"
    "reference_value,gap,iteration,status\n";

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + '"';
}

/// Each non-blank line of the run list is "<instance> [solve flags]"; '#' starts a comment line.
inline int cmd_sweep(const std::string& list_path, const std::string& out_dir, std::ostream& out, std::ostream& err) {
    std::ifstream list(list_path);
    if (!list) {
        err << "error: cannot open run list '" << list_path << "'\n";
        return kIoError;
    }
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    const auto csv_path = std::filesystem::path(out_dir) / "sweep_results.csv";
    const bool fresh = !std::filesystem::exists(csv_path);
    std::ofstream csv(csv_path, std::ios::app | std::ios::binary);
    if (!csv) {
        err << "error: cannot write '" << csv_path.string() << "'\n";
        return kIoError;
    }
    if (fresh) csv << kSweepHeader;

    using detail::fmt_number;
    std::size_t completed = 0, line_no = 0;
    std::string line;
    while (std::getline(list, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;

        RunOptions o;
        CLI::App app{"sweep run"};
        add_run_options(app, o);
        app.add_option("instance", o.instance_path)->required();
        std::string error;
        std::vector<RunSummary> runs;
        try {
            app.parse(line.substr(first), false);
            finalize_options(o);
            o.out = (std::filesystem::path(out_dir) / ("run_" + std::to_string(line_no))).string();
            runs = execute(o, out, true);
        } catch (const CLI::ParseError& e) {
            error = std::string("bad flags: ") + e.what();
        } catch (const std::exception& e) {
            error = e.what();
        }

        if (!error.empty()) {
            const std::string name = o.instance_path.empty() ? line.substr(first) : o.instance_path;
            csv << csv_escape(name) << ",,,,,,,,,,,,," << csv_escape("error: " + error) << '\n';
            err << "line " << line_no << ": error: " << error << '\n';
            continue;
        }
        for (const auto& s : runs) {
            const auto& c = o.config;
            csv << csv_escape(s.instance) << ',' << c.swarms << ',' << c.swarm_size << ',' << c.particles() << ','
                << fmt_number(c.coefficients.c1) << ',' << fmt_number(c.coefficients.c2) << ','
                << fmt_number(c.coefficients.c3) << ',' << (c.coefficients.sv_mode == VelocityMode::Raw ? "Raw" : "Norm")
                << ',' << fmt_number(c.migration_factor) << ',' << fmt_number(s.result.best_cost) << ','
                << (s.reference ? fmt_number(*s.reference) : "") << ','
                << (s.result.gap ? fmt_number(*s.result.gap) : "") << ',' << s.result.iteration_found << ",ok\n";
            print_summary(s, out);
            ++completed;
        }
    }
    csv.flush();
    return completed > 0 ? kOk : kIoError;
}

inline int main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multi-swarm discrete PSO for the quadratic assignment problem"};
    app.require_subcommand(1);

    RunOptions solve_opts;
    auto* solve = app.add_subcommand("solve", "Run the solver on one instance");
    solve->add_option("instance", solve_opts.instance_path, "QAPLIB .dat file")->required();
    add_run_options(*solve, solve_opts);

    std::string sweep_list, sweep_out = "results";
    auto* sweep = app.add_subcommand("sweep", "Run every line of a run list and append to sweep_results.csv");
    sweep->add_option("runs", sweep_list, "Run list: one '<instance> [flags]' per line")->required();
    sweep->add_option("--out", sweep_out, "Output directory")->capture_default_str();

    std::string val_instance, val_solution;
    auto* validate = app.add_subcommand("validate", "Check a QAPLIB .sln against its instance");
    validate->add_option("instance", val_instance, "QAPLIB .dat file")->required();
    validate->add_option("solution", val_solution, "QAPLIB .sln file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kBadFlags;
    }

    if (*solve) {
        finalize_options(solve_opts);
        return cmd_solve(solve_opts, out, err);
    }
    if (*sweep) return cmd_sweep(sweep_list, sweep_out, out, err);
    return cmd_validate(val_instance, val_solution, out, err);
}

}  // namespace qapswarm::cli
