#pragma once

// Multi-swarm solver. Particle data lives in flat buffers indexed by particle id
// (one n*n block per particle); particle p belongs to swarm p / swarm_size.
//
// Each iteration runs five phases separated by barriers:
//   1. velocity     parallel over particles
//   2. aggregation  parallel over particles, writes X_new
//   3. goal         parallel over particles
//   4. best update  sequential; swaps X and X_new
//   5. migration    sequential, only when the migration factor is positive
//
// Every random draw comes from a counter-based stream keyed by
// (seed, particle, iteration, purpose), so results do not depend on the number
// of workers.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <limits>
#include <new>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "assignment.hpp"
#include "kernels.hpp"
#include "migration.hpp"
#include "qaplib_io.hpp"
#include "random.hpp"
#include "stats.hpp"
#include "worker_pool.hpp"

namespace qapswarm {

struct SolverConfig {
    std::size_t swarms = 200;
    std::size_t swarm_size = 50;
    PsoCoefficients coefficients;
    double migration_factor = 0.0;
    std::size_t max_iterations = 200;
    std::optional<double> target_cost;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    StatsOptions stats;
    double init_velocity_amplitude = 1.0;
    bool record_migrations = false;

    std::size_t particles() const { return swarms * swarm_size; }

    void validate(std::size_t n) const {
        if (swarms == 0 || swarm_size == 0) throw std::invalid_argument("swarms and swarm size must be positive");
        if (workers == 0) throw std::invalid_argument("workers must be positive");
        if (!(init_velocity_amplitude > 0)) throw std::invalid_argument("initial velocity amplitude must be positive");
        migration_depth(migration_factor, swarms);
        coefficients.validate(n);
        if (stats.stride == 0) throw std::invalid_argument("stats stride must be positive");
        if (stats.pmf_bins == 0) throw std::invalid_argument("pmf bins must be positive");
    }
};

/// Bytes held by the population buffers for the given configuration.
inline std::size_t projected_buffer_bytes(std::size_t particles, std::size_t swarms, std::size_t n) {
    const std::size_t cells = n * n;
    const std::size_t matrices = particles * cells * (3 * sizeof(Bit) + sizeof(double));  // X, X_new, PL, V
    const std::size_t perms = particles * n * 3 * sizeof(Location);
    const std::size_t tables = particles * 2 * sizeof(double);
    const std::size_t swarm_table = swarms * (cells * sizeof(Bit) + n * sizeof(Location) + sizeof(double));
    return matrices + perms + tables + swarm_table;
}

inline std::size_t projected_buffer_bytes(const SolverConfig& config, std::size_t n) {
    return projected_buffer_bytes(config.particles(), config.swarms, n);
}

struct PopulationState {
    std::size_t n = 0;
    std::size_t swarms = 0;
    std::size_t swarm_size = 0;

    std::vector<Bit> x, x_new, local_best;  // particles * n * n
    std::vector<double> velocity;           // particles * n * n
    std::vector<Location> x_perm, x_new_perm, local_best_perm;
    std::vector<double> cost;               // cost of x
    std::vector<double> local_best_cost;
    SwarmBestTable swarm_best;

    std::size_t t = 0;
    Assignment best;
    double best_cost = 0;
    std::size_t best_iteration = 0;

    std::size_t particles() const { return swarms * swarm_size; }
    std::size_t swarm_of(std::size_t p) const { return p / swarm_size; }

    MatrixRef<Bit> x_block(std::size_t p) { return {x.data() + p * n * n, n}; }
    MatrixRef<const Bit> x_block(std::size_t p) const { return {x.data() + p * n * n, n}; }
    MatrixRef<Bit> x_new_block(std::size_t p) { return {x_new.data() + p * n * n, n}; }
    MatrixRef<Bit> local_best_block(std::size_t p) { return {local_best.data() + p * n * n, n}; }
    MatrixRef<const Bit> local_best_block(std::size_t p) const { return {local_best.data() + p * n * n, n}; }
    MatrixRef<double> velocity_block(std::size_t p) { return {velocity.data() + p * n * n, n}; }
    MatrixRef<const double> velocity_block(std::size_t p) const { return {velocity.data() + p * n * n, n}; }
    std::span<Location> perm(std::size_t p) { return {x_perm.data() + p * n, n}; }
    std::span<const Location> perm(std::size_t p) const { return {x_perm.data() + p * n, n}; }
    std::span<const Location> local_best_perm_of(std::size_t p) const { return {local_best_perm.data() + p * n, n}; }

    ParticleSolutions solutions() const { return {x, x_perm, n, swarm_size}; }

    PopulationSnapshot snapshot() const { return {t, cost, swarm_best.costs(), swarm_size, best_cost}; }

    std::size_t bytes() const {
        return (x.size() + x_new.size() + local_best.size()) * sizeof(Bit) + velocity.size() * sizeof(double) +
               (x_perm.size() + x_new_perm.size() + local_best_perm.size()) * sizeof(Location) +
               (cost.size() + local_best_cost.size()) * sizeof(double) + swarm_best.bytes();
    }
};

namespace detail {

inline void allocate(PopulationState& s, const SolverConfig& config, std::size_t n) {
    s.n = n;
    s.swarms = config.swarms;
    s.swarm_size = config.swarm_size;
    const std::size_t count = config.particles();
    try {
        s.x.assign(count * n * n, 0);
        s.x_new.assign(count * n * n, 0);
        s.local_best.assign(count * n * n, 0);
        s.velocity.assign(count * n * n, 0.0);
        s.x_perm.assign(count * n, 0);
        s.x_new_perm.assign(count * n, 0);
        s.local_best_perm.assign(count * n, 0);
        s.cost.assign(count, 0.0);
        s.local_best_cost.assign(count, 0.0);
        s.swarm_best = SwarmBestTable(config.swarms, n);
    } catch (const std::bad_alloc&) {
        throw std::runtime_error("out of memory allocating population buffers: " + std::to_string(count) +
                                 " particles x " + std::to_string(n) + "x" + std::to_string(n) + " blocks (" +
                                 std::to_string(projected_buffer_bytes(config, n)) + " bytes)");
    }
}

/// Swarm-best from the particles of swarm k (lowest cost, lowest id on ties).
inline void reset_swarm_best(PopulationState& s, std::size_t k) {
    std::size_t arg = k * s.swarm_size;
    for (std::size_t p = arg + 1; p < (k + 1) * s.swarm_size; ++p) {
        if (s.local_best_cost[p] < s.local_best_cost[arg]) arg = p;
    }
    s.swarm_best.assign(k, s.local_best_block(arg), s.local_best_perm_of(arg), s.local_best_cost[arg]);
}

inline void refresh_global_best(PopulationState& s) {
    const auto costs = s.swarm_best.costs();
    const std::size_t k = static_cast<std::size_t>(std::min_element(costs.begin(), costs.end()) - costs.begin());
    if (costs[k] < s.best_cost) {
        const auto perm = s.swarm_best.perm(k);
        s.best = Assignment(std::vector<Location>(perm.begin(), perm.end()));
        s.best_cost = costs[k];
        s.best_iteration = s.t;
    }
}

}  // namespace detail

/// Random initial population: Fisher-Yates permutations and uniform velocities per particle stream.
inline PopulationState init_population(const SolverConfig& config, const QapInstance& instance,
                                       WorkerPool* pool = nullptr) {
    config.validate(instance.n);
    PopulationState s;
    detail::allocate(s, config, instance.n);
    const std::size_t n = instance.n;
    const double amp = config.init_velocity_amplitude;

    auto body = [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            RandomStream rng(config.seed, {static_cast<std::uint32_t>(p), 0, StreamPurpose::Init});
            auto perm = s.perm(p);
            std::iota(perm.begin(), perm.end(), 0);
            for (std::size_t i = n - 1; i > 0; --i) std::swap(perm[i], perm[rng.uniform_index(i + 1)]);
            auto x = s.x_block(p);
            std::fill(x.data(), x.data() + x.cells(), Bit{0});
            for (std::size_t i = 0; i < n; ++i) x(perm[i], i) = 1;
            for (double& v : s.velocity_block(p).flat()) v = rng.uniform(-amp, amp);
            std::copy(x.data(), x.data() + x.cells(), s.local_best_block(p).data());
            std::copy(perm.begin(), perm.end(), s.local_best_perm.begin() + static_cast<std::ptrdiff_t>(p * n));
            s.cost[p] = evaluate_cost(instance, perm);
            s.local_best_cost[p] = s.cost[p];
        }
    };
    if (pool) {
        pool->parallel_for(s.particles(), body);
    } else {
        body(0, s.particles());
    }

    for (std::size_t k = 0; k < s.swarms; ++k) detail::reset_swarm_best(s, k);
    s.best_cost = std::numeric_limits<double>::infinity();
    s.t = 0;
    detail::refresh_global_best(s);
    return s;
}

/// Advances the population by one iteration; returns the migration events of this step.
inline std::vector<MigrationEvent> step(PopulationState& s, const QapInstance& instance, const SolverConfig& config,
                                        WorkerPool& pool) {
    const std::size_t n = s.n;
    const std::size_t count = s.particles();
    const auto& k = config.coefficients;
    const auto iteration = static_cast<std::uint32_t>(s.t);

    // 1. velocity
    pool.parallel_for(count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            RandomStream rng(config.seed, {static_cast<std::uint32_t>(p), iteration, StreamPurpose::Step});
            const double r2 = rng.uniform01();
            const double r3 = rng.uniform01();
            velocity_update(s.velocity_block(p), s.x_block(p), s.local_best_block(p),
                            s.swarm_best.block(s.swarm_of(p)), k, r2, r3);
        }
    });

    // 2. aggregation; the step stream continues at block 1, after r2 and r3
    pool.parallel_for(count, [&](std::size_t begin, std::size_t end) {
        AggregationWorkspace ws;
        SquareMatrix<double> combined(n);
        for (std::size_t p = begin; p < end; ++p) {
            RandomStream rng(config.seed, {static_cast<std::uint32_t>(p), iteration, StreamPurpose::Step}, 1);
            position_combine(s.x_block(p), s.velocity_block(p), combined.ref());
            aggregate(k, combined.cref(), s.x_block(p), rng, s.x_new_block(p),
                      {s.x_new_perm.data() + p * n, n}, ws);
        }
    });

    // 3. goal
    pool.parallel_for(count, [&](std::size_t begin, std::size_t end) {
        for (std::size_t p = begin; p < end; ++p) {
            s.cost[p] = evaluate_cost(instance, std::span<const Location>(s.x_new_perm.data() + p * n, n));
        }
    });

    // 4. best update
    ++s.t;
    for (std::size_t p = 0; p < count; ++p) {
        if (s.cost[p] < s.local_best_cost[p]) {
            s.local_best_cost[p] = s.cost[p];
            std::copy_n(s.x_new.data() + p * n * n, n * n, s.local_best.data() + p * n * n);
            std::copy_n(s.x_new_perm.data() + p * n, n, s.local_best_perm.data() + p * n);
            const std::size_t swarm = s.swarm_of(p);
            if (s.local_best_cost[p] < s.swarm_best.cost(swarm)) {
                s.swarm_best.assign(swarm, s.local_best_block(p), s.local_best_perm_of(p), s.local_best_cost[p]);
            }
        }
    }
    detail::refresh_global_best(s);
    std::swap(s.x, s.x_new);
    std::swap(s.x_perm, s.x_new_perm);

    // 5. migration
    const std::size_t depth = migration_depth(config.migration_factor, s.swarms);
    if (depth == 0) return {};
    RandomStream rng(config.seed, {kHostStream, iteration, StreamPurpose::Migration});
    return migrate(depth, s.swarm_best, s.solutions(), instance, rng);
}

/// Stats for the state at its current iteration boundary.
inline IterationStats collect(const PopulationState& s, double time_ms, StatsRecorder& recorder) {
    return recorder.collect(s.snapshot(), time_ms);
}

struct MigrationRecord {
    std::size_t iteration = 0;  // iteration index after the step that migrated
    MigrationEvent event;
};

struct RunResult {
    Assignment best;
    double best_cost = 0;
    std::size_t iteration_found = 0;
    std::optional<double> gap;
    std::vector<IterationStats> stats;
    std::vector<MigrationRecord> migrations;  // only with record_migrations
    std::size_t iterations = 0;
    double total_ms = 0;
    std::size_t buffer_bytes = 0;

    double mean_iteration_ms() const { return iterations == 0 ? 0.0 : total_ms / static_cast<double>(iterations); }
};

/// Stateful driver: owns the worker pool, the population and the stats recorder.
class Solver {
public:
    Solver(SolverConfig config, const QapInstance& instance)
        : config_(std::move(config)), instance_(instance), pool_(config_.workers), recorder_(config_.stats) {
        const auto start = Clock::now();
        state_ = init_population(config_, instance_, &pool_);
        init_ms_ = elapsed_ms(start);
    }

    const PopulationState& state() const { return state_; }
    const SolverConfig& config() const { return config_; }
    double init_ms() const { return init_ms_; }
    double last_step_ms() const { return last_step_ms_; }
    const std::vector<MigrationEvent>& last_migrations() const { return last_migrations_; }

    bool target_reached() const { return config_.target_cost && state_.best_cost <= *config_.target_cost; }
    bool done() const { return state_.t >= config_.max_iterations || target_reached(); }

    void step() {
        const auto start = Clock::now();
        last_migrations_ = qapswarm::step(state_, instance_, config_, pool_);
        last_step_ms_ = elapsed_ms(start);
    }

    IterationStats collect(double time_ms) { return qapswarm::collect(state_, time_ms, recorder_); }

    RunResult run() {
        RunResult result;
        result.buffer_bytes = state_.bytes();
        double total = init_ms_;
        result.stats.push_back(collect(init_ms_));
        while (!done()) {
            step();
            total += last_step_ms_;
            if (config_.record_migrations) {
                for (const auto& e : last_migrations_) result.migrations.push_back({state_.t, e});
            }
            if (recorder_.wants(state_.t, done())) {
                result.stats.push_back(collect(last_step_ms_));
            }
        }
        result.best = state_.best;
        result.best_cost = state_.best_cost;
        result.iteration_found = state_.best_iteration;
        result.iterations = state_.t;
        result.total_ms = total;
        if (instance_.known_best && *instance_.known_best > 0) result.gap = gap(result.best_cost, *instance_.known_best);
        return result;
    }

private:
    using Clock = std::chrono::steady_clock;
    static double elapsed_ms(Clock::time_point start) {
        return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
    }

    SolverConfig config_;
    const QapInstance& instance_;
    WorkerPool pool_;
    StatsRecorder recorder_;
    PopulationState state_;
    std::vector<MigrationEvent> last_migrations_;
    double init_ms_ = 0;
    double last_step_ms_ = 0;
};

/// Runs until max_iterations or until the best cost reaches target_cost.
inline RunResult run(const SolverConfig& config, const QapInstance& instance) {
    Solver solver(config, instance);
    return solver.run();
}

}  // namespace qapswarm
