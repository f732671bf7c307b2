#pragma once

// Migration between swarms. Weak swarms get their swarm-best entry overwritten
// with a copy of a randomly chosen particle solution from a stronger swarm. The
// source is always a particle buffer, never another swarm-best entry: copying
// swarm bests directly would clone one solution into 2^k swarms after k
// stagnating iterations.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "assignment.hpp"
#include "matrix.hpp"
#include "random.hpp"

namespace qapswarm {

/// Strong index of a particle in the flat population.
struct ParticleId {
    std::size_t value = 0;
    friend bool operator==(ParticleId, ParticleId) = default;
};

/// Swarm-best solutions and costs, one entry per swarm, stored flat.
class SwarmBestTable {
public:
    SwarmBestTable() = default;
    SwarmBestTable(std::size_t swarms, std::size_t n)
        : swarms_(swarms), n_(n), blocks_(swarms * n * n, 0), perms_(swarms * n, 0), costs_(swarms, 0) {}

    std::size_t swarms() const { return swarms_; }
    std::size_t n() const { return n_; }

    MatrixRef<Bit> block(std::size_t k) { return {blocks_.data() + k * n_ * n_, n_}; }
    MatrixRef<const Bit> block(std::size_t k) const { return {blocks_.data() + k * n_ * n_, n_}; }
    std::span<Location> perm(std::size_t k) { return {perms_.data() + k * n_, n_}; }
    std::span<const Location> perm(std::size_t k) const { return {perms_.data() + k * n_, n_}; }
    double cost(std::size_t k) const { return costs_[k]; }
    std::span<const double> costs() const { return costs_; }

    /// Copies a solution (matrix and vector view) into swarm k's entry.
    void assign(std::size_t k, MatrixRef<const Bit> x, std::span<const Location> perm, double cost) {
        std::copy(x.data(), x.data() + x.cells(), blocks_.data() + k * n_ * n_);
        std::copy(perm.begin(), perm.end(), perms_.begin() + static_cast<std::ptrdiff_t>(k * n_));
        costs_[k] = cost;
    }

    std::size_t bytes() const {
        return blocks_.size() * sizeof(Bit) + perms_.size() * sizeof(Location) + costs_.size() * sizeof(double);
    }

    friend bool operator==(const SwarmBestTable&, const SwarmBestTable&) = default;

private:
    std::size_t swarms_ = 0;
    std::size_t n_ = 0;
    std::vector<Bit> blocks_;
    std::vector<Location> perms_;
    std::vector<double> costs_;
};

/// Read-only view of every particle's current solution.
struct ParticleSolutions {
    std::span<const Bit> blocks;      // count * n * n
    std::span<const Location> perms;  // count * n
    std::size_t n = 0;
    std::size_t swarm_size = 0;

    std::size_t count() const { return n == 0 ? 0 : perms.size() / n; }
    std::size_t swarm_of(ParticleId p) const { return p.value / swarm_size; }
    MatrixRef<const Bit> block(ParticleId p) const { return {blocks.data() + p.value * n * n, n}; }
    std::span<const Location> perm(ParticleId p) const { return perms.subspan(p.value * n, n); }
};

struct MigrationEvent {
    std::size_t source_swarm = 0;
    ParticleId source_particle;
    std::size_t target_swarm = 0;
    double replaced_cost = 0;
    double new_cost = 0;
};

/// Migration depth for a factor in [0, 0.5): floor(factor * m).
inline std::size_t migration_depth(double factor, std::size_t swarms) {
    if (!(factor >= 0.0 && factor < 0.5)) throw std::invalid_argument("migration factor must lie in [0, 0.5)");
    return static_cast<std::size_t>(std::floor(factor * static_cast<double>(swarms)));
}

/// Swarm indices sorted by ascending swarm-best cost (ties by index).
inline std::vector<std::size_t> rank_swarms(const SwarmBestTable& bests) {
    std::vector<std::size_t> order(bests.swarms());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return bests.cost(a) < bests.cost(b); });
    return order;
}

/// One migration event of depth d: for k < d the swarm ranked m-1-k receives a
/// uniformly chosen particle solution of the swarm ranked k. The new cost may be
/// worse than the one it replaces.
inline std::vector<MigrationEvent> migrate(std::size_t depth, SwarmBestTable& bests, const ParticleSolutions& population,
                                           const QapInstance& instance, RandomStream& rng) {
    const std::size_t m = bests.swarms();
    if (2 * depth >= m && depth > 0) {
        throw std::invalid_argument("migrate: depth " + std::to_string(depth) + " must be < m/2 (m=" +
                                    std::to_string(m) + ")");
    }
    if (population.swarm_size == 0) throw std::invalid_argument("migrate: empty swarm");
    if (population.count() != m * population.swarm_size) {
        throw std::invalid_argument("migrate: population does not cover every swarm");
    }
    std::vector<MigrationEvent> events;
    if (depth == 0) return events;

    const auto ranked = rank_swarms(bests);
    events.reserve(depth);
    for (std::size_t k = 0; k < depth; ++k) {
        const std::size_t source = ranked[k];
        const std::size_t target = ranked[m - 1 - k];
        const ParticleId pick{source * population.swarm_size + rng.uniform_index(population.swarm_size)};
        const auto perm = population.perm(pick);
        const double cost = evaluate_cost(instance, perm);
        events.push_back({source, pick, target, bests.cost(target), cost});
        bests.assign(target, population.block(pick), perm, cost);
    }
    return events;
}

}  // namespace qapswarm
