#pragma once

// Per-iteration statistics over population costs: nearest-rank percentiles,
// a PMF histogram on a range frozen at iteration 0, per-swarm bests, timing.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace qapswarm {

inline constexpr std::array<double, 4> kPercentileRanks = {5, 25, 50, 75};

struct StatsOptions {
    std::size_t stride = 1;      // collect every stride-th iteration (0 and the last are always kept)
    std::size_t pmf_bins = 60;
    bool all_swarm_percentiles = false;
    bool record_timing = true;   // false writes time_ms = 0 so outputs are byte-reproducible
};

struct Histogram {
    double lo = 0;
    double hi = 1;
    std::vector<double> freq;

    std::size_t bins() const { return freq.size(); }
    double edge(std::size_t k) const { return lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(bins()); }
};

struct IterationStats {
    std::size_t t = 0;
    std::array<double, 4> percentiles{};  // at kPercentileRanks
    double best = 0;                       // min cost in the current population
    double global_best = 0;                // best-so-far over the run
    std::vector<double> swarm_best;        // swarm-best cost per swarm
    std::size_t leader_swarm = 0;          // swarm holding the lowest swarm-best cost
    std::array<double, 4> leader_percentiles{};
    std::vector<std::array<double, 4>> swarm_percentiles;  // only with all_swarm_percentiles
    Histogram pmf;
    double time_ms = 0;

    double p5() const { return percentiles[0]; }
    double p25() const { return percentiles[1]; }
    double p50() const { return percentiles[2]; }
    double p75() const { return percentiles[3]; }
};

namespace detail {

inline double nearest_rank(std::span<const double> sorted, double rank) {
    const auto count = static_cast<double>(sorted.size());
    auto k = static_cast<std::size_t>(std::ceil(rank * count / 100.0));
    k = std::clamp<std::size_t>(k, 1, sorted.size());
    return sorted[k - 1];
}

}  // namespace detail

/// Nearest-rank percentile: the ceil(rank/100 * |values|)-th smallest value.
inline double percentile(std::span<const double> values, double rank) {
    if (values.empty()) throw std::invalid_argument("percentile: empty input");
    if (!(rank > 0 && rank < 100)) throw std::invalid_argument("percentile: rank must lie in (0,100)");
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return detail::nearest_rank(sorted, rank);
}

inline std::array<double, 4> standard_percentiles(std::span<const double> values) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    std::array<double, 4> out{};
    for (std::size_t i = 0; i < kPercentileRanks.size(); ++i) out[i] = detail::nearest_rank(sorted, kPercentileRanks[i]);
    return out;
}

/// Equal-width histogram over [lo, hi]; out-of-range values land in the end bins.
inline Histogram pmf(std::span<const double> values, std::size_t bins, double lo, double hi) {
    if (values.empty()) throw std::invalid_argument("pmf: empty input");
    if (bins == 0) throw std::invalid_argument("pmf: bins must be positive");
    if (!(lo < hi)) throw std::invalid_argument("pmf: range requires lo < hi");
    Histogram h{lo, hi, std::vector<double>(bins, 0.0)};
    std::vector<std::size_t> counts(bins, 0);
    const double width = hi - lo;
    for (double v : values) {
        const double pos = (v - lo) / width * static_cast<double>(bins);
        std::size_t k = 0;
        if (pos >= static_cast<double>(bins)) {
            k = bins - 1;
        } else if (pos > 0) {
            k = static_cast<std::size_t>(pos);
        }
        ++counts[k];
    }
    const auto total = static_cast<double>(values.size());
    for (std::size_t k = 0; k < bins; ++k) h.freq[k] = static_cast<double>(counts[k]) / total;
    return h;
}

/// Everything collect() needs from a population at an iteration boundary.
struct PopulationSnapshot {
    std::size_t t = 0;
    std::span<const double> costs;       // per particle, current solutions
    std::span<const double> swarm_best;  // per swarm
    std::size_t swarm_size = 1;
    double global_best = 0;
};

/// Builds IterationStats; holds the PMF range frozen at the first collected iteration.
class StatsRecorder {
public:
    explicit StatsRecorder(StatsOptions options = {}) : options_(options) {
        if (options_.stride == 0) throw std::invalid_argument("stats stride must be positive");
        if (options_.pmf_bins == 0) throw std::invalid_argument("pmf bins must be positive");
    }

    const StatsOptions& options() const { return options_; }

    bool wants(std::size_t t, bool last) const { return last || t % options_.stride == 0; }

    IterationStats collect(const PopulationSnapshot& pop, double time_ms) {
        if (pop.costs.empty()) throw std::invalid_argument("collect: empty population");
        IterationStats s;
        s.t = pop.t;
        s.percentiles = standard_percentiles(pop.costs);
        s.best = *std::min_element(pop.costs.begin(), pop.costs.end());
        s.global_best = pop.global_best;
        s.swarm_best.assign(pop.swarm_best.begin(), pop.swarm_best.end());
        s.leader_swarm = static_cast<std::size_t>(
            std::min_element(s.swarm_best.begin(), s.swarm_best.end()) - s.swarm_best.begin());
        s.leader_percentiles = standard_percentiles(swarm_costs(pop, s.leader_swarm));
        if (options_.all_swarm_percentiles) {
            s.swarm_percentiles.reserve(pop.swarm_best.size());
            for (std::size_t k = 0; k < pop.swarm_best.size(); ++k) {
                s.swarm_percentiles.push_back(standard_percentiles(swarm_costs(pop, k)));
            }
        }
        if (!range_) {
            auto [lo, hi] = std::minmax_element(pop.costs.begin(), pop.costs.end());
            double a = *lo, b = *hi;
            if (!(a < b)) b = a + 1;
            range_ = std::pair{a, b};
        }
        s.pmf = pmf(pop.costs, options_.pmf_bins, range_->first, range_->second);
        s.time_ms = options_.record_timing ? time_ms : 0.0;
        return s;
    }

private:
    static std::span<const double> swarm_costs(const PopulationSnapshot& pop, std::size_t k) {
        return pop.costs.subspan(k * pop.swarm_size, pop.swarm_size);
    }

    StatsOptions options_;
    std::optional<std::pair<double, double>> range_;
};

// ---------------------------------------------------------------------------
// CSV export

namespace detail {

/// Shortest round-trip representation.
inline std::string fmt_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, res.ptr};
}

inline std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
    return out;
}

inline void finish(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

}  // namespace detail

inline std::string stats_csv(std::span<const IterationStats> series) {
    std::string out = "iter,p5,p25,p50,p75,best,global_best,time_ms\n";
    using detail::fmt_number;
    for (const auto& s : series) {
        out += std::to_string(s.t);
        for (double p : s.percentiles) out += ',' + fmt_number(p);
        out += ',' + fmt_number(s.best) + ',' + fmt_number(s.global_best) + ',' + fmt_number(s.time_ms) + '\n';
    }
    return out;
}

inline std::string pmf_csv(std::span<const IterationStats> series) {
    std::string out = "iter,bin_lo,bin_hi,freq\n";
    using detail::fmt_number;
    for (const auto& s : series) {
        const std::string iter = std::to_string(s.t);
        for (std::size_t k = 0; k < s.pmf.bins(); ++k) {
            out += iter + ',' + fmt_number(s.pmf.edge(k)) + ',' + fmt_number(s.pmf.edge(k + 1)) + ',' +
                   fmt_number(s.pmf.freq[k]) + '\n';
        }
    }
    return out;
}

/// Per-swarm percentile series: the leading swarm per iteration, or every swarm
/// when all_swarm_percentiles was enabled.
inline std::string swarm_csv(std::span<const IterationStats> series) {
    std::string out = "iter,swarm,p5,p25,p50,p75,swarm_best\n";
    using detail::fmt_number;
    auto row = [&](std::size_t t, std::size_t k, const std::array<double, 4>& p, double best) {
        out += std::to_string(t) + ',' + std::to_string(k);
        for (double v : p) out += ',' + fmt_number(v);
        out += ',' + fmt_number(best) + '\n';
    };
    for (const auto& s : series) {
        if (s.swarm_percentiles.empty()) {
            row(s.t, s.leader_swarm, s.leader_percentiles, s.swarm_best[s.leader_swarm]);
        } else {
            for (std::size_t k = 0; k < s.swarm_percentiles.size(); ++k) row(s.t, k, s.swarm_percentiles[k], s.swarm_best[k]);
        }
    }
    return out;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    auto out = detail::open_for_write(path);
    out << text;
    detail::finish(out, path);
}

/// Writes stats.csv and pmf.csv into directory dir (created if missing).
inline void export_csv(std::span<const IterationStats> series, const std::filesystem::path& dir) {
    if (series.empty()) throw std::invalid_argument("export_csv: empty series");
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    write_text(dir / "stats.csv", stats_csv(series));
    write_text(dir / "pmf.csv", pmf_csv(series));
}

}  // namespace qapswarm
