#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "zhang/core.hpp"
#include "zhang/statistics.hpp"

namespace zhang {

struct RunConfig {
    ModelParams params;
    std::uint64_t steps = 1;
    double burn_in_fraction = 0.10;
    std::uint64_t seed = 0;
    std::size_t bins = 200;
    /// Sites with histograms and moments; empty means all sites.
    std::vector<std::size_t> tracked_sites;
    /// Site pairs (x, y) for which joint histograms are kept.
    std::vector<std::pair<std::size_t, std::size_t>> pairs;
    std::size_t batches = 50;
    /// Starting configuration; the all-empty configuration when unset.
    std::optional<Configuration> initial;

    void validate() const;
    std::uint64_t burn_in_steps() const;
};

/// Histogram over [0, 1) with the exact zero kept apart.
struct SiteHistogram {
    std::vector<std::uint64_t> counts;
    std::uint64_t zero_atom = 0;

    std::uint64_t total() const;
};

/// Joint histogram of (energy at x, energy at y); cell 0 on each axis is the zero atom.
struct PairJoint {
    std::size_t x = 0;
    std::size_t y = 0;
    std::vector<std::uint64_t> cells;  // (bins + 1) * (bins + 1), row = x cell
};

/// Checks that run alongside every simulation.
struct InvariantCounters {
    std::uint64_t fsc_creations = 0;          // steps that turned an FSC-free configuration into one with an FSC
    std::uint64_t regularity_checks = 0;      // a >= 1/2 only, steps t >= N(N-1)
    std::uint64_t regularity_violations = 0;
    std::uint64_t multi_deficiency_samples = 0;  // post burn-in samples with two or more sites below 1/2
    std::uint64_t last_multi_deficiency_step = 0;
};

struct StationaryStats {
    RunConfig config;
    std::uint64_t sample_count = 0;
    std::vector<std::size_t> sites;
    std::vector<SiteHistogram> histograms;

    // Per tracked site.
    std::vector<double> sum;
    std::vector<double> sum_squares;
    std::vector<double> mean;
    std::vector<double> variance;
    std::vector<double> mean_std_error;
    std::vector<double> zero_frequency;

    /// Fraction of (sample, site) pairs with an empty site, over all N sites.
    double empty_site_frequency = 0.0;
    double empty_site_std_error = 0.0;
    /// Positions of the empty site in samples that have exactly one.
    std::vector<std::uint64_t> empty_position_counts;
    std::uint64_t single_empty_samples = 0;

    double mean_dissipated = 0.0;
    double dissipated_std_error = 0.0;

    std::vector<PairJoint> pair_joints;
    InvariantCounters invariants;

    // Batch means kept so that replicas can be merged.
    std::vector<std::vector<double>> batch_site_means;  // [batch][tracked site]
    std::vector<double> batch_empty_frequency;
    std::vector<double> batch_dissipated;

    /// Index of `site` among the tracked sites; throws if untracked.
    std::size_t slot(std::size_t site) const;
};

/// Run from the initial configuration, discard the burn-in, accumulate statistics.
StationaryStats simulate_stationary(const RunConfig& cfg);

/// Independent replicas with seeds derived from cfg.seed, merged by summation.
StationaryStats simulate_replicas(const RunConfig& cfg, std::size_t replicas, std::size_t threads);

/// Recompute the derived fields (means, errors) from sums and batch values.
void finalize(StationaryStats& stats);

/// Merge statistics of runs with identical parameters.
StationaryStats merge(std::span<const StationaryStats> parts);

struct ConservationReport {
    double mean_dissipated = 0.0;
    double expected = 0.0;  // (a + b) / 2
    double discrepancy = 0.0;
    double std_error = 0.0;
};

/// Throws std::runtime_error("insufficient samples") when nothing was sampled.
ConservationReport conservation_probe(const StationaryStats& stats, const ModelParams& params);

struct QuasiUnitRow {
    std::size_t n_sites = 0;
    double max_mean_deviation = 0.0;  // max over sites of |mean - (a + b)/2|
    double max_variance = 0.0;
    double central_variance = 0.0;
};

struct QuasiUnitTable {
    std::vector<QuasiUnitRow> rows;  // increasing N
    bool deviation_decreasing = false;
    bool variance_decreasing = false;
};

/// Requires at least three runs of distinct size; throws std::invalid_argument otherwise.
QuasiUnitTable quasi_unit_report(std::span<const StationaryStats> runs);

/// Half-open energy interval [lo, hi).
struct EnergyEvent {
    double lo = 0.0;
    double hi = 1.0;
};

struct IndependenceEstimate {
    std::size_t x = 0;
    std::size_t y = 0;
    double estimate = 0.0;  // P(x in B | y in A) - P(x in B)
    double sigma = 0.0;
    double conditioning_mass = 0.0;
    bool flagged = false;  // conditioning event never observed
};

/**
 * @brief Dependence diagnostic from the joint histogram of (x, y).
 *
 * Events are resolved at histogram resolution: a bin belongs to an event when
 * its centre does; the zero atom belongs when lo <= 0 < hi. sigma is the
 * binomial error of the conditional frequency and ignores autocorrelation.
 */
IndependenceEstimate independence_probe(const StationaryStats& stats, std::size_t x, std::size_t y,
                                        EnergyEvent a_event, EnergyEvent b_event);

/// Sup over bin edges of |empirical CDF - reference CDF| for one tracked site.
double sup_cdf_distance(const StationaryStats& stats, std::size_t site,
                        const std::function<double(double)>& reference);

}  // namespace zhang
