#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "zhang/core.hpp"
#include "zhang/rng.hpp"

namespace zhang {

/// One random addition: `amount` added at `site` at step `time`.
struct AdditionEvent {
    std::uint64_t time = 0;
    std::size_t site = 0;
    double amount = 0.0;
};

/**
 * @brief Topplings of one wave, in the order they were performed.
 *
 * The origin topples first, then the fronts move outward one site at a time,
 * left before right at equal distance. left_end/right_end are the outermost
 * toppled sites.
 */
struct Wave {
    std::size_t index = 0;  // 1-based wave number
    std::vector<std::size_t> toppled;
    std::size_t left_end = 0;
    std::size_t right_end = 0;
};

/// Full record of one addition and the avalanche it caused (if any).
struct AvalancheReport {
    AdditionEvent event;
    std::vector<Wave> waves;
    std::vector<std::size_t> range;              // toppled sites and their neighbours, sorted
    std::vector<std::size_t> toppled_set;        // sites that toppled at least once, sorted
    std::vector<std::size_t> anomalous_changed;  // anomalous before, changed, never toppled
    std::vector<std::uint32_t> topple_counts;    // per site
    double dissipated = 0.0;                     // energy lost through the boundary

    bool avalanche() const { return !waves.empty(); }
};

/// Topple `site`: it empties and each existing neighbour receives half. Throws if stable.
Configuration topple(const Configuration& c, std::size_t site);

struct Stabilized {
    Configuration config;
    AvalancheReport report;
};

/**
 * @brief Add `amount` at `site` and stabilize wave by wave.
 *
 * Requires a stable input and amount in [params.a, params.b].
 */
Stabilized add_and_stabilize(const Configuration& c, std::size_t site, double amount,
                             const ModelParams& params, std::uint64_t time = 0);

/**
 * @brief In-place variant used by the simulation loops; performs no validation
 *        of the input beyond what the wave loop itself needs.
 */
AvalancheReport add_and_stabilize_in_place(std::vector<double>& energies, std::size_t site,
                                           double amount, std::uint64_t time = 0);

/// Chooses which unstable site topples next; receives the sorted unstable sites.
using TopplingPolicy = std::function<std::size_t(std::span<const std::size_t>)>;

TopplingPolicy leftmost_policy();
TopplingPolicy rightmost_policy();
/// Uniformly random choice; the policy owns its stream.
TopplingPolicy random_policy(std::uint64_t seed);

struct AnyOrderResult {
    Configuration config;
    std::vector<std::uint32_t> topple_counts;
    double dissipated = 0.0;
};

/**
 * @brief Stabilize a configuration obtained from a stable one by one addition,
 *        toppling unstable sites in the order chosen by `policy`.
 *
 * The input and every intermediate configuration must stay in the toppling
 * domain (see in_toppling_domain); otherwise std::domain_error is thrown.
 */
AnyOrderResult stabilize_any_order(const Configuration& c, const TopplingPolicy& policy);

struct StepResult {
    Configuration config;
    AvalancheReport report;
};

/// One Markov step: uniform site, uniform amount on [a,b], then add_and_stabilize.
StepResult step(const Configuration& c, Rng& rng, const ModelParams& params, std::uint64_t time = 0);

/// Draws the addition for one step; the site is drawn before the amount.
AdditionEvent draw_addition(Rng& rng, const ModelParams& params, std::uint64_t time);

}  // namespace zhang
