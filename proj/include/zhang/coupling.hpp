#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "zhang/core.hpp"

namespace zhang {

/// Possible step counts between successive zeros of the one-site chain.
struct PeriodicityInfo {
    std::vector<std::uint64_t> n_set;  // {n : (n-1)a < 1 and nb > 1}; first terms only when unbounded
    std::uint64_t gcd = 1;
    bool periodic = false;
    bool unbounded = false;  // a = 0
};

/// Requires 0 <= a < b <= 1.
PeriodicityInfo periodicity_info(double a, double b);

enum class CouplingMode { Shift, Exact, ReductionMatch, Equalize };

std::string to_string(CouplingMode mode);

/// One equalization attempt (or one exact-coupling probe).
struct AttemptRecord {
    std::uint64_t attempt = 0;
    std::uint64_t start_time = 0;  // trigger time
    bool success = false;
    std::vector<double> max_difference;  // max_j |difference| before and after each coupled addition
};

struct CouplingResult {
    bool met = false;
    std::optional<std::uint64_t> meeting_time;
    CouplingMode mode = CouplingMode::Shift;

    // Shift mode: first positive zero-hitting times of each chain.
    std::optional<std::uint64_t> t1;
    std::optional<std::uint64_t> t2;

    // Reduction matching: first time both chains are regular.
    std::optional<std::uint64_t> first_regular_time;
    /// max_j |difference| at the meeting time and after each shared addition.
    std::vector<double> decay_trace;

    // Equalization.
    std::vector<AttemptRecord> attempts;
    /// Amounts (U + Delta) mod 1 used by the second chain during coupled additions.
    std::vector<double> coupled_amounts;

    std::uint64_t steps = 0;
};

struct OneSiteCouplingOptions {
    double start1 = 0.0;
    double start2 = 0.5;
    CouplingMode mode = CouplingMode::Exact;
    /// Run exact mode even when the chain is periodic (diagnostics only).
    bool force_exact = false;
};

/**
 * @brief Two independent single-site chains with additions uniform on [a, b].
 *
 * Shift mode records the first positive zero-hitting time of each chain and
 * meets when both exist. Exact mode looks for the first positive time at which
 * both chains are zero; for periodic parameters it is replaced by shift mode
 * unless force_exact is set.
 */
CouplingResult couple_one_site(double a, double b, std::uint64_t seed, std::uint64_t max_steps,
                               const OneSiteCouplingOptions& options = {});

struct ChainPairOptions {
    std::optional<Configuration> start1;  // all-empty when unset
    std::optional<Configuration> start2;
    /// Seed of the second chain; derived from the main seed when unset.
    std::optional<std::uint64_t> seed2;
    /// Reduction matching stops tracing once the difference falls below this.
    double trace_until = 1e-9;
    /// Limit on shared additions after the meeting time.
    std::uint64_t max_trace_steps = 100000;
};

/**
 * @brief Coupling for a >= 1/2.
 *
 * The chains evolve independently until T, the first time at or after the
 * time both are regular at which their reductions agree. From then on both
 * receive the additions of the first chain; the reductions are checked to stay
 * equal (std::logic_error otherwise) and the largest site difference is traced
 * until it falls below trace_until.
 */
CouplingResult couple_reduction_match(const ModelParams& params, std::uint64_t seed, std::uint64_t max_steps,
                                      const ChainPairOptions& options = {});

/// max over sites of |c1 - c2| that still counts as equal after an equalization attempt.
inline constexpr double equalization_tolerance = 1e-12;

/// Trigger margin 2^-(N+1).
double equalization_margin(std::size_t n_sites);

/// Site 0 empty in both, all other sites full, and below 1 - 2^-(N+1) when N > 2.
bool equalization_trigger(const std::vector<double>& c1, const std::vector<double>& c2);

/**
 * @brief Coupling for [a, b] = [0, 1].
 *
 * Independent evolution until the trigger; then N - 1 coupled additions in
 * which the second chain uses the site of the first and the amount
 * (U + Delta_X) mod 1, Delta being the current difference at that site. The
 * attempt succeeds when the configurations agree afterwards (within
 * equalization_tolerance; the second chain is then set to the first). Failed
 * attempts return to independent evolution.
 */
CouplingResult couple_equalize_zero_one(const ModelParams& params, std::uint64_t seed, std::uint64_t max_attempts,
                                        const ChainPairOptions& options = {},
                                        std::uint64_t max_steps = 100000000);

/// CSV with header attempt,kind,index,value: shift/meeting times, decay trace, attempt outcomes.
void write_coupling_csv(std::ostream& os, const CouplingResult& result);

}  // namespace zhang
