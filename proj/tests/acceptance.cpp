// Acceptance suite: one PASS/FAIL line per criterion.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "zhang/coupling.hpp"
#include "zhang/montecarlo.hpp"
#include "zhang/onesite.hpp"
#include "zhang/statistics.hpp"
#include "zhang/verify.hpp"

using namespace zhang;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int failures = 0;

void report(int id, const char* title, bool ok, std::string detail) {
    while (!detail.empty() && (detail.back() == ' ' || detail.back() == ';')) detail.pop_back();
    std::printf("%s %2d %s: %s\n", ok ? "PASS" : "FAIL", id, title, detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* pattern, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, pattern, args...);
    return buf;
}

RunConfig run(std::size_t n, double a, double b, std::uint64_t steps, std::uint64_t seed) {
    RunConfig cfg;
    cfg.params = make_params(n, a, b);
    cfg.steps = steps;
    cfg.seed = seed;
    return cfg;
}

// FSC creations seen by the simulations of criteria 4 to 7.
std::uint64_t fsc_creations = 0;
std::uint64_t fsc_steps = 0;

void note_fsc(const StationaryStats& st) {
    fsc_creations += st.invariants.fsc_creations;
    fsc_steps += st.config.steps;
}

void one_site_law() {
    const auto start = Clock::now();
    RunConfig cfg = run(1, 0.0, 0.5, 1000000, 101);
    cfg.bins = 10000;
    const StationaryStats st = simulate_stationary(cfg);
    const OneSiteDistribution d(0.5);
    const double sup = sup_cdf_distance(st, 0, [&](double h) { return onesite_cdf(d, h); });
    const double zero = st.zero_frequency[0];
    const double sigma = st.empty_site_std_error;  // one site: the empty-site frequency is the zero atom
    const double elapsed = seconds_since(start);
    const bool ok = sup <= 0.01 && std::abs(zero - d.f0()) <= 3.0 * sigma && elapsed < 10.0;
    report(1, "one-site exact law", ok,
           fmt("sup|F_emp - F| = %.5f (<= 0.01), zero atom %.5f vs F(0) = %.5f, |diff|/sigma = %.2f (<= 3), %.2f s "
               "(< 10 s)",
               sup, zero, d.f0(), std::abs(zero - d.f0()) / sigma, elapsed));
}

void small_b_limit() {
    const double b = 0.01;
    const OneSiteDistribution d(b);
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k) grid.push_back(k / 100.0);
    double closed = 0.0;
    for (double h : grid) closed = std::max(closed, std::abs(onesite_cdf(d, h) - h));
    const auto est = renewal_oracle(b, grid, 1000000, Rng(202));
    double renewal = 0.0;
    double worst_sigma = 0.0;
    for (const RenewalEstimate& e : est) {
        renewal = std::max(renewal, std::abs(e.estimate - e.h));
        worst_sigma = std::max(worst_sigma, e.std_error);
    }
    report(2, "b -> 0 limit", closed <= 0.02 && renewal <= 0.02,
           fmt("closed form sup|F - h| = %.5f, renewal oracle sup|F - h| = %.5f (max sigma %.1e), both <= 0.02", closed,
               renewal, worst_sigma));
}

void delay_residual() {
    double worst = 0.0;
    for (double b : {1.0, 0.5, 0.1}) {
        const OneSiteDistribution d(b);
        for (int k = 0; k <= 1000; ++k) {
            const DelayResidual r = onesite_delay_residual(d, k / 1000.0);
            worst = std::max(worst, std::abs(r.integral_form));
        }
    }
    report(3, "delay-equation residual", worst <= 1e-6,
           fmt("max |residual| = %.2e over 1001 points for b in {1, 1/2, 1/10} (<= 1e-6)", worst));
}

void empty_site_law() {
    bool ok = true;
    std::string detail;
    for (std::size_t n : {5u, 10u, 20u}) {
        const StationaryStats st = simulate_stationary(run(n, 0.5, 1.0, 1000000, 400 + n));
        note_fsc(st);
        const double target = 1.0 / (n + 1);
        const double z = std::abs(st.empty_site_frequency - target) / st.empty_site_std_error;
        const stats::ChiSquareResult chi = stats::chi_square_uniform(st.empty_position_counts);
        const bool pass = z <= 3.0 && chi.p_value > 0.01 && st.invariants.regularity_violations == 0 &&
                          st.invariants.regularity_checks > 0;
        ok = ok && pass;
        detail += fmt("N=%zu freq %.5f vs %.5f (%.2f sigma), chi2 p=%.3f, %llu/%llu irregular; ", n,
                      st.empty_site_frequency, target, z, chi.p_value,
                      static_cast<unsigned long long>(st.invariants.regularity_violations),
                      static_cast<unsigned long long>(st.invariants.regularity_checks));
    }
    report(4, "empty-site law", ok, detail);
}

void quasi_units() {
    const auto start = Clock::now();
    std::vector<StationaryStats> runs;
    for (std::size_t n : {10u, 30u, 50u}) {
        runs.push_back(simulate_stationary(run(n, 0.5, 1.0, 500000, 500 + n)));
        note_fsc(runs.back());
    }
    const QuasiUnitTable t = quasi_unit_report(runs);
    const double elapsed = seconds_since(start);
    const double last = t.rows.back().max_mean_deviation;
    const bool ok = last <= 0.02 && t.deviation_decreasing && t.variance_decreasing && elapsed < 300.0;
    std::string detail;
    for (const auto& r : t.rows) {
        detail += fmt("N=%zu max|mean-0.75| %.4f max var %.5f; ", r.n_sites, r.max_mean_deviation, r.max_variance);
    }
    detail += fmt("decreasing: deviation %s, variance %s; %.1f s (< 300 s)", t.deviation_decreasing ? "yes" : "no",
                  t.variance_decreasing ? "yes" : "no", elapsed);
    report(5, "quasi-units", ok, detail);
}

void sqrt_half() {
    RunConfig cfg = run(100, 0.0, 1.0, 200000, 600);
    const StationaryStats st = simulate_stationary(cfg);
    note_fsc(st);
    const std::size_t centre = 50;
    const double mean = st.mean[st.slot(centre)];
    const double var_centre = st.variance[st.slot(centre)];
    const double var_left = st.variance[st.slot(0)];
    const double var_right = st.variance[st.slot(99)];
    const bool ok = std::abs(mean - std::sqrt(0.5)) <= 0.02 && var_left > var_centre && var_right > var_centre;
    report(6, "sqrt(1/2) concentration", ok,
           fmt("central mean %.4f +- %.4f vs 0.70711 (within 0.02); variance boundary %.4f / %.4f > central %.4f", mean,
               st.mean_std_error[st.slot(centre)], var_left, var_right, var_centre));
}

void conservation() {
    bool ok = true;
    std::string detail;
    for (auto [a, b] : {std::pair{0.0, 1.0}, std::pair{0.5, 1.0}}) {
        const RunConfig cfg = run(30, a, b, 1000000, 700 + static_cast<std::uint64_t>(10 * a));
        const StationaryStats st = simulate_stationary(cfg);
        note_fsc(st);
        const ConservationReport r = conservation_probe(st, cfg.params);
        ok = ok && std::abs(r.discrepancy) <= 0.01;
        detail += fmt("[%.1f,%.1f]: %.4f +- %.4f vs %.2f; ", a, b, r.mean_dissipated, r.std_error, r.expected);
    }
    report(7, "conservation", ok, detail + "tolerance 0.01");
}

void abelian() {
    std::size_t checks = 0, fails = 0;
    double worst = 0.0;
    for (std::size_t n = 1; n <= 10; ++n) {
        SuiteOptions o;
        o.sites = n;
        o.seed = 800 + n;
        o.trials = 1000;
        o.orders = 5;
        const SuiteResult r = verify_abelian(o);
        checks += r.checks;
        fails += r.failures;
        worst = std::max(worst, r.worst);
    }
    report(8, "abelianness", fails == 0,
           fmt("10^4 configurations, N = 1..10, 7 orders each (5 random): %zu checks, %zu failures, worst %.1e "
               "(<= 1e-12); (1.2, 1.6) rejected",
               checks, fails, worst));
}

void asm_correspondence() {
    bool ok = true;
    std::string detail;
    for (std::size_t n : {5u, 20u}) {
        SuiteOptions o;
        o.sites = n;
        o.seed = 900 + n;
        o.trials = 10000;
        const SuiteResult r = verify_asm_match(o);
        ok = ok && r.passed;
        detail += fmt("N=%zu: %zu checks, %zu mismatches; ", n, r.checks, r.failures);
    }
    report(9, "ASM correspondence", ok, detail);
}

void coefficients() {
    bool ok = true;
    std::string detail;
    for (std::size_t n : {4u, 8u}) {
        SuiteOptions o;
        o.sites = n;
        o.seed = 1000 + n;
        o.trials = 10000;
        const SuiteResult r = verify_coefficients(o);
        ok = ok && r.passed;
        detail += fmt("N=%zu: 10^4 avalanches, %zu checks, %zu failures, worst residual %.1e", n, r.checks,
                      r.failures, r.worst);
        for (const auto& [kind, count] : r.tally) detail += fmt(" (%s: %zu)", kind.c_str(), count);
        detail += "; ";
    }
    report(10, "coefficient invariants", ok, detail);
}

void coupling_time() {
    const std::size_t n = 5;
    const ModelParams p = make_params(n, 0.5, 1.0);
    Rng rng(1100);
    std::vector<std::uint64_t> gaps;
    std::size_t monotone_failures = 0, unresolved = 0;
    double worst_final = 0.0;
    for (int attempt = 0; attempt < 10000; ++attempt) {
        // Two regular starts with different reductions.
        std::vector<double> e1(n), e2(n);
        for (double& v : e1) v = rng.uniform(0.5, 1.0);
        for (double& v : e2) v = rng.uniform(0.5, 1.0);
        const std::size_t s1 = rng.index(n + 1);
        std::size_t s2 = rng.index(n);
        if (s2 >= s1) ++s2;
        if (s1 < n) e1[s1] = 0.0;
        if (s2 < n) e2[s2] = 0.0;
        ChainPairOptions o;
        o.start1 = Configuration(e1);
        o.start2 = Configuration(e2);
        const CouplingResult r = couple_reduction_match(p, mix_seed(1100, attempt), 1000000, o);
        if (!r.met) {
            ++unresolved;
            continue;
        }
        gaps.push_back(*r.meeting_time - *r.first_regular_time);
        for (std::size_t k = 1; k < r.decay_trace.size(); ++k) {
            if (r.decay_trace[k] > r.decay_trace[k - 1]) ++monotone_failures;
        }
        worst_final = std::max(worst_final, r.decay_trace.back());
    }
    double mean = 0.0;
    for (auto g : gaps) mean += static_cast<double>(g);
    mean /= static_cast<double>(gaps.size());
    const double target = static_cast<double>(n * n) / (n - 1);
    const stats::ChiSquareResult fit = stats::geometric_gof(gaps, 1.0 / target);
    const bool ok = unresolved == 0 && std::abs(mean - target) <= 0.05 * target && fit.p_value > 0.01 &&
                    monotone_failures == 0 && worst_final < 1e-9;
    report(11, "coupling-time law", ok,
           fmt("mean T - T' = %.3f vs %.2f (within 5%%), geometric chi2 p = %.3f (> 0.01), %zu increases in decay "
               "traces, largest final difference %.3e (< 1e-9)",
               mean, target, fit.p_value, monotone_failures, worst_final));
}

void equalization() {
    bool ok = true;
    std::string detail;
    for (std::size_t n : {2u, 3u}) {
        std::size_t met = 0, attempts = 0;
        std::vector<double> amounts;
        for (std::uint64_t seed = 0; seed < 100; ++seed) {
            const CouplingResult r = couple_equalize_zero_one(make_params(n, 0.0, 1.0), 1200 + 1000 * n + seed, 100000);
            if (r.met) ++met;
            attempts += r.attempts.size();
            amounts.insert(amounts.end(), r.coupled_amounts.begin(), r.coupled_amounts.end());
        }
        const stats::KsResult ks = stats::ks_uniform(amounts);
        ok = ok && met == 100 && ks.p_value > 0.01;
        detail += fmt("N=%zu: %zu/100 met, %zu attempts, KS p = %.3f over %zu amounts; ", n, met, attempts, ks.p_value,
                      amounts.size());
    }
    report(12, "[0,1] equalization coupling", ok, detail);
}

void fsc_preservation() {
    report(13, "FSC preservation", fsc_creations == 0 && fsc_steps > 0,
           fmt("%llu FSC creations over %llu steps of criteria 4-7",
               static_cast<unsigned long long>(fsc_creations), static_cast<unsigned long long>(fsc_steps)));
}

}  // namespace

int main() {
    one_site_law();
    small_b_limit();
    delay_residual();
    empty_site_law();
    quasi_units();
    sqrt_half();
    conservation();
    abelian();
    asm_correspondence();
    coefficients();
    coupling_time();
    equalization();
    fsc_preservation();
    std::printf("%d of 13 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
