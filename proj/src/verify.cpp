#include "zhang/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "zhang/asm.hpp"
#include "zhang/core.hpp"
#include "zhang/engine.hpp"
#include "zhang/onesite.hpp"
#include "zhang/rng.hpp"
#include "zhang/tracking.hpp"

namespace zhang {

void SuiteResult::fail(std::string message) {
    passed = false;
    ++failures;
    if (messages.size() < 10) messages.push_back(std::move(message));
}

void SuiteResult::fail(const std::string& kind, const std::string& detail) {
    passed = false;
    ++failures;
    if (tally[kind]++ == 0 && messages.size() < 10) messages.push_back(kind + ": " + detail);
}

std::vector<std::string> suite_names() { return {"abelian", "fsc", "coefficients", "asm-match", "onesite"}; }

SuiteResult run_suite(const std::string& name, const SuiteOptions& options) {
    if (name == "abelian") return verify_abelian(options);
    if (name == "fsc") return verify_fsc(options);
    if (name == "coefficients") return verify_coefficients(options);
    if (name == "asm-match") return verify_asm_match(options);
    if (name == "onesite") return verify_onesite(options);
    throw std::invalid_argument("unknown suite: " + name);
}

namespace {

// Stable energies with extra weight on empty and nearly critical sites.
std::vector<double> random_stable(Rng& rng, std::size_t n) {
    std::vector<double> e(n);
    for (double& v : e) {
        const auto kind = rng.index(10);
        if (kind == 0) {
            v = 0.0;
        } else if (kind < 4) {
            v = rng.uniform(0.9, 1.0);
        } else {
            v = rng.uniform01();
        }
    }
    return e;
}

// Energies in [1/2, 1) with at most one exception, so no FSC is present.
std::vector<double> random_fsc_free(Rng& rng, std::size_t n) {
    std::vector<double> e(n);
    for (double& v : e) v = rng.uniform(0.5, 1.0);
    if (rng.index(2) == 0) e[rng.index(n)] = rng.index(3) == 0 ? 0.0 : rng.uniform01();
    return e;
}

bool fsc_bruteforce(const std::vector<double>& e) {
    const std::size_t n = e.size();
    for (std::size_t l = 0; l < n; ++l) {
        for (std::size_t r = l + 1; r < n; ++r) {
            bool ok = true;
            for (std::size_t j = l; j <= r && ok; ++j) {
                const double deg = (j == l || j == r) ? 1.0 : 2.0;
                ok = 2.0 * e[j] < deg;
            }
            if (ok) return true;
        }
    }
    return false;
}

std::string describe(const std::vector<double>& e) {
    std::ostringstream os;
    os.precision(17);
    os << '(';
    for (std::size_t j = 0; j < e.size(); ++j) os << (j ? ", " : "") << e[j];
    os << ')';
    return os.str();
}

const ModelParams kParamGrid[] = {{1, 0.0, 1.0}, {1, 0.5, 1.0}, {1, 0.0, 0.5}, {1, 0.2, 0.7}, {1, 0.6, 0.9}};

}  // namespace

SuiteResult verify_abelian(const SuiteOptions& o) {
    SuiteResult r;
    r.name = "abelian";
    if (o.sites < 1) throw std::invalid_argument("abelian suite needs at least one site");
    Rng rng(o.seed);
    std::vector<TopplingPolicy> policies = {leftmost_policy(), rightmost_policy()};
    for (std::size_t k = 0; k < o.orders; ++k) policies.push_back(random_policy(mix_seed(o.seed, 100 + k)));

    const std::size_t n = o.sites;
    for (std::size_t trial = 0; trial < o.trials; ++trial) {
        const std::vector<double> before = random_stable(rng, n);
        const std::size_t x = rng.index(n);
        const double u = rng.uniform01();
        std::vector<double> reference = before;
        const AvalancheReport report = add_and_stabilize_in_place(reference, x, u);
        std::vector<double> post = before;
        post[x] += u;
        const Configuration start(post);
        for (const TopplingPolicy& policy : policies) {
            ++r.checks;
            const AnyOrderResult any = stabilize_any_order(start, policy);
            double diff = 0.0;
            for (std::size_t j = 0; j < n; ++j) diff = std::max(diff, std::abs(any.config[j] - reference[j]));
            r.worst = std::max(r.worst, diff);
            if (diff > 1e-12 || any.topple_counts != report.topple_counts) {
                r.fail("order dependence from " + describe(before) + " adding " + std::to_string(u) + " at " +
                       std::to_string(x));
            }
        }
    }

    ++r.checks;
    try {
        (void)stabilize_any_order(Configuration{1.2, 1.6}, leftmost_policy());
        r.fail("(1.2, 1.6) was accepted as a toppling input");
    } catch (const std::domain_error&) {
    }
    return r;
}

SuiteResult verify_fsc(const SuiteOptions& o) {
    SuiteResult r;
    r.name = "fsc";
    if (o.sites < 2) throw std::invalid_argument("fsc suite needs at least two sites");
    Rng rng(o.seed);
    const std::size_t chain_length = 100;
    std::size_t done = 0;
    for (std::size_t chain = 0; done < o.trials; ++chain) {
        ModelParams p = kParamGrid[chain % std::size(kParamGrid)];
        p.n_sites = o.sites;
        std::vector<double> e = random_fsc_free(rng, p.n_sites);
        for (std::size_t k = 0; k < chain_length && done < o.trials; ++k, ++done) {
            const AdditionEvent ev = draw_addition(rng, p, k + 1);
            const std::vector<double> before = e;
            add_and_stabilize_in_place(e, ev.site, ev.amount, ev.time);
            r.checks += 2;
            const bool fast = has_zhang_fsc(Configuration(e));
            if (fast != fsc_bruteforce(e)) r.fail("interval scan disagrees with brute force on " + describe(e));
            if (fast) r.fail("FSC created from " + describe(before) + " to " + describe(e));
        }
    }
    return r;
}

SuiteResult verify_coefficients(const SuiteOptions& o) {
    SuiteResult r;
    r.name = "coefficients";
    const std::size_t n = o.sites;
    if (n < 1 || n > 8) throw std::invalid_argument("coefficient suite runs with 1 <= N <= 8");
    const ModelParams p = make_params(n, 0.5, 1.0);
    Rng rng(o.seed);
    const std::uint64_t settle = static_cast<std::uint64_t>(n) * (n - 1) + 1;
    const std::size_t chain_length = 500;
    TrackingOptions topts;
    topts.full_tracking = true;

    std::size_t avalanches = 0;
    while (avalanches < o.trials) {
        std::vector<double> e = random_stable(rng, n);
        std::uint64_t t = 0;
        for (; t < settle; ++t) {
            const AdditionEvent ev = draw_addition(rng, p, t + 1);
            add_and_stabilize_in_place(e, ev.site, ev.amount, ev.time);
        }
        CoefficientState state = start_tracking(Configuration(e), t, topts);
        DecayReport previous = decay_diagnostics(state);
        for (std::size_t k = 0; k < chain_length && avalanches < o.trials; ++k) {
            ++t;
            const AdditionEvent ev = draw_addition(rng, p, t);
            const std::vector<double> before = e;
            const AvalancheReport report = add_and_stabilize_in_place(e, ev.site, ev.amount, t);
            FMatrix f;
            if (report.avalanche()) {
                ++avalanches;
                f = wave_f_coefficients(report);
                const FMatrixCheck c = check_f_matrix(f, report, before, e);
                r.checks += 4;
                r.worst = std::max({r.worst, c.max_weight_error, c.max_reconstruction_error});
                if (c.max_weight_error > 1e-9) r.fail("column weight differs from reduction", "after adding " + std::to_string(ev.amount) + " at " + std::to_string(ev.site) + " to " + describe(before));
                if (c.max_reconstruction_error > 1e-9) r.fail("energy reconstruction failed", "after adding " + std::to_string(ev.amount) + " at " + std::to_string(ev.site) + " to " + describe(before));
                if (!c.lower_bound_ok) r.fail("origin fraction below bound", "after adding " + std::to_string(ev.amount) + " at " + std::to_string(ev.site) + " to " + describe(before));
                if (!c.monotone_ok) r.fail("origin fractions not monotone", "after adding " + std::to_string(ev.amount) + " at " + std::to_string(ev.site) + " to " + describe(before));
            }
            state = update_fractions(std::move(state), report, f);
            const DecayReport now = decay_diagnostics(state, &previous);
            r.checks += 2;
            if (now.envelope_violations > 0) r.fail("fraction above decay envelope", "t=" + std::to_string(t));
            if (now.monotonicity_violations > 0) r.fail("fraction increased", "t=" + std::to_string(t));
            previous = now;
            for (std::size_t j = 0; j < n; ++j) {
                r.checks += 2;
                const double residual = std::abs(state.reconstruct(j) - e[j]);
                r.worst = std::max(r.worst, residual);
                if (residual > 1e-9) r.fail("fraction reconstruction residual", "t=" + std::to_string(t));
                const double total = state.site_total(j);
                const double expected = e[j] != 0.0 ? 1.0 : 0.0;
                if (std::abs(total - expected) > 1e-9) r.fail("site total differs from reduction", "t=" + std::to_string(t));
            }
        }
    }
    return r;
}

SuiteResult verify_asm_match(const SuiteOptions& o) {
    SuiteResult r;
    r.name = "asm-match";
    const std::size_t n = o.sites;
    const ModelParams p = make_params(n, 0.5, 1.0);
    Rng rng(o.seed);
    std::vector<double> e(n, 0.0);
    std::uint64_t t = 0;
    const std::uint64_t settle = static_cast<std::uint64_t>(n) * (n - 1);
    for (; t < settle; ++t) {
        const AdditionEvent ev = draw_addition(rng, p, t + 1);
        add_and_stabilize_in_place(e, ev.site, ev.amount, ev.time);
    }
    for (std::size_t k = 0; k < o.trials; ++k) {
        ++t;
        const Configuration before(e);
        r.checks += 3;
        if (!is_regular(before)) r.fail("not regular at t=" + std::to_string(t - 1) + ": " + describe(e));
        const AdditionEvent ev = draw_addition(rng, p, t);
        const AvalancheReport report = add_and_stabilize_in_place(e, ev.site, ev.amount, t);
        const asm1d::AsmResult expected = asm1d::asm_add(asm1d::from_reduction(reduce(before)), ev.site);
        if (asm1d::from_reduction(reduce(Configuration(e))) != expected.config) {
            r.fail("reduction differs from the sandpile at t=" + std::to_string(t));
        }
        if (report.topple_counts != expected.topple_counts) {
            r.fail("toppling counts differ from the sandpile at t=" + std::to_string(t));
        }
    }
    return r;
}

SuiteResult verify_onesite(const SuiteOptions& o) {
    SuiteResult r;
    r.name = "onesite";
    (void)o;
    for (double b : {1.0, 0.5, 0.1}) {
        const OneSiteDistribution d(b);
        double last = 0.0;
        for (int k = 0; k <= 200; ++k) {
            const double h = k / 200.0;
            const DelayResidual res = onesite_delay_residual(d, h);
            ++r.checks;
            r.worst = std::max(r.worst, std::abs(res.integral_form));
            if (std::abs(res.integral_form) > 1e-6) r.fail("delay residual at b=" + std::to_string(b) + " h=" + std::to_string(h));
            if (res.differential_form) {
                ++r.checks;
                r.worst = std::max(r.worst, std::abs(*res.differential_form));
                if (std::abs(*res.differential_form) > 1e-6) {
                    r.fail("differential residual at b=" + std::to_string(b) + " h=" + std::to_string(h));
                }
            }
            const double F = onesite_cdf(d, h);
            ++r.checks;
            if (F < last - 1e-12) r.fail("distribution function decreases at b=" + std::to_string(b));
            last = F;
        }
        ++r.checks;
        if (std::abs(onesite_cdf(d, 1.0) - 1.0) > 1e-12) r.fail("F(1) != 1 at b=" + std::to_string(b));
        if (b < 1.0) {
            ++r.checks;
            const OneSidedDensity jump = onesite_pdf(d, b);
            if (!jump.discontinuous()) r.fail("no density jump at h=b for b=" + std::to_string(b));
        }
    }
    ++r.checks;
    if (std::abs(OneSiteDistribution(1.0).f0() - std::exp(-1.0)) > 1e-12) r.fail("F(0) at b=1 differs from 1/e");
    const OneSiteDistribution small(0.01);
    double sup = 0.0;
    for (int k = 0; k <= 100; ++k) sup = std::max(sup, std::abs(onesite_cdf(small, k / 100.0) - k / 100.0));
    ++r.checks;
    if (sup > 0.02) r.fail("b=0.01 closed form is not within 0.02 of the identity");
    return r;
}

}  // namespace zhang
