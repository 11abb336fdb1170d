#include "doctest.h"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "zhang/engine.hpp"
#include "zhang/tracking.hpp"

using namespace zhang;

namespace {

std::vector<double> random_stable(Rng& rng, std::size_t n) {
    std::vector<double> e(n);
    for (double& v : e) {
        const auto k = rng.index(6);
        v = k == 0 ? 0.0 : (k < 3 ? rng.uniform(0.85, 1.0) : rng.uniform01());
    }
    return e;
}

}  // namespace

TEST_CASE("one toppling splits in half") {
    const ModelParams p = make_params(3, 0.0, 1.0);
    const Configuration before{0.2, 0.9, 0.2};
    const auto s = add_and_stabilize(before, 1, 0.5, p);
    REQUIRE(s.report.toppled_set == std::vector<std::size_t>{1});
    const FMatrix f = wave_f_coefficients(s.report);
    CHECK(f(1, 0) == 0.5);
    CHECK(f(1, 2) == 0.5);
    CHECK(f(1, 1) == 0.0);
    CHECK(f.sources() == std::vector<std::size_t>{1});
    CHECK(f.targets() == std::vector<std::size_t>{0, 1, 2});
    for (std::size_t j : f.targets()) {
        CHECK(reconstruct_energy(f, s.report, before.energies(), j) == doctest::Approx(s.config[j]));
    }
}

TEST_CASE("two-site example is reconstructed from the coefficients") {
    const Configuration before{0.9, 0.8};
    const auto s = add_and_stabilize(before, 0, 0.5, make_params(2, 0.0, 1.0));
    const FMatrix f = wave_f_coefficients(s.report);
    // Site 0 keeps a quarter of its content and half of site 1's.
    CHECK(f(0, 0) == 0.25);
    CHECK(f(1, 0) == 0.5);
    CHECK(f(0, 1) == 0.0);
    CHECK(reconstruct_energy(f, s.report, before.energies(), 0) == doctest::Approx(0.75));
    CHECK(reconstruct_energy(f, s.report, before.energies(), 1) == 0.0);
    const FMatrixCheck c = check_f_matrix(f, s.report, before.energies(), s.config.energies());
    CHECK(c.max_reconstruction_error < 1e-15);
    CHECK(c.lower_bound_ok);
    CHECK(c.monotone_ok);
}

TEST_CASE("origin fraction bound") {
    CHECK(origin_fraction_bound(1) == 0.25);   // 2^-2
    CHECK(origin_fraction_bound(2) == 0.125);  // 2^-3
    CHECK(origin_fraction_bound(8) == std::ldexp(1.0, -12));
    CHECK(decay_envelope(4, 4) == 1.0);
    CHECK(decay_envelope(4, 5) == doctest::Approx(1.0 - std::ldexp(1.0, -6)));
}

TEST_CASE("malformed reports are rejected") {
    const auto s = add_and_stabilize(Configuration{0.9, 0.8}, 0, 0.5, make_params(2, 0.0, 1.0));
    AvalancheReport bad = s.report;
    bad.topple_counts[1] = 3;
    CHECK_THROWS_AS(wave_f_coefficients(bad), std::domain_error);
    AvalancheReport shifted = s.report;
    shifted.waves[0].toppled = {1, 0};
    CHECK_THROWS_AS(wave_f_coefficients(shifted), std::domain_error);
}

TEST_CASE("coefficient structure for a >= 1/2") {
    Rng rng(8);
    for (std::size_t n : {1u, 2u, 5u, 8u}) {
        const ModelParams p = make_params(n, 0.5, 1.0);
        std::vector<double> e(n, 0.0);
        for (int t = 1; t <= 3000; ++t) {
            const std::vector<double> before = e;
            const AdditionEvent ev = draw_addition(rng, p, t);
            const AvalancheReport r = add_and_stabilize_in_place(e, ev.site, ev.amount, t);
            if (!r.avalanche()) continue;
            const FMatrixCheck c = check_f_matrix(wave_f_coefficients(r), r, before, e);
            REQUIRE(c.max_weight_error <= 1e-12);
            REQUIRE(c.max_reconstruction_error <= 1e-12);
            REQUIRE(c.lower_bound_ok);
        }
    }
}

TEST_CASE("origin fractions decay away from the addition site") {
    {
        // Regular five-site configuration; the avalanche from site 3 runs in two waves.
        const std::vector<double> before = {0.6372, 0.7774, 0.7619, 0.7453, 0.7157};
        std::vector<double> e = before;
        const AvalancheReport r = add_and_stabilize_in_place(e, 3, 0.785771, 1);
        const FMatrix f = wave_f_coefficients(r);
        // Exact fractions of the addition, from rational arithmetic.
        CHECK(f(3, 0) == 0.125);
        CHECK(f(3, 2) == 0.125);
        CHECK(f(3, 3) == 0.1875);
        CHECK(f(3, 4) == 0.25);
        INFO("F(3,4) = ", f(3, 4), " exceeds F(3,3) = ", f(3, 3), " although site 4 ends nonempty");
        CHECK(check_f_matrix(f, r, before, e).monotone_ok);
    }

    Rng rng(8);
    std::size_t avalanches = 0, violations = 0;
    for (std::size_t n : {2u, 5u, 8u}) {
        const ModelParams p = make_params(n, 0.5, 1.0);
        std::vector<double> g(n, 0.0);
        for (int t = 1; t <= 3000; ++t) {
            const std::vector<double> prior = g;
            const AdditionEvent ev = draw_addition(rng, p, t);
            const AvalancheReport rep = add_and_stabilize_in_place(g, ev.site, ev.amount, t);
            if (!rep.avalanche() || t < static_cast<int>(n * (n - 1))) continue;
            ++avalanches;
            if (!check_f_matrix(wave_f_coefficients(rep), rep, prior, g).monotone_ok) ++violations;
        }
    }
    INFO(violations, " of ", avalanches, " avalanches violate the decay");
    CHECK(violations == 0);
}

TEST_CASE("column weights for general intervals") {
    Rng rng(9);
    const ModelParams grid[] = {{6, 0.0, 1.0}, {6, 0.0, 0.4}, {6, 0.3, 0.8}};
    for (const ModelParams& p : grid) {
        for (int chain = 0; chain < 10; ++chain) {
            std::vector<double> e = random_stable(rng, p.n_sites);
            for (int t = 1; t <= 500; ++t) {
                const std::vector<double> before = e;
                const AdditionEvent ev = draw_addition(rng, p, t);
                const AvalancheReport r = add_and_stabilize_in_place(e, ev.site, ev.amount, t);
                if (!r.avalanche()) continue;
                const FMatrixCheck c = check_f_matrix(wave_f_coefficients(r), r, before, e);
                REQUIRE(c.max_reconstruction_error <= 1e-12);
                REQUIRE(c.max_weight_error <= 1e-12);
            }
        }
    }
}

TEST_CASE("fresh addition at an empty site") {
    const Configuration c{0.7, 0.0, 0.6};
    CoefficientState s = start_tracking(c, 0);
    const auto step1 = add_and_stabilize(c, 1, 0.6, make_params(3, 0.5, 1.0), 1);
    s = update_fractions(s, step1.report, FMatrix{});
    REQUIRE(s.a_rows.size() == 1);
    CHECK(s.a_rows[0].fractions == std::vector<double>{0.0, 1.0, 0.0});
    const DecayReport d = decay_diagnostics(s);
    CHECK(d.rows.at(0).max_fraction == 1.0);
    for (std::size_t j = 0; j < 3; ++j) CHECK(s.site_total(j) == 1.0);
}

TEST_CASE("full tracking keeps totals, envelope and monotonicity") {
    Rng rng(12);
    for (std::size_t n : {3u, 6u, 8u}) {
        const ModelParams p = make_params(n, 0.5, 1.0);
        std::vector<double> e(n, 0.0);
        std::uint64_t t = 0;
        for (; t < n * (n - 1); ++t) {
            const AdditionEvent ev = draw_addition(rng, p, t + 1);
            add_and_stabilize_in_place(e, ev.site, ev.amount, t + 1);
        }
        TrackingOptions o;
        o.full_tracking = true;
        CoefficientState s = start_tracking(Configuration(e), t, o);
        DecayReport prev = decay_diagnostics(s);
        for (int k = 0; k < 800; ++k) {
            ++t;
            const AdditionEvent ev = draw_addition(rng, p, t);
            const AvalancheReport r = add_and_stabilize_in_place(e, ev.site, ev.amount, t);
            s = update_fractions(std::move(s), r, r.avalanche() ? wave_f_coefficients(r) : FMatrix{});
            const DecayReport d = decay_diagnostics(s, &prev);
            REQUIRE(d.envelope_violations == 0);
            REQUIRE(d.monotonicity_violations == 0);
            prev = d;
            for (std::size_t j = 0; j < n; ++j) {
                REQUIRE(std::abs(s.site_total(j) - (e[j] != 0.0 ? 1.0 : 0.0)) <= 1e-9);
                REQUIRE(std::abs(s.reconstruct(j) - e[j]) <= 1e-9);
            }
            for (const auto& row : s.a_rows) {
                double sum = 0.0;
                for (double v : row.fractions) {
                    REQUIRE(v >= 0.0);
                    sum += v;
                }
                REQUIRE(sum <= 1.0 + 1e-12);
            }
        }
    }
}

TEST_CASE("windowed tracking reconstructs a long run") {
    Rng rng(14);
    const std::size_t n = 10;
    const ModelParams p = make_params(n, 0.5, 1.0);
    std::vector<double> e(n, 0.0);
    CoefficientState s = start_tracking(Configuration(e), 0);
    double worst = 0.0;
    for (std::uint64_t t = 1; t <= 10000; ++t) {
        const AdditionEvent ev = draw_addition(rng, p, t);
        const AvalancheReport r = add_and_stabilize_in_place(e, ev.site, ev.amount, t);
        s = update_fractions(std::move(s), r, r.avalanche() ? wave_f_coefficients(r) : FMatrix{});
        for (std::size_t j = 0; j < n; ++j) worst = std::max(worst, std::abs(s.reconstruct(j) - e[j]));
    }
    CHECK(worst <= 1e-9);
    CHECK(s.a_rows.size() <= 10 * n * (n + 1));
}

TEST_CASE("variance decomposition from the empty start") {
    // For a >= 1/2 the fractions depend on the addition sites only, so
    // Var(energy_j) = Var(U) E[sum A^2] + (EU)^2 Var(sum A).
    Rng rng(21);
    const std::size_t n = 4;
    const ModelParams p = make_params(n, 0.5, 1.0);
    const int replicas = 20000;
    const std::uint64_t horizon = 60;
    const std::size_t j = 1;
    double s1 = 0.0, s2 = 0.0, a2 = 0.0, r1 = 0.0, r2 = 0.0;
    for (int rep = 0; rep < replicas; ++rep) {
        std::vector<double> e(n, 0.0);
        TrackingOptions o;
        o.full_tracking = true;
        CoefficientState s = start_tracking(Configuration(e), 0, o);
        for (std::uint64_t t = 1; t <= horizon; ++t) {
            const AdditionEvent ev = draw_addition(rng, p, t);
            const AvalancheReport r = add_and_stabilize_in_place(e, ev.site, ev.amount, t);
            s = update_fractions(std::move(s), r, r.avalanche() ? wave_f_coefficients(r) : FMatrix{});
        }
        double sq = 0.0, total = 0.0;
        for (const auto& row : s.a_rows) {
            sq += row.fractions[j] * row.fractions[j];
            total += row.fractions[j];
        }
        s1 += e[j];
        s2 += e[j] * e[j];
        a2 += sq;
        r1 += total;
        r2 += total * total;
    }
    const double m = replicas;
    const double var = s2 / m - (s1 / m) * (s1 / m);
    const double var_r = r2 / m - (r1 / m) * (r1 / m);
    const double predicted = p.addition_variance() * a2 / m + p.mean_addition() * p.mean_addition() * var_r;
    CHECK(var == doctest::Approx(predicted).epsilon(0.05));
}

TEST_CASE("fraction dump") {
    const Configuration c{0.7, 0.0};
    CoefficientState s = start_tracking(c, 0);
    const auto st = add_and_stabilize(c, 1, 0.6, make_params(2, 0.5, 1.0), 1);
    s = update_fractions(s, st.report, FMatrix{});
    std::ostringstream os;
    write_fractions_csv(os, s);
    CHECK(os.str() == "t,theta,j,A\n1,1,1,1\n");
}
