#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "zhang/onesite.hpp"

using namespace zhang;

namespace {

// Direct long double evaluation, adequate while e^{1/b} stays moderate.
long double series(long double s) {
    const long m = static_cast<long>(std::ceil(s)) - 1;
    long double sum = 0.0L;
    long double fact = 1.0L;
    for (long k = 0; k <= std::max(m, 0L); ++k) {
        if (k > 0) fact *= k;
        const long double term = std::pow(s - k, static_cast<long double>(k)) * std::exp(s - k) / fact;
        sum += (k % 2 == 0) ? term : -term;
    }
    return sum;
}

double reference_cdf(double b, double h) {
    if (h == 0.0) return static_cast<double>(1.0L / series(1.0L / b));
    return static_cast<double>(series(h / static_cast<long double>(b)) / series(1.0L / b));
}

}  // namespace

TEST_CASE("atom at zero for b = 1") {
    const OneSiteDistribution d(1.0);
    CHECK(d.f0() == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
    for (double h : {0.1, 0.5, 0.9}) CHECK(onesite_cdf(d, h) == doctest::Approx(std::exp(h - 1.0)).epsilon(1e-14));
}

TEST_CASE("closed form against an independent evaluation") {
    for (double b : {1.0, 0.5, 0.3, 0.1}) {
        const OneSiteDistribution d(b);
        for (int k = 0; k <= 50; ++k) {
            const double h = k / 50.0;
            CHECK(onesite_cdf(d, h) == doctest::Approx(reference_cdf(b, h)).epsilon(1e-10));
        }
    }
}

TEST_CASE("distribution function shape") {
    const OneSiteDistribution d(0.5);
    CHECK(onesite_cdf(d, -0.1) == 0.0);
    CHECK(onesite_cdf(d, 0.0) == d.f0());
    CHECK(onesite_cdf(d, 1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(onesite_cdf(d, 1.5) == 1.0);
    double last = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double F = onesite_cdf(d, k / 1000.0);
        REQUIRE(F >= last - 1e-15);
        last = F;
    }
}

TEST_CASE("density jumps at h = b") {
    for (double b : {0.5, 0.25, 0.1}) {
        const OneSiteDistribution d(b);
        const OneSidedDensity f = onesite_pdf(d, b);
        CHECK(f.discontinuous());
        CHECK(f.right - f.left == doctest::Approx(-d.f0() / b).epsilon(1e-9));
        CHECK_FALSE(onesite_pdf(d, 0.5 * b).discontinuous());
    }
    CHECK_FALSE(onesite_pdf(OneSiteDistribution(1.0), 0.5).discontinuous());
    CHECK_THROWS_AS(onesite_pdf(OneSiteDistribution(0.5), 1.2), std::domain_error);
}

TEST_CASE("density is the derivative of the distribution function") {
    const OneSiteDistribution d(0.3);
    for (double h : {0.1, 0.45, 0.7, 0.95}) {
        const double step = 1e-6;
        const double numeric = (onesite_cdf(d, h + step) - onesite_cdf(d, h - step)) / (2 * step);
        CHECK(onesite_pdf(d, h).left == doctest::Approx(numeric).epsilon(1e-6));
    }
}

TEST_CASE("delay equation residuals") {
    for (double b : {1.0, 0.5, 0.1}) {
        const OneSiteDistribution d(b);
        for (int k = 0; k <= 100; ++k) {
            const DelayResidual r = onesite_delay_residual(d, k / 100.0);
            REQUIRE(std::abs(r.integral_form) <= 1e-6);
            if (r.differential_form) REQUIRE(std::abs(*r.differential_form) <= 1e-6);
        }
    }
}

TEST_CASE("small b approaches the uniform law") {
    const OneSiteDistribution d(0.01);
    double sup = 0.0;
    for (int k = 0; k <= 100; ++k) sup = std::max(sup, std::abs(onesite_cdf(d, k / 100.0) - k / 100.0));
    CHECK(sup <= 0.02);
}

TEST_CASE("parameter range") {
    CHECK_THROWS_AS(OneSiteDistribution(0.001), std::invalid_argument);
    CHECK_THROWS_AS(OneSiteDistribution(1.5), std::invalid_argument);
    CHECK_NOTHROW(OneSiteDistribution(OneSiteDistribution::min_b));
}

TEST_CASE("renewal oracle matches the closed form") {
    const double b = 0.2;
    const OneSiteDistribution d(b);
    const double grid[] = {0.0, 0.1, 0.3, 0.55, 0.8, 1.0};
    const auto est = renewal_oracle(b, grid, 200000, Rng(5));
    for (const RenewalEstimate& e : est) {
        if (e.h == 1.0) {
            CHECK(e.estimate == 1.0);
            continue;
        }
        CHECK(std::abs(e.estimate - onesite_cdf(d, e.h)) <= 4.0 * e.std_error + 1e-12);
    }
    CHECK_THROWS_AS(renewal_oracle(b, 1.2, 10, Rng(1)), std::domain_error);
}
