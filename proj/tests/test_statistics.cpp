#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "zhang/rng.hpp"
#include "zhang/statistics.hpp"

using namespace zhang;
using namespace zhang::stats;

TEST_CASE("batch means") {
    const double v[] = {1.0, 2.0, 3.0, 4.0};
    const Estimate e = batch_means(v);
    CHECK(e.mean == 2.5);
    CHECK(e.std_error == doctest::Approx(std::sqrt((1.25 * 4.0 / 3.0) / 4.0)));
    const double one[] = {7.0};
    CHECK(batch_means(one).std_error == 0.0);
}

TEST_CASE("chi-square tail") {
    // Known quantiles: P(chi2_1 > 3.841459) = 0.05, P(chi2_10 > 23.209251) = 0.01.
    CHECK(chi_square_sf(3.841459, 1) == doctest::Approx(0.05).epsilon(1e-5));
    CHECK(chi_square_sf(23.209251, 10) == doctest::Approx(0.01).epsilon(1e-5));
    CHECK(chi_square_sf(0.0, 3) == 1.0);
    CHECK_THROWS_AS(chi_square_sf(1.0, 0), std::invalid_argument);
}

TEST_CASE("uniform counts") {
    const std::uint64_t flat[] = {100, 100, 100, 100};
    CHECK(chi_square_uniform(flat).p_value == doctest::Approx(1.0));
    const std::uint64_t skew[] = {400, 0, 0, 0};
    CHECK(chi_square_uniform(skew).p_value < 1e-10);
}

TEST_CASE("geometric goodness of fit") {
    Rng rng(1);
    const double p = 0.16;
    std::vector<std::uint64_t> samples;
    for (int i = 0; i < 20000; ++i) {
        std::uint64_t k = 1;
        while (rng.uniform01() >= p) ++k;
        samples.push_back(k);
    }
    CHECK(geometric_gof(samples, p).p_value > 0.001);
    CHECK(geometric_gof(samples, 0.2).p_value < 1e-6);
    const std::uint64_t zero[] = {0, 1};
    CHECK_THROWS_AS(geometric_gof(zero, p), std::invalid_argument);
}

TEST_CASE("Kolmogorov distribution") {
    // Q(1.3581) = 0.05, Q(1.6276) = 0.01.
    CHECK(kolmogorov_sf(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
    CHECK(kolmogorov_sf(1.6276) == doctest::Approx(0.01).epsilon(1e-3));
    Rng rng(2);
    std::vector<double> u(5000);
    for (double& v : u) v = rng.uniform01();
    CHECK(ks_uniform(u).p_value > 0.001);
    for (double& v : u) v = v * v;
    CHECK(ks_uniform(u).p_value < 1e-10);
}
