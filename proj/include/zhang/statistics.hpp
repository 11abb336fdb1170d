#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace zhang::stats {

struct Estimate {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Mean and standard error from equally weighted batch means.
Estimate batch_means(std::span<const double> batch_values);

/// Upper tail probability of the chi-square distribution.
double chi_square_sf(double statistic, double dof);

struct ChiSquareResult {
    double statistic = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
};

/// Goodness of fit of observed counts against expected counts (same total assumed).
ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected);

/// Uniformity of counts across categories.
ChiSquareResult chi_square_uniform(std::span<const std::uint64_t> counts);

/**
 * @brief Goodness of fit of positive integer samples to the geometric law
 *        P(T = k) = p (1 - p)^{k-1}, k >= 1.
 *
 * Categories 1, 2, ... are used while the expected count stays at least 5;
 * the remaining tail is pooled.
 */
ChiSquareResult geometric_gof(std::span<const std::uint64_t> samples, double p);

/// Asymptotic Kolmogorov tail probability Q(lambda) = 2 sum (-1)^{k-1} e^{-2 k^2 lambda^2}.
double kolmogorov_sf(double lambda);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test against the uniform law on [0, 1).
KsResult ks_uniform(std::vector<double> samples);

}  // namespace zhang::stats
