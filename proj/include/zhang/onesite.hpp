#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "zhang/rng.hpp"

namespace zhang {

/**
 * @brief Stationary law of the single-site chain with additions uniform on [0, b].
 *
 * With s = h / b and m = ceil(s) - 1 the distribution function on (0, 1] is
 *
 *     F(h) = F(0) * sum_{k=0}^{m} (-1)^k (s - k)^k e^{s - k} / k!
 *
 * and F(0) is fixed by F(1) = 1. The alternating terms grow like e^{1/b}, so
 * the sum is evaluated in 100-digit binary floating point; b must be at least
 * min_b.
 */
class OneSiteDistribution {
public:
    static constexpr double min_b = 0.005;

    explicit OneSiteDistribution(double b);

    double b() const { return b_; }
    /// Atom at zero, F(0).
    double f0() const { return f0_; }

private:
    double b_;
    double f0_;
};

/// Distribution function: 0 below 0, F(0) at 0, closed form on (0, 1], 1 above 1.
double onesite_cdf(const OneSiteDistribution& d, double h);

/// Density of the continuous part. left == right except at h = b, where the density jumps.
struct OneSidedDensity {
    double left = 0.0;
    double right = 0.0;
    bool discontinuous() const { return left != right; }
};

/// Density on [0, 1]; at the endpoints only the interior one-sided limit is meaningful.
OneSidedDensity onesite_pdf(const OneSiteDistribution& d, double h);

struct DelayResidual {
    /// F(h) - (integral_0^{min(h,b)} F(h - u)/b du + F(0)), by adaptive quadrature.
    double integral_form = 0.0;
    /// f(h) - F(h)/b below b and f(h) - (F(h) - F(h - b))/b from b on, using the right density at h = b < 1.
    std::optional<double> differential_form;
};

DelayResidual onesite_delay_residual(const OneSiteDistribution& d, double h);

struct RenewalEstimate {
    double h = 0.0;
    double estimate = 0.0;
    double std_error = 0.0;
};

/**
 * @brief Monte Carlo estimate of (E N(h/b) + 1) / (E N(1/b) + 1), where N is
 *        the counting process of partial sums of uniform [0, 1] increments.
 *
 * All grid points share the same sample paths; standard errors follow from the
 * delta method for a ratio of means.
 */
std::vector<RenewalEstimate> renewal_oracle(double b, std::span<const double> h_grid, std::size_t samples, Rng rng);

RenewalEstimate renewal_oracle(double b, double h, std::size_t samples, Rng rng);

}  // namespace zhang
