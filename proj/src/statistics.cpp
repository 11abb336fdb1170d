#include "zhang/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/special_functions/gamma.hpp>

namespace zhang::stats {

Estimate batch_means(std::span<const double> values) {
    Estimate e;
    if (values.empty()) return e;
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) sum += v;
    e.mean = sum / n;
    if (values.size() < 2) return e;
    double ss = 0.0;
    for (double v : values) ss += (v - e.mean) * (v - e.mean);
    e.std_error = std::sqrt(ss / (n - 1.0) / n);
    return e;
}

double chi_square_sf(double statistic, double dof) {
    if (dof <= 0.0) throw std::invalid_argument("chi-square needs positive degrees of freedom");
    if (statistic <= 0.0) return 1.0;
    return boost::math::gamma_q(0.5 * dof, 0.5 * statistic);
}

ChiSquareResult chi_square_test(std::span<const double> observed, std::span<const double> expected) {
    if (observed.size() != expected.size() || observed.size() < 2) {
        throw std::invalid_argument("chi-square test needs matching category lists of length >= 2");
    }
    ChiSquareResult r;
    for (std::size_t i = 0; i < observed.size(); ++i) {
        if (expected[i] <= 0.0) throw std::invalid_argument("expected counts must be positive");
        const double d = observed[i] - expected[i];
        r.statistic += d * d / expected[i];
    }
    r.dof = static_cast<double>(observed.size() - 1);
    r.p_value = chi_square_sf(r.statistic, r.dof);
    return r;
}

ChiSquareResult chi_square_uniform(std::span<const std::uint64_t> counts) {
    double total = 0.0;
    for (auto c : counts) total += static_cast<double>(c);
    std::vector<double> obs(counts.begin(), counts.end());
    std::vector<double> exp(counts.size(), total / static_cast<double>(counts.size()));
    return chi_square_test(obs, exp);
}

ChiSquareResult geometric_gof(std::span<const std::uint64_t> samples, double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("geometric parameter must lie in (0, 1)");
    const double n = static_cast<double>(samples.size());
    std::vector<double> expected;
    double tail = 1.0;  // P(T >= k)
    for (std::size_t k = 1;; ++k) {
        const double pk = tail * p;
        if (n * pk < 5.0 || n * (tail - pk) < 5.0) break;
        expected.push_back(n * pk);
        tail -= pk;
    }
    expected.push_back(n * tail);
    std::vector<double> observed(expected.size(), 0.0);
    for (std::uint64_t t : samples) {
        if (t == 0) throw std::invalid_argument("geometric samples start at 1");
        const std::size_t idx = std::min<std::size_t>(static_cast<std::size_t>(t - 1), observed.size() - 1);
        observed[idx] += 1.0;
    }
    return chi_square_test(observed, expected);
}

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-16) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_uniform(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("KS test needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double x = std::clamp(samples[i], 0.0, 1.0);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - x, x - static_cast<double>(i) / n});
    }
    KsResult r;
    r.statistic = d;
    const double root = std::sqrt(n);
    r.p_value = kolmogorov_sf((root + 0.12 + 0.11 / root) * d);
    return r;
}

}  // namespace zhang::stats
