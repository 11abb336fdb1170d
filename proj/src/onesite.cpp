#include "zhang/onesite.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>

namespace zhang {

namespace {

using Wide50 = boost::multiprecision::cpp_bin_float_50;
using Wide100 = boost::multiprecision::cpp_bin_float_100;

// sum_{k=0}^{m} (-1)^k (s - k)^k e^{s - k} / k!, and its s-derivative when `derivative` is set.
template <class Real>
Real alternating_sum(const Real& s, long m, bool derivative) {
    using std::exp;
    using std::pow;
    const Real e_inv = exp(Real(-1));
    Real exp_term = exp(s);
    Real factorial = 1;
    Real sum = 0;
    for (long k = 0; k <= m; ++k) {
        if (k > 0) {
            factorial *= k;
            exp_term *= e_inv;
        }
        const Real base = s - k;
        Real inner = pow(base, k);
        if (derivative && k > 0) inner += k * pow(base, k - 1);
        const Real term = inner * exp_term / factorial;
        if (k % 2 == 0) {
            sum += term;
        } else {
            sum -= term;
        }
    }
    return sum;
}

// Terms peak near e^s while the sum stays of order s, so the working precision grows with s.
double alternating_sum(double h, double b, long m, bool derivative) {
    const double s_approx = h / b;
    if (s_approx <= 12.0) {
        return static_cast<double>(
            alternating_sum<long double>(static_cast<long double>(h) / static_cast<long double>(b), m, derivative));
    }
    if (s_approx <= 60.0) return static_cast<double>(alternating_sum(Wide50(h) / Wide50(b), m, derivative));
    return static_cast<double>(alternating_sum(Wide100(h) / Wide100(b), m, derivative));
}

// ceil(h/b) - 1, computed exactly for representable h and b.
long upper_index(double h, double b) { return static_cast<long>(ceil(Wide100(h) / Wide100(b))) - 1; }

long lower_index(double h, double b) { return static_cast<long>(floor(Wide100(h) / Wide100(b))); }

}  // namespace

OneSiteDistribution::OneSiteDistribution(double b) : b_(b), f0_(0.0) {
    if (!(b >= min_b && b <= 1.0)) {
        throw std::invalid_argument("closed form requires min_b <= b <= 1");
    }
    f0_ = 1.0 / alternating_sum(1.0, b, upper_index(1.0, b), false);
}

double onesite_cdf(const OneSiteDistribution& d, double h) {
    if (h < 0.0) return 0.0;
    if (h == 0.0) return d.f0();
    if (h > 1.0) return 1.0;
    return d.f0() * alternating_sum(h, d.b(), upper_index(h, d.b()), false);
}

OneSidedDensity onesite_pdf(const OneSiteDistribution& d, double h) {
    if (!(h >= 0.0 && h <= 1.0)) throw std::domain_error("density is evaluated on [0, 1]");
    const double prefactor = d.f0() / d.b();
    // Away from integer h/b both limits use the same terms.
    const long m_left = h == 0.0 ? 0 : upper_index(h, d.b());
    const long m_right = h == 1.0 ? m_left : lower_index(h, d.b());
    OneSidedDensity out;
    out.left = prefactor * alternating_sum(h, d.b(), m_left, true);
    out.right = m_right == m_left ? out.left : prefactor * alternating_sum(h, d.b(), m_right, true);
    return out;
}

DelayResidual onesite_delay_residual(const OneSiteDistribution& d, double h) {
    if (!(h >= 0.0 && h <= 1.0)) throw std::domain_error("delay residual is evaluated on [0, 1]");
    using boost::math::quadrature::gauss_kronrod;
    const double b = d.b();
    const double upper = std::min(h, b);
    const auto integrand = [&](double u) { return onesite_cdf(d, h - u) / b; };

    // The integrand has a kink where h - u = b.
    double integral = 0.0;
    const double kink = h - b;
    if (kink > 0.0 && kink < upper) {
        integral = gauss_kronrod<double, 15>::integrate(integrand, 0.0, kink, 15, 1e-12) +
                   gauss_kronrod<double, 15>::integrate(integrand, kink, upper, 15, 1e-12);
    } else if (upper > 0.0) {
        integral = gauss_kronrod<double, 15>::integrate(integrand, 0.0, upper, 15, 1e-12);
    }

    DelayResidual out;
    out.integral_form = onesite_cdf(d, h) - (integral + d.f0());
    // Below b the density is F(h)/b; from b on it is (F(h) - F(h - b))/b. At h = b = 1 only the left side exists.
    const OneSidedDensity f = onesite_pdf(d, h);
    if (h < b || (h == b && b == 1.0)) {
        out.differential_form = (h < b ? f.right : f.left) - onesite_cdf(d, h) / b;
    } else {
        const double density = h == b ? f.right : f.left;
        out.differential_form = density - (onesite_cdf(d, h) - onesite_cdf(d, h - b)) / b;
    }
    return out;
}

std::vector<RenewalEstimate> renewal_oracle(double b, std::span<const double> h_grid, std::size_t samples,
                                            Rng rng) {
    if (samples < 1) throw std::invalid_argument("renewal oracle needs at least one sample");
    if (!(b > 0.0 && b <= 1.0)) throw std::invalid_argument("renewal oracle needs 0 < b <= 1");
    const std::size_t g = h_grid.size();
    for (double h : h_grid) {
        if (!(h >= 0.0 && h <= 1.0)) throw std::domain_error("renewal oracle grid must lie in [0, 1]");
    }

    std::vector<std::size_t> order(g);
    for (std::size_t i = 0; i < g; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) { return h_grid[l] < h_grid[r]; });
    std::vector<double> thresholds(g);
    for (std::size_t k = 0; k < g; ++k) thresholds[k] = h_grid[order[k]] / b;
    const double horizon = 1.0 / b;

    // bucket[k]: partial sums in (thresholds[k-1], thresholds[k]]; bucket[g]: the rest up to 1/b.
    std::vector<std::uint64_t> bucket(g + 1);
    std::vector<double> sum_x(g, 0.0), sum_xx(g, 0.0), sum_xy(g, 0.0);
    double sum_y = 0.0;
    double sum_yy = 0.0;

    for (std::size_t n = 0; n < samples; ++n) {
        std::fill(bucket.begin(), bucket.end(), 0);
        std::uint64_t total = 0;
        double partial = 0.0;
        for (;;) {
            partial += rng.uniform01();
            if (partial > horizon) break;
            const auto it = std::lower_bound(thresholds.begin(), thresholds.end(), partial);
            ++bucket[static_cast<std::size_t>(it - thresholds.begin())];
            ++total;
        }
        const double y = 1.0 + static_cast<double>(total);
        double count = 0.0;
        for (std::size_t k = 0; k < g; ++k) {
            count += static_cast<double>(bucket[k]);
            const double x = 1.0 + count;
            sum_x[k] += x;
            sum_xx[k] += x * x;
            sum_xy[k] += x * y;
        }
        sum_y += y;
        sum_yy += y * y;
    }

    const double ns = static_cast<double>(samples);
    const double mean_y = sum_y / ns;
    const double var_y = std::max(0.0, sum_yy / ns - mean_y * mean_y);
    std::vector<RenewalEstimate> out(g);
    for (std::size_t k = 0; k < g; ++k) {
        const double mean_x = sum_x[k] / ns;
        const double var_x = std::max(0.0, sum_xx[k] / ns - mean_x * mean_x);
        const double cov = sum_xy[k] / ns - mean_x * mean_y;
        const double ratio = mean_x / mean_y;
        const double var_ratio = (var_x - 2.0 * ratio * cov + ratio * ratio * var_y) / (mean_y * mean_y * ns);
        RenewalEstimate& r = out[order[k]];
        r.h = h_grid[order[k]];
        r.estimate = ratio;
        r.std_error = std::sqrt(std::max(0.0, var_ratio));
    }
    return out;
}

RenewalEstimate renewal_oracle(double b, double h, std::size_t samples, Rng rng) {
    const double grid[] = {h};
    return renewal_oracle(b, grid, samples, std::move(rng)).front();
}

}  // namespace zhang
