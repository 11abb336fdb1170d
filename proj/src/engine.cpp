#include "zhang/engine.hpp"

#include <algorithm>
#include <memory>
#include <stdexcept>

namespace zhang {

namespace {

// Topple one site of `e` in place and return the energy lost through the boundary.
double topple_site(std::vector<double>& e, std::size_t site) {
    const double half = 0.5 * e[site];
    e[site] = 0.0;
    double lost = 0.0;
    if (site > 0) {
        e[site - 1] += half;
    } else {
        lost += half;
    }
    if (site + 1 < e.size()) {
        e[site + 1] += half;
    } else {
        lost += half;
    }
    return lost;
}

void fill_sets(AvalancheReport& report, std::span<const double> before) {
    const std::size_t n = report.topple_counts.size();
    std::vector<char> in_range(n, 0);
    for (std::size_t s = 0; s < n; ++s) {
        if (report.topple_counts[s] == 0) continue;
        report.toppled_set.push_back(s);
        in_range[s] = 1;
        if (s > 0) in_range[s - 1] = 1;
        if (s + 1 < n) in_range[s + 1] = 1;
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (!in_range[s]) continue;
        report.range.push_back(s);
        if (report.topple_counts[s] == 0 && classify(before[s]) == SiteLabel::Anomalous) {
            report.anomalous_changed.push_back(s);
        }
    }
}

}  // namespace

Configuration topple(const Configuration& c, std::size_t site) {
    if (site >= c.size()) throw std::out_of_range("toppling site outside the lattice");
    if (c[site] < critical_energy) throw std::domain_error("cannot topple a stable site");
    Configuration out = c;
    topple_site(out.raw(), site);
    return out;
}

AvalancheReport add_and_stabilize_in_place(std::vector<double>& e, std::size_t x, double amount,
                                           std::uint64_t time) {
    const std::size_t n = e.size();
    AvalancheReport report;
    report.event = AdditionEvent{time, x, amount};
    report.topple_counts.assign(n, 0);

    if (e[x] + amount < critical_energy) {
        e[x] += amount;
        return report;
    }

    const std::vector<double> before = e;
    e[x] += amount;

    while (e[x] >= critical_energy) {
        Wave wave;
        wave.index = report.waves.size() + 1;
        report.dissipated += topple_site(e, x);
        wave.toppled.push_back(x);
        ++report.topple_counts[x];
        bool left = x > 0;
        bool right = x + 1 < n;
        for (std::size_t d = 1; left || right; ++d) {
            if (left) {
                if (d <= x && e[x - d] >= critical_energy) {
                    report.dissipated += topple_site(e, x - d);
                    wave.toppled.push_back(x - d);
                    ++report.topple_counts[x - d];
                } else {
                    left = false;
                }
            }
            if (right) {
                if (x + d < n && e[x + d] >= critical_energy) {
                    report.dissipated += topple_site(e, x + d);
                    wave.toppled.push_back(x + d);
                    ++report.topple_counts[x + d];
                } else {
                    right = false;
                }
            }
        }
        const auto [lo, hi] = std::minmax_element(wave.toppled.begin(), wave.toppled.end());
        wave.left_end = *lo;
        wave.right_end = *hi;
        report.waves.push_back(std::move(wave));
    }

    for (std::size_t s = 0; s < n; ++s) {
        if (e[s] >= critical_energy) {
            throw std::logic_error("wave stabilization left an unstable site away from the origin");
        }
    }
    fill_sets(report, before);
    return report;
}

Stabilized add_and_stabilize(const Configuration& c, std::size_t site, double amount,
                             const ModelParams& params, std::uint64_t time) {
    if (c.size() != params.n_sites) throw std::invalid_argument("configuration size mismatch");
    if (!c.is_stable()) throw std::domain_error("addition requires a stable configuration");
    if (site >= c.size()) throw std::out_of_range("addition site outside the lattice");
    if (!(amount >= params.a && amount <= params.b)) {
        throw std::domain_error("addition amount outside [a, b]");
    }
    Stabilized out{c, {}};
    out.report = add_and_stabilize_in_place(out.config.raw(), site, amount, time);
    return out;
}

TopplingPolicy leftmost_policy() {
    return [](std::span<const std::size_t> unstable) { return unstable.front(); };
}

TopplingPolicy rightmost_policy() {
    return [](std::span<const std::size_t> unstable) { return unstable.back(); };
}

TopplingPolicy random_policy(std::uint64_t seed) {
    auto rng = std::make_shared<Rng>(seed);
    return [rng](std::span<const std::size_t> unstable) {
        return unstable[rng->index(unstable.size())];
    };
}

AnyOrderResult stabilize_any_order(const Configuration& c, const TopplingPolicy& policy) {
    if (!in_toppling_domain(c)) {
        throw std::domain_error("configuration is not reachable by one addition to a stable configuration");
    }
    AnyOrderResult out{c, std::vector<std::uint32_t>(c.size(), 0), 0.0};
    std::vector<double>& e = out.config.raw();
    std::vector<std::size_t> unstable;
    for (;;) {
        unstable.clear();
        for (std::size_t s = 0; s < e.size(); ++s) {
            if (e[s] >= critical_energy) unstable.push_back(s);
        }
        if (unstable.empty()) break;
        const std::size_t s = policy(unstable);
        if (s >= e.size() || e[s] < critical_energy) {
            throw std::logic_error("toppling policy chose a stable site");
        }
        out.dissipated += topple_site(e, s);
        ++out.topple_counts[s];
        if (!in_toppling_domain(out.config)) {
            throw std::logic_error("toppling left the reachable domain");
        }
    }
    return out;
}

AdditionEvent draw_addition(Rng& rng, const ModelParams& params, std::uint64_t time) {
    AdditionEvent ev;
    ev.time = time;
    ev.site = static_cast<std::size_t>(rng.index(params.n_sites));
    ev.amount = rng.uniform(params.a, params.b);
    return ev;
}

StepResult step(const Configuration& c, Rng& rng, const ModelParams& params, std::uint64_t time) {
    const AdditionEvent ev = draw_addition(rng, params, time);
    auto [config, report] = add_and_stabilize(c, ev.site, ev.amount, params, time);
    return {std::move(config), std::move(report)};
}

}  // namespace zhang
