#include "zhang/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

#include "zhang/engine.hpp"
#include "zhang/rng.hpp"

namespace zhang {

PeriodicityInfo periodicity_info(double a, double b) {
    if (!(a >= 0.0 && a < b && b <= 1.0)) throw std::invalid_argument("need 0 <= a < b <= 1");
    PeriodicityInfo info;
    if (a == 0.0) {
        // Every n > 1/b qualifies; consecutive members make the gcd 1.
        info.unbounded = true;
        const auto first = static_cast<std::uint64_t>(std::floor(1.0 / b)) + 1;
        info.n_set = {first, first + 1};
        info.gcd = 1;
        return info;
    }
    const auto limit = static_cast<std::uint64_t>(std::ceil(1.0 / a)) + 1;
    for (std::uint64_t n = 1; n <= limit; ++n) {
        const double nd = static_cast<double>(n);
        if ((nd - 1.0) * a < 1.0 && nd * b > 1.0) info.n_set.push_back(n);
    }
    info.gcd = 0;
    for (auto n : info.n_set) info.gcd = std::gcd(info.gcd, n);
    info.periodic = info.gcd > 1;
    return info;
}

std::string to_string(CouplingMode mode) {
    switch (mode) {
        case CouplingMode::Shift: return "shift";
        case CouplingMode::Exact: return "exact";
        case CouplingMode::ReductionMatch: return "reduction-match";
        case CouplingMode::Equalize: return "equalize";
    }
    return "unknown";
}

CouplingResult couple_one_site(double a, double b, std::uint64_t seed, std::uint64_t max_steps,
                               const OneSiteCouplingOptions& options) {
    const PeriodicityInfo info = periodicity_info(a, b);
    for (double s : {options.start1, options.start2}) {
        if (!(s >= 0.0 && s < 1.0)) throw std::invalid_argument("start energies must lie in [0, 1)");
    }
    if (options.mode != CouplingMode::Shift && options.mode != CouplingMode::Exact) {
        throw std::invalid_argument("one-site coupling runs in shift or exact mode");
    }
    CouplingResult r;
    r.mode = options.mode == CouplingMode::Exact && (!info.periodic || options.force_exact) ? CouplingMode::Exact
                                                                                            : CouplingMode::Shift;
    Rng rng1(seed);
    Rng rng2(mix_seed(seed, 1));
    double e1 = options.start1;
    double e2 = options.start2;
    const auto advance = [a, b](double& e, Rng& rng) {
        e += rng.uniform(a, b);
        if (e >= critical_energy) e = 0.0;
    };
    for (std::uint64_t t = 1; t <= max_steps; ++t) {
        advance(e1, rng1);
        advance(e2, rng2);
        r.steps = t;
        if (e1 == 0.0 && !r.t1) r.t1 = t;
        if (e2 == 0.0 && !r.t2) r.t2 = t;
        if (r.mode == CouplingMode::Shift && r.t1 && r.t2) {
            r.met = true;
            r.meeting_time = std::max(*r.t1, *r.t2);
            return r;
        }
        if (r.mode == CouplingMode::Exact && e1 == 0.0 && e2 == 0.0) {
            r.met = true;
            r.meeting_time = t;
            return r;
        }
    }
    return r;
}

namespace {

std::vector<double> start_energies(const std::optional<Configuration>& start, std::size_t n) {
    if (!start) return std::vector<double>(n, 0.0);
    if (start->size() != n) throw std::invalid_argument("start configuration has wrong size");
    if (!start->is_stable()) throw std::invalid_argument("start configuration must be stable");
    return {start->energies().begin(), start->energies().end()};
}

double max_difference(const std::vector<double>& x, const std::vector<double>& y) {
    double d = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) d = std::max(d, std::abs(x[j] - y[j]));
    return d;
}

bool regular(const std::vector<double>& e) {
    std::size_t empties = 0;
    for (double v : e) {
        if (v == 0.0) {
            ++empties;
        } else if (v < 0.5) {
            return false;
        }
    }
    return empties <= 1;
}

bool same_reduction(const std::vector<double>& x, const std::vector<double>& y) {
    for (std::size_t j = 0; j < x.size(); ++j) {
        if (classify(x[j]) != classify(y[j])) return false;
    }
    return true;
}

}  // namespace

CouplingResult couple_reduction_match(const ModelParams& params, std::uint64_t seed, std::uint64_t max_steps,
                                      const ChainPairOptions& options) {
    params.validate();
    if (params.a < 0.5) throw std::invalid_argument("reduction matching requires a >= 1/2");
    const std::size_t n = params.n_sites;
    std::vector<double> e1 = start_energies(options.start1, n);
    std::vector<double> e2 = start_energies(options.start2, n);
    Rng rng1(seed);
    Rng rng2(options.seed2 ? *options.seed2 : mix_seed(seed, 1));

    CouplingResult r;
    r.mode = CouplingMode::ReductionMatch;
    std::uint64_t t = 0;
    for (;;) {
        if (!r.first_regular_time && regular(e1) && regular(e2)) r.first_regular_time = t;
        if (r.first_regular_time && same_reduction(e1, e2)) break;
        if (t == max_steps) {
            r.steps = t;
            return r;
        }
        ++t;
        const AdditionEvent ev1 = draw_addition(rng1, params, t);
        const AdditionEvent ev2 = draw_addition(rng2, params, t);
        add_and_stabilize_in_place(e1, ev1.site, ev1.amount, t);
        add_and_stabilize_in_place(e2, ev2.site, ev2.amount, t);
    }
    r.met = true;
    r.meeting_time = t;

    double d = max_difference(e1, e2);
    r.decay_trace.push_back(d);
    for (std::uint64_t k = 0; k < options.max_trace_steps && d >= options.trace_until; ++k) {
        ++t;
        const AdditionEvent ev = draw_addition(rng1, params, t);
        add_and_stabilize_in_place(e1, ev.site, ev.amount, t);
        add_and_stabilize_in_place(e2, ev.site, ev.amount, t);
        if (!same_reduction(e1, e2)) throw std::logic_error("reductions separated under shared additions");
        d = max_difference(e1, e2);
        r.decay_trace.push_back(d);
    }
    r.steps = t;
    return r;
}

double equalization_margin(std::size_t n_sites) { return std::ldexp(1.0, -static_cast<int>(n_sites) - 1); }

bool equalization_trigger(const std::vector<double>& c1, const std::vector<double>& c2) {
    const std::size_t n = c1.size();
    if (n < 2 || c2.size() != n) return false;
    if (c1[0] != 0.0 || c2[0] != 0.0) return false;
    const double cap = n > 2 ? 1.0 - equalization_margin(n) : critical_energy;
    for (std::size_t j = 1; j < n; ++j) {
        for (double v : {c1[j], c2[j]}) {
            if (!(v >= 0.5 && v < cap)) return false;
        }
    }
    return true;
}

CouplingResult couple_equalize_zero_one(const ModelParams& params, std::uint64_t seed, std::uint64_t max_attempts,
                                        const ChainPairOptions& options, std::uint64_t max_steps) {
    params.validate();
    if (params.a != 0.0 || params.b != 1.0) throw std::invalid_argument("equalization coupling requires [a,b] = [0,1]");
    const std::size_t n = params.n_sites;
    if (n < 2) throw std::invalid_argument("equalization coupling needs at least two sites");
    std::vector<double> e1 = start_energies(options.start1, n);
    std::vector<double> e2 = start_energies(options.start2, n);
    Rng rng1(seed);
    Rng rng2(options.seed2 ? *options.seed2 : mix_seed(seed, 1));

    CouplingResult r;
    r.mode = CouplingMode::Equalize;
    std::uint64_t t = 0;
    while (t < max_steps) {
        if (equalization_trigger(e1, e2)) {
            if (r.attempts.size() == max_attempts) break;
            AttemptRecord rec;
            rec.attempt = r.attempts.size() + 1;
            rec.start_time = t;
            rec.max_difference.push_back(max_difference(e1, e2));
            for (std::size_t k = 1; k < n; ++k) {
                ++t;
                const AdditionEvent ev = draw_addition(rng1, params, t);
                double u2 = ev.amount + (e1[ev.site] - e2[ev.site]);
                if (u2 < 0.0) u2 += 1.0;
                if (u2 >= 1.0) u2 -= 1.0;
                r.coupled_amounts.push_back(u2);
                add_and_stabilize_in_place(e1, ev.site, ev.amount, t);
                add_and_stabilize_in_place(e2, ev.site, u2, t);
                rec.max_difference.push_back(max_difference(e1, e2));
            }
            rec.success = rec.max_difference.back() <= equalization_tolerance;
            r.attempts.push_back(std::move(rec));
            if (r.attempts.back().success) {
                e2 = e1;
                r.met = true;
                r.meeting_time = t;
                r.steps = t;
                return r;
            }
            continue;
        }
        ++t;
        const AdditionEvent ev1 = draw_addition(rng1, params, t);
        const AdditionEvent ev2 = draw_addition(rng2, params, t);
        add_and_stabilize_in_place(e1, ev1.site, ev1.amount, t);
        add_and_stabilize_in_place(e2, ev2.site, ev2.amount, t);
    }
    r.steps = t;
    return r;
}

void write_coupling_csv(std::ostream& os, const CouplingResult& r) {
    os.precision(17);
    os << "attempt,kind,index,value\n";
    os << "0,mode,0," << to_string(r.mode) << '\n';
    os << "0,met,0," << (r.met ? 1 : 0) << '\n';
    if (r.meeting_time) os << "0,meeting_time,0," << *r.meeting_time << '\n';
    if (r.t1) os << "0,t1,0," << *r.t1 << '\n';
    if (r.t2) os << "0,t2,0," << *r.t2 << '\n';
    if (r.first_regular_time) os << "0,first_regular_time,0," << *r.first_regular_time << '\n';
    for (std::size_t k = 0; k < r.decay_trace.size(); ++k) os << "0,decay," << k << ',' << r.decay_trace[k] << '\n';
    for (const AttemptRecord& a : r.attempts) {
        os << a.attempt << ",start_time,0," << a.start_time << '\n';
        os << a.attempt << ",success,0," << (a.success ? 1 : 0) << '\n';
        for (std::size_t k = 0; k < a.max_difference.size(); ++k) {
            os << a.attempt << ",difference," << k << ',' << a.max_difference[k] << '\n';
        }
    }
}

}  // namespace zhang
