#include "zhang/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "zhang/engine.hpp"
#include "zhang/rng.hpp"

namespace zhang {

void RunConfig::validate() const {
    params.validate();
    if (steps < 1) throw std::invalid_argument("steps must be at least 1");
    if (!(burn_in_fraction >= 0.0 && burn_in_fraction < 1.0)) {
        throw std::invalid_argument("burn-in fraction must lie in [0, 1)");
    }
    if (bins < 1) throw std::invalid_argument("need at least one histogram bin");
    if (batches < 1) throw std::invalid_argument("need at least one batch");
    for (std::size_t s : tracked_sites) {
        if (s >= params.n_sites) throw std::invalid_argument("tracked site outside the lattice");
    }
    for (auto [x, y] : pairs) {
        if (x >= params.n_sites || y >= params.n_sites) throw std::invalid_argument("pair site outside the lattice");
    }
    if (initial) {
        if (initial->size() != params.n_sites) throw std::invalid_argument("initial configuration has wrong size");
        if (!initial->is_stable()) throw std::invalid_argument("initial configuration must be stable");
    }
}

std::uint64_t RunConfig::burn_in_steps() const {
    return static_cast<std::uint64_t>(std::floor(burn_in_fraction * static_cast<double>(steps)));
}

std::uint64_t SiteHistogram::total() const {
    std::uint64_t t = zero_atom;
    for (auto c : counts) t += c;
    return t;
}

std::size_t StationaryStats::slot(std::size_t site) const {
    const auto it = std::find(sites.begin(), sites.end(), site);
    if (it == sites.end()) throw std::out_of_range("site is not tracked");
    return static_cast<std::size_t>(it - sites.begin());
}

namespace {

std::size_t cell_of(double e, std::size_t bins) {
    if (e == 0.0) return 0;
    const auto k = static_cast<std::size_t>(e * static_cast<double>(bins));
    return 1 + std::min(k, bins - 1);
}

StationaryStats empty_stats(const RunConfig& cfg) {
    StationaryStats st;
    st.config = cfg;
    const std::size_t n = cfg.params.n_sites;
    if (cfg.tracked_sites.empty()) {
        st.sites.resize(n);
        for (std::size_t s = 0; s < n; ++s) st.sites[s] = s;
    } else {
        st.sites = cfg.tracked_sites;
    }
    const std::size_t k = st.sites.size();
    st.histograms.assign(k, SiteHistogram{std::vector<std::uint64_t>(cfg.bins, 0), 0});
    st.sum.assign(k, 0.0);
    st.sum_squares.assign(k, 0.0);
    st.empty_position_counts.assign(n, 0);
    for (auto [x, y] : cfg.pairs) {
        st.pair_joints.push_back(PairJoint{x, y, std::vector<std::uint64_t>((cfg.bins + 1) * (cfg.bins + 1), 0)});
    }
    return st;
}

}  // namespace

StationaryStats simulate_stationary(const RunConfig& cfg) {
    cfg.validate();
    const ModelParams& p = cfg.params;
    const std::size_t n = p.n_sites;
    StationaryStats st = empty_stats(cfg);
    const std::size_t k = st.sites.size();

    std::vector<double> e = cfg.initial ? std::vector<double>(cfg.initial->energies().begin(),
                                                              cfg.initial->energies().end())
                                        : std::vector<double>(n, 0.0);
    Rng rng(cfg.seed);

    const std::uint64_t burn = cfg.burn_in_steps();
    const std::uint64_t samples = cfg.steps - burn;
    const std::size_t batches = static_cast<std::size_t>(std::min<std::uint64_t>(cfg.batches, samples));
    std::vector<std::vector<double>> batch_sum(batches, std::vector<double>(k, 0.0));
    std::vector<double> batch_empty(batches, 0.0);
    std::vector<double> batch_out(batches, 0.0);
    std::vector<std::uint64_t> batch_len(batches, 0);

    const bool check_regular = p.a >= 0.5;
    const std::uint64_t regular_from = static_cast<std::uint64_t>(n) * (n - 1);
    double dissipated_total = 0.0;
    std::uint64_t empty_total = 0;

    bool had_fsc = has_zhang_fsc(Configuration(e));
    for (std::uint64_t t = 1; t <= cfg.steps; ++t) {
        const AdditionEvent ev = draw_addition(rng, p, t);
        const AvalancheReport report = add_and_stabilize_in_place(e, ev.site, ev.amount, t);

        // Structural checks on every step, burn-in included.
        bool open = false;
        bool fsc = false;
        std::size_t deficient = 0;
        std::size_t empties = 0;
        std::size_t anomalous = 0;
        std::size_t empty_at = 0;
        for (std::size_t s = 0; s < n; ++s) {
            const double v = e[s];
            if (v < 0.5) {
                ++deficient;
                if (open) fsc = true;
                open = true;
                if (v == 0.0) {
                    ++empties;
                    empty_at = s;
                } else {
                    ++anomalous;
                }
            }
        }
        if (fsc && !had_fsc) ++st.invariants.fsc_creations;
        had_fsc = fsc;
        if (check_regular && t >= regular_from) {
            ++st.invariants.regularity_checks;
            if (anomalous > 0 || empties > 1) ++st.invariants.regularity_violations;
        }

        if (t <= burn) continue;
        const std::uint64_t i = t - burn - 1;
        const std::size_t batch = static_cast<std::size_t>(i * batches / samples);
        ++batch_len[batch];
        for (std::size_t slot = 0; slot < k; ++slot) {
            const double v = e[st.sites[slot]];
            st.sum[slot] += v;
            st.sum_squares[slot] += v * v;
            batch_sum[batch][slot] += v;
            const std::size_t cell = cell_of(v, cfg.bins);
            if (cell == 0) {
                ++st.histograms[slot].zero_atom;
            } else {
                ++st.histograms[slot].counts[cell - 1];
            }
        }
        for (PairJoint& pj : st.pair_joints) {
            ++pj.cells[cell_of(e[pj.x], cfg.bins) * (cfg.bins + 1) + cell_of(e[pj.y], cfg.bins)];
        }
        if (deficient >= 2) {
            ++st.invariants.multi_deficiency_samples;
            st.invariants.last_multi_deficiency_step = t;
        }
        if (empties == 1) {
            ++st.empty_position_counts[empty_at];
            ++st.single_empty_samples;
        }
        empty_total += empties;
        batch_empty[batch] += static_cast<double>(empties);
        dissipated_total += report.dissipated;
        batch_out[batch] += report.dissipated;
    }

    st.sample_count = samples;
    st.batch_site_means.assign(batches, std::vector<double>(k, 0.0));
    st.batch_empty_frequency.assign(batches, 0.0);
    st.batch_dissipated.assign(batches, 0.0);
    for (std::size_t b = 0; b < batches; ++b) {
        const double len = static_cast<double>(batch_len[b]);
        for (std::size_t slot = 0; slot < k; ++slot) st.batch_site_means[b][slot] = batch_sum[b][slot] / len;
        st.batch_empty_frequency[b] = batch_empty[b] / (len * static_cast<double>(n));
        st.batch_dissipated[b] = batch_out[b] / len;
    }
    st.empty_site_frequency = samples ? static_cast<double>(empty_total) / (static_cast<double>(samples) * n) : 0.0;
    st.mean_dissipated = samples ? dissipated_total / static_cast<double>(samples) : 0.0;
    finalize(st);
    return st;
}

void finalize(StationaryStats& st) {
    const std::size_t k = st.sites.size();
    const double ns = static_cast<double>(st.sample_count);
    st.mean.assign(k, 0.0);
    st.variance.assign(k, 0.0);
    st.mean_std_error.assign(k, 0.0);
    st.zero_frequency.assign(k, 0.0);
    if (st.sample_count == 0) return;
    for (std::size_t slot = 0; slot < k; ++slot) {
        st.mean[slot] = st.sum[slot] / ns;
        st.variance[slot] = st.sample_count > 1
                                ? std::max(0.0, (st.sum_squares[slot] - ns * st.mean[slot] * st.mean[slot]) / (ns - 1.0))
                                : 0.0;
        st.zero_frequency[slot] = static_cast<double>(st.histograms[slot].zero_atom) / ns;
        std::vector<double> column;
        column.reserve(st.batch_site_means.size());
        for (const auto& row : st.batch_site_means) column.push_back(row[slot]);
        st.mean_std_error[slot] = stats::batch_means(column).std_error;
    }
    st.empty_site_std_error = stats::batch_means(st.batch_empty_frequency).std_error;
    st.dissipated_std_error = stats::batch_means(st.batch_dissipated).std_error;
}

StationaryStats merge(std::span<const StationaryStats> parts) {
    if (parts.empty()) throw std::invalid_argument("nothing to merge");
    StationaryStats out = parts.front();
    const std::size_t n = out.config.params.n_sites;
    double empty_weighted = out.empty_site_frequency * static_cast<double>(out.sample_count) * n;
    double dissipated_weighted = out.mean_dissipated * static_cast<double>(out.sample_count);
    for (std::size_t r = 1; r < parts.size(); ++r) {
        const StationaryStats& p = parts[r];
        if (p.sites != out.sites || p.config.params.n_sites != n || p.config.bins != out.config.bins) {
            throw std::invalid_argument("cannot merge runs with different layouts");
        }
        out.sample_count += p.sample_count;
        for (std::size_t slot = 0; slot < out.sites.size(); ++slot) {
            out.sum[slot] += p.sum[slot];
            out.sum_squares[slot] += p.sum_squares[slot];
            out.histograms[slot].zero_atom += p.histograms[slot].zero_atom;
            for (std::size_t b = 0; b < out.config.bins; ++b) {
                out.histograms[slot].counts[b] += p.histograms[slot].counts[b];
            }
        }
        for (std::size_t s = 0; s < n; ++s) out.empty_position_counts[s] += p.empty_position_counts[s];
        out.single_empty_samples += p.single_empty_samples;
        for (std::size_t q = 0; q < out.pair_joints.size(); ++q) {
            for (std::size_t c = 0; c < out.pair_joints[q].cells.size(); ++c) {
                out.pair_joints[q].cells[c] += p.pair_joints[q].cells[c];
            }
        }
        out.invariants.fsc_creations += p.invariants.fsc_creations;
        out.invariants.regularity_checks += p.invariants.regularity_checks;
        out.invariants.regularity_violations += p.invariants.regularity_violations;
        out.invariants.multi_deficiency_samples += p.invariants.multi_deficiency_samples;
        out.invariants.last_multi_deficiency_step =
            std::max(out.invariants.last_multi_deficiency_step, p.invariants.last_multi_deficiency_step);
        empty_weighted += p.empty_site_frequency * static_cast<double>(p.sample_count) * n;
        dissipated_weighted += p.mean_dissipated * static_cast<double>(p.sample_count);
        out.batch_site_means.insert(out.batch_site_means.end(), p.batch_site_means.begin(), p.batch_site_means.end());
        out.batch_empty_frequency.insert(out.batch_empty_frequency.end(), p.batch_empty_frequency.begin(),
                                         p.batch_empty_frequency.end());
        out.batch_dissipated.insert(out.batch_dissipated.end(), p.batch_dissipated.begin(), p.batch_dissipated.end());
    }
    const double ns = static_cast<double>(out.sample_count);
    out.empty_site_frequency = ns > 0 ? empty_weighted / (ns * n) : 0.0;
    out.mean_dissipated = ns > 0 ? dissipated_weighted / ns : 0.0;
    finalize(out);
    return out;
}

StationaryStats simulate_replicas(const RunConfig& cfg, std::size_t replicas, std::size_t threads) {
    if (replicas < 1) throw std::invalid_argument("need at least one replica");
    cfg.validate();
    std::vector<StationaryStats> parts(replicas);
    std::vector<RunConfig> configs(replicas, cfg);
    for (std::size_t r = 0; r < replicas; ++r) configs[r].seed = mix_seed(cfg.seed, r);
    threads = std::max<std::size_t>(1, std::min(threads, replicas));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t r = w; r < replicas; r += threads) parts[r] = simulate_stationary(configs[r]);
        });
    }
    for (auto& th : pool) th.join();
    StationaryStats out = merge(parts);
    out.config = cfg;
    return out;
}

ConservationReport conservation_probe(const StationaryStats& stats, const ModelParams& params) {
    if (stats.sample_count == 0) throw std::runtime_error("insufficient samples");
    ConservationReport r;
    r.mean_dissipated = stats.mean_dissipated;
    r.expected = params.mean_addition();
    r.discrepancy = r.mean_dissipated - r.expected;
    r.std_error = stats.dissipated_std_error;
    return r;
}

QuasiUnitTable quasi_unit_report(std::span<const StationaryStats> runs) {
    if (runs.size() < 3) throw std::invalid_argument("need >= 3 sizes");
    QuasiUnitTable table;
    for (const StationaryStats& st : runs) {
        if (st.sample_count == 0) throw std::invalid_argument("run without samples");
        const double target = st.config.params.mean_addition();
        QuasiUnitRow row;
        row.n_sites = st.config.params.n_sites;
        for (std::size_t slot = 0; slot < st.sites.size(); ++slot) {
            row.max_mean_deviation = std::max(row.max_mean_deviation, std::abs(st.mean[slot] - target));
            row.max_variance = std::max(row.max_variance, st.variance[slot]);
        }
        const std::size_t centre = row.n_sites / 2;
        const auto it = std::find(st.sites.begin(), st.sites.end(), centre);
        row.central_variance = it != st.sites.end() ? st.variance[static_cast<std::size_t>(it - st.sites.begin())]
                                                    : row.max_variance;
        table.rows.push_back(row);
    }
    std::sort(table.rows.begin(), table.rows.end(),
              [](const QuasiUnitRow& l, const QuasiUnitRow& r) { return l.n_sites < r.n_sites; });
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        if (table.rows[i].n_sites == table.rows[i - 1].n_sites) throw std::invalid_argument("need >= 3 sizes");
    }
    table.deviation_decreasing = true;
    table.variance_decreasing = true;
    for (std::size_t i = 1; i < table.rows.size(); ++i) {
        if (!(table.rows[i].max_mean_deviation < table.rows[i - 1].max_mean_deviation)) {
            table.deviation_decreasing = false;
        }
        if (!(table.rows[i].max_variance < table.rows[i - 1].max_variance)) table.variance_decreasing = false;
    }
    return table;
}

namespace {

std::vector<char> event_cells(EnergyEvent ev, std::size_t bins) {
    std::vector<char> in(bins + 1, 0);
    in[0] = ev.lo <= 0.0 && 0.0 < ev.hi;
    for (std::size_t b = 0; b < bins; ++b) {
        const double centre = (static_cast<double>(b) + 0.5) / static_cast<double>(bins);
        in[b + 1] = ev.lo <= centre && centre < ev.hi;
    }
    return in;
}

}  // namespace

IndependenceEstimate independence_probe(const StationaryStats& stats, std::size_t x, std::size_t y,
                                        EnergyEvent a_event, EnergyEvent b_event) {
    if (!(a_event.lo < a_event.hi) || !(b_event.lo < b_event.hi)) {
        throw std::invalid_argument("events must have positive length");
    }
    const auto it = std::find_if(stats.pair_joints.begin(), stats.pair_joints.end(),
                                 [&](const PairJoint& pj) { return pj.x == x && pj.y == y; });
    if (it == stats.pair_joints.end()) throw std::out_of_range("pair was not recorded");
    const std::size_t bins = stats.config.bins;
    const std::size_t w = bins + 1;
    const auto in_a = event_cells(a_event, bins);
    const auto in_b = event_cells(b_event, bins);

    double total = 0.0, count_b = 0.0, count_a = 0.0, count_ab = 0.0;
    for (std::size_t cx = 0; cx < w; ++cx) {
        for (std::size_t cy = 0; cy < w; ++cy) {
            const double c = static_cast<double>(it->cells[cx * w + cy]);
            total += c;
            if (in_b[cx]) count_b += c;
            if (in_a[cy]) count_a += c;
            if (in_b[cx] && in_a[cy]) count_ab += c;
        }
    }
    IndependenceEstimate r;
    r.x = x;
    r.y = y;
    r.conditioning_mass = total > 0 ? count_a / total : 0.0;
    if (count_a == 0.0) {
        r.flagged = true;
        return r;
    }
    const double p_b = count_b / total;
    const double p_b_given_a = count_ab / count_a;
    r.estimate = p_b_given_a - p_b;
    r.sigma = std::sqrt(p_b_given_a * (1.0 - p_b_given_a) / count_a + p_b * (1.0 - p_b) / total);
    return r;
}

double sup_cdf_distance(const StationaryStats& stats, std::size_t site,
                        const std::function<double(double)>& reference) {
    const std::size_t slot = stats.slot(site);
    const SiteHistogram& h = stats.histograms[slot];
    const double ns = static_cast<double>(stats.sample_count);
    const std::size_t bins = h.counts.size();
    double cumulative = static_cast<double>(h.zero_atom);
    double sup = std::abs(cumulative / ns - reference(0.0));
    for (std::size_t b = 0; b < bins; ++b) {
        // Just below the right edge, all mass of bins 0..b is counted.
        cumulative += static_cast<double>(h.counts[b]);
        const double edge = static_cast<double>(b + 1) / static_cast<double>(bins);
        sup = std::max(sup, std::abs(cumulative / ns - reference(edge)));
    }
    return sup;
}

}  // namespace zhang
