#include "zhang/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace zhang {

FMatrix::FMatrix(std::size_t n_sites, std::size_t origin)
    : n_(n_sites),
      origin_(origin),
      m_(n_sites * n_sites, 0.0),
      source_flag_(n_sites, 0),
      target_flag_(n_sites, 0),
      toppled_flag_(n_sites, 0) {
    for (std::size_t i = 0; i < n_; ++i) full(i, i) = 1.0;
}

double FMatrix::operator()(std::size_t i, std::size_t j) const {
    if (!is_source(i) || !is_target(j)) return 0.0;
    return full(i, j);
}

double FMatrix::column_weight(std::size_t j) const {
    double w = (*this)(origin_, j);
    for (std::size_t i : sources_) {
        if (toppled_flag_[i]) w += full(i, j);
    }
    return w;
}

namespace {

// Replays topplings on a coefficient matrix whose rows are sources.
void replay_toppling(std::vector<double>& m, std::size_t n, std::size_t s) {
    for (std::size_t i = 0; i < n; ++i) {
        double& own = m[i * n + s];
        if (own == 0.0) continue;
        const double half = 0.5 * own;
        own = 0.0;
        if (s > 0) m[i * n + s - 1] += half;
        if (s + 1 < n) m[i * n + s + 1] += half;
    }
}

}  // namespace

FMatrix wave_f_coefficients(const AvalancheReport& report) {
    const std::size_t n = report.topple_counts.size();
    const std::size_t x = report.event.site;
    if (n == 0 || x >= n) throw std::domain_error("avalanche report does not match a lattice");

    FMatrix f(n, x);
    std::vector<std::uint32_t> tally(n, 0);
    std::vector<double> wave_map(n * n);
    std::vector<double> composed(n * n);
    for (const Wave& wave : report.waves) {
        if (wave.toppled.empty() || wave.toppled.front() != x) {
            throw std::domain_error("every wave must start by toppling the addition site");
        }
        std::fill(wave_map.begin(), wave_map.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) wave_map[i * n + i] = 1.0;
        for (std::size_t s : wave.toppled) {
            if (s >= n) throw std::domain_error("wave topples a site outside the lattice");
            replay_toppling(wave_map, n, s);
            ++tally[s];
        }
        // F(k)_{mj} = sum_i F(k-1)_{mi} f(k)_{ij}
        std::fill(composed.begin(), composed.end(), 0.0);
        for (std::size_t m = 0; m < n; ++m) {
            for (std::size_t i = 0; i < n; ++i) {
                const double fmi = f.m_[m * n + i];
                if (fmi == 0.0) continue;
                const double* row = &wave_map[i * n];
                double* out = &composed[m * n];
                for (std::size_t j = 0; j < n; ++j) out[j] += fmi * row[j];
            }
        }
        f.m_.swap(composed);
    }
    if (tally != report.topple_counts) {
        throw std::domain_error("wave topplings disagree with the report's toppling counts");
    }

    for (std::size_t s = 0; s < n; ++s) {
        if (tally[s] > 0) f.toppled_flag_[s] = 1;
    }
    f.source_flag_[x] = 1;
    for (std::size_t s : report.toppled_set) f.source_flag_[s] = 1;
    for (std::size_t s = 0; s < n; ++s) {
        if (f.source_flag_[s]) f.sources_.push_back(s);
    }
    for (std::size_t s : report.range) {
        f.target_flag_[s] = 1;
        f.targets_.push_back(s);
    }
    return f;
}

double reconstruct_energy(const FMatrix& f, const AvalancheReport& report, std::span<const double> before,
                          std::size_t j) {
    double e = 0.0;
    for (std::size_t i : report.toppled_set) e += f.full(i, j) * before[i];
    e += f.full(f.origin(), j) * report.event.amount;
    if (std::binary_search(report.anomalous_changed.begin(), report.anomalous_changed.end(), j)) {
        e += before[j];
    }
    return e;
}

double origin_fraction_bound(std::size_t n_sites) {
    const int exponent = static_cast<int>((3 * n_sites + 1) / 2);
    return std::ldexp(1.0, -exponent);
}

FMatrixCheck check_f_matrix(const FMatrix& f, const AvalancheReport& report, std::span<const double> before,
                            std::span<const double> after) {
    FMatrixCheck out;
    const std::size_t n = f.n_sites();
    const std::size_t x = f.origin();
    const double bound = origin_fraction_bound(n);
    for (std::size_t j : f.targets()) {
        const double reduced = after[j] != 0.0 ? 1.0 : 0.0;
        out.max_weight_error = std::max(out.max_weight_error, std::abs(f.column_weight(j) - reduced));
        out.max_reconstruction_error =
            std::max(out.max_reconstruction_error, std::abs(reconstruct_energy(f, report, before, j) - after[j]));
        if (after[j] == 0.0) continue;
        out.min_origin_fraction = std::min(out.min_origin_fraction, f(x, j));
        if (j >= x && j + 1 < n && f(x, j + 1) > f(x, j)) out.monotone_ok = false;
        if (j <= x && j > 0 && f(x, j - 1) > f(x, j)) out.monotone_ok = false;
    }
    out.lower_bound_ok = out.min_origin_fraction >= bound;
    return out;
}

double CoefficientState::site_total(std::size_t j) const {
    double s = 0.0;
    for (const AdditionRow& row : a_rows) s += row.fractions[j];
    for (std::size_t m = 0; m < n_sites; ++m) s += b(m, j);
    return s;
}

double CoefficientState::reconstruct(std::size_t j) const {
    double s = 0.0;
    for (const AdditionRow& row : a_rows) s += row.fractions[j] * row.amount;
    for (std::size_t m = 0; m < n_sites; ++m) s += b(m, j) * origin_energies[m];
    return s;
}

CoefficientState start_tracking(const Configuration& c, std::uint64_t time, TrackingOptions options) {
    CoefficientState s;
    s.n_sites = c.size();
    s.origin_time = time;
    s.current_time = time;
    s.origin_energies.assign(c.energies().begin(), c.energies().end());
    s.b_matrix.assign(s.n_sites * s.n_sites, 0.0);
    for (std::size_t j = 0; j < s.n_sites; ++j) {
        s.b_matrix[j * s.n_sites + j] = c[j] != 0.0 ? 1.0 : 0.0;
    }
    if (options.window == 0) options.window = 10 * s.n_sites * (s.n_sites + 1);
    s.options = options;
    return s;
}

namespace {

// Apply the avalanche map to one row of fractions, touching only the range.
void transform_row(std::span<double> row, const FMatrix& f, std::vector<double>& scratch) {
    const auto& targets = f.targets();
    const auto& sources = f.sources();
    scratch.resize(targets.size());
    for (std::size_t k = 0; k < targets.size(); ++k) {
        const std::size_t j = targets[k];
        double v = f.is_source(j) ? 0.0 : row[j];  // sites that never toppled keep their own content
        for (std::size_t i : sources) v += f.full(i, j) * row[i];
        scratch[k] = v;
    }
    for (std::size_t k = 0; k < targets.size(); ++k) row[targets[k]] = scratch[k];
}

}  // namespace

CoefficientState update_fractions(CoefficientState state, const AvalancheReport& report, const FMatrix& f) {
    const std::size_t n = state.n_sites;
    if (report.topple_counts.size() != n || (report.avalanche() && f.n_sites() != n)) {
        throw std::domain_error("fraction update dimension mismatch");
    }
    const std::size_t x = report.event.site;

    CoefficientState::AdditionRow fresh;
    fresh.theta = report.event.time;
    fresh.amount = report.event.amount;
    fresh.fractions.assign(n, 0.0);

    if (report.avalanche()) {
        std::vector<double> scratch;
        for (auto& row : state.a_rows) transform_row(row.fractions, f, scratch);
        for (std::size_t m = 0; m < n; ++m) {
            transform_row(std::span<double>(&state.b_matrix[m * n], n), f, scratch);
        }
        for (std::size_t j : f.targets()) fresh.fractions[j] = f.full(x, j);
    } else {
        fresh.fractions[x] = 1.0;
    }
    state.a_rows.push_back(std::move(fresh));
    state.current_time = report.event.time;

    const auto row_max = [](const CoefficientState::AdditionRow& r) {
        return *std::max_element(r.fractions.begin(), r.fractions.end());
    };
    const double cutoff = state.options.full_tracking ? 0.0 : state.options.prune_below;
    const auto before = state.a_rows.size();
    std::erase_if(state.a_rows, [&](const auto& r) {
        const double mx = row_max(r);
        return state.options.full_tracking ? mx == 0.0 : mx < cutoff;
    });
    state.dropped_rows += before - state.a_rows.size();
    if (!state.options.full_tracking) {
        while (state.a_rows.size() > state.options.window) {
            state.a_rows.pop_front();
            ++state.dropped_rows;
        }
    }
    return state;
}

double decay_envelope(std::size_t n_sites, std::uint64_t elapsed) {
    const double base = 1.0 - origin_fraction_bound(n_sites);
    return std::pow(base, static_cast<double>(elapsed / (n_sites + 1)));
}

DecayReport decay_diagnostics(const CoefficientState& state, const DecayReport* previous) {
    DecayReport out;
    out.time = state.current_time;
    out.rows.reserve(state.a_rows.size());
    for (const auto& row : state.a_rows) {
        ThetaDecay d;
        d.theta = row.theta;
        d.max_fraction = *std::max_element(row.fractions.begin(), row.fractions.end());
        d.envelope = decay_envelope(state.n_sites, state.current_time - row.theta);
        if (d.max_fraction > d.envelope) ++out.envelope_violations;
        out.rows.push_back(d);
    }
    if (previous != nullptr) {
        // Both lists are ordered by theta.
        auto it = previous->rows.begin();
        for (const ThetaDecay& d : out.rows) {
            while (it != previous->rows.end() && it->theta < d.theta) ++it;
            if (it == previous->rows.end()) break;
            if (it->theta == d.theta && d.max_fraction > it->max_fraction * (1.0 + 1e-12)) {
                ++out.monotonicity_violations;
            }
        }
    }
    return out;
}

void write_fractions_csv(std::ostream& os, const CoefficientState& state) {
    const auto old_precision = os.precision(17);
    os << "t,theta,j,A\n";
    for (const auto& row : state.a_rows) {
        for (std::size_t j = 0; j < state.n_sites; ++j) {
            if (row.fractions[j] == 0.0) continue;
            os << state.current_time << ',' << row.theta << ',' << j << ',' << row.fractions[j] << '\n';
        }
    }
    os.precision(old_precision);
}

}  // namespace zhang
