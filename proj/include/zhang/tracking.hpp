#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "zhang/core.hpp"
#include "zhang/engine.hpp"

namespace zhang {

/**
 * @brief Linear redistribution map of one avalanche.
 *
 * full(i, j) is the fraction of the post-addition content of site i that ends
 * up at site j, so that final[j] = sum_i full(i, j) * post_addition[i]. Sites
 * that never topple keep their own content (full(j, j) = 1). The coefficients
 * F_ij proper are the entries with i a toppled site (or the addition site) and
 * j in the range; at the addition site the post-addition content is
 * pre[x] + u, so F_xj multiplies both.
 */
class FMatrix {
public:
    FMatrix() = default;
    FMatrix(std::size_t n_sites, std::size_t origin);

    std::size_t n_sites() const { return n_; }
    std::size_t origin() const { return origin_; }

    double full(std::size_t i, std::size_t j) const { return m_[i * n_ + j]; }
    double& full(std::size_t i, std::size_t j) { return m_[i * n_ + j]; }

    /// F_ij; zero outside sources() x targets().
    double operator()(std::size_t i, std::size_t j) const;

    /// Toppled sites plus the origin, sorted.
    const std::vector<std::size_t>& sources() const { return sources_; }
    /// The range of the avalanche, sorted.
    const std::vector<std::size_t>& targets() const { return targets_; }

    bool is_source(std::size_t i) const { return source_flag_[i] != 0; }
    bool is_target(std::size_t j) const { return target_flag_[j] != 0; }

    /// F_xj + sum over toppled i of F_ij (the origin counts in both terms).
    double column_weight(std::size_t j) const;

private:
    friend FMatrix wave_f_coefficients(const AvalancheReport&);

    std::size_t n_ = 0;
    std::size_t origin_ = 0;
    std::vector<double> m_;
    std::vector<std::size_t> sources_;
    std::vector<std::size_t> targets_;
    std::vector<char> source_flag_;
    std::vector<char> target_flag_;
    std::vector<char> toppled_flag_;
};

/**
 * @brief Compose the per-wave linear maps of an avalanche.
 *
 * Each wave's map is obtained by replaying its topplings on the identity; the
 * maps are chained as F(k) = F(k-1) f(k). Throws std::domain_error if the
 * report's waves are inconsistent with its toppling counts or the lattice.
 */
FMatrix wave_f_coefficients(const AvalancheReport& report);

/// Right-hand side of the energy decomposition for site j in the range.
double reconstruct_energy(const FMatrix& f, const AvalancheReport& report,
                          std::span<const double> before, std::size_t j);

/// Result of checking the structural properties of F for one avalanche.
struct FMatrixCheck {
    double max_weight_error = 0.0;     // |column_weight - final reduction value|, over the range
    double min_origin_fraction = 1.0;  // min F_xj over range sites with nonzero final energy
    bool lower_bound_ok = true;        // min_origin_fraction >= 2^-ceil(3N/2)
    bool monotone_ok = true;           // non-increasing away from the origin
    double max_reconstruction_error = 0.0;
};

/// Lower bound 2^-ceil(3N/2) on the fraction of an addition kept by a nonempty site.
double origin_fraction_bound(std::size_t n_sites);

FMatrixCheck check_f_matrix(const FMatrix& f, const AvalancheReport& report,
                            std::span<const double> before, std::span<const double> after);

struct TrackingOptions {
    /// Keep every addition row; only rows that are identically zero are dropped.
    bool full_tracking = false;
    /// Maximum number of addition rows; 0 selects 10 * N * (N + 1).
    std::size_t window = 0;
    /// Outside full tracking, rows whose largest entry drops below this are discarded.
    double prune_below = 1e-12;
};

/**
 * @brief Decomposition of current energies into fractions of past additions
 *        (A) and of the energies at the origin time (B).
 *
 * energy[j] = sum_theta A[theta][j] U_theta + sum_m B[m][j] energy_m(origin).
 */
struct CoefficientState {
    struct AdditionRow {
        std::uint64_t theta = 0;
        double amount = 0.0;
        std::vector<double> fractions;
    };

    std::size_t n_sites = 0;
    std::uint64_t origin_time = 0;
    std::uint64_t current_time = 0;
    std::vector<double> origin_energies;
    std::deque<AdditionRow> a_rows;
    std::vector<double> b_matrix;  // b_matrix[m * n_sites + j]
    TrackingOptions options;
    std::size_t dropped_rows = 0;

    double b(std::size_t m, std::size_t j) const { return b_matrix[m * n_sites + j]; }

    /// Sum over tracked additions and origin sites of the fractions held by site j.
    double site_total(std::size_t j) const;

    /// Energy of site j implied by the fractions.
    double reconstruct(std::size_t j) const;
};

/// Start tracking at `time` from configuration c: B = diag(1 if nonempty).
CoefficientState start_tracking(const Configuration& c, std::uint64_t time, TrackingOptions options = {});

/**
 * @brief Push the fractions through one step.
 *
 * Rows are transformed by the avalanche map on the range, a new row with
 * A[t+1][j] = F_xj is appended (A[t+1][x] = 1 when no toppling occurred), and
 * pruning is applied per the options.
 */
CoefficientState update_fractions(CoefficientState state, const AvalancheReport& report, const FMatrix& f);

struct ThetaDecay {
    std::uint64_t theta = 0;
    double max_fraction = 0.0;
    double envelope = 1.0;  // (1 - 2^-ceil(3N/2))^floor((t - theta)/(N + 1))
};

struct DecayReport {
    std::uint64_t time = 0;
    std::vector<ThetaDecay> rows;
    std::size_t envelope_violations = 0;
    std::size_t monotonicity_violations = 0;  // relative to the previous report
};

/// (1 - 2^-ceil(3N/2))^floor(elapsed / (N + 1)).
double decay_envelope(std::size_t n_sites, std::uint64_t elapsed);

/**
 * @brief Per-addition maximum fractions, checked against the envelope and,
 *        when `previous` is given, against the earlier maxima.
 */
DecayReport decay_diagnostics(const CoefficientState& state, const DecayReport* previous = nullptr);

/// CSV dump with header t,theta,j,A; zero entries are skipped.
void write_fractions_csv(std::ostream& os, const CoefficientState& state);

}  // namespace zhang
