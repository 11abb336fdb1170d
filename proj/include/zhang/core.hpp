#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

/**
 * @file core.hpp
 * @brief Configurations of the one-dimensional Zhang sandpile and the
 *        structural predicates used throughout the engine.
 *
 * Sites are indexed 0..N-1. Energies are doubles; a site is stable while its
 * energy is below the critical energy 1.
 */
namespace zhang {

inline constexpr double critical_energy = 1.0;

/// Parameters of the (N, [a,b]) model.
struct ModelParams {
    std::size_t n_sites = 1;
    double a = 0.0;
    double b = 1.0;

    /// Throws std::invalid_argument unless n_sites >= 1 and 0 <= a < b <= 1.
    void validate() const;

    double mean_addition() const { return 0.5 * (a + b); }
    double addition_variance() const { return (b - a) * (b - a) / 12.0; }
};

/// Validated constructor helper.
ModelParams make_params(std::size_t n_sites, double a, double b);

/**
 * @brief Vector of nonnegative site energies.
 *
 * Value type. The constructor rejects negative or non-finite entries.
 */
class Configuration {
public:
    Configuration() = default;
    explicit Configuration(std::vector<double> energies);
    Configuration(std::initializer_list<double> energies);

    /// All-empty configuration on n sites.
    static Configuration zeros(std::size_t n);

    std::size_t size() const { return energies_.size(); }
    double operator[](std::size_t site) const { return energies_[site]; }
    std::span<const double> energies() const { return energies_; }

    /// Mutable access for the engine; callers keep entries nonnegative.
    std::vector<double>& raw() { return energies_; }

    bool is_stable() const;
    double total_energy() const;

    friend bool operator==(const Configuration&, const Configuration&) = default;

private:
    std::vector<double> energies_;
};

enum class SiteLabel : std::uint8_t { Empty, Anomalous, Full, Unstable };

/// Symbol used for a label in printed reductions: 0, a, 1, 2.
char label_symbol(SiteLabel label);

using Reduction = std::vector<SiteLabel>;

/// Partition of [0, inf): {0}, (0,1/2), [1/2,1), [1,inf). Throws on negative input.
SiteLabel classify(double energy);

Reduction reduce(const Configuration& c);

std::string to_string(const Reduction& r);

/// Number of Empty or Anomalous sites.
std::size_t count_deficient(const Configuration& c);

/// At most one Empty site and no Anomalous site. Requires a stable configuration.
bool is_regular(const Configuration& c);

/**
 * @brief Whether some interval W of at least two sites has
 *        2*energy[j] < deg_W(j) for every j in W.
 *
 * Endpoints of W have one neighbour in W and interior sites two, so W qualifies
 * exactly when both endpoints have energy < 1/2 and every interior site has
 * energy < 1. A single left-to-right pass finds such a pair.
 */
bool has_zhang_fsc(const Configuration& c);

/**
 * @brief Membership in the set of configurations reachable by topplings after
 *        one addition to a stable configuration: every unstable energy is < 2
 *        and between any two unstable sites lies an empty site.
 */
bool in_toppling_domain(const Configuration& c);

}  // namespace zhang
