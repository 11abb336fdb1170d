#include "zhang/core.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace zhang {

void ModelParams::validate() const {
    if (n_sites < 1) {
        throw std::invalid_argument("model needs at least one site");
    }
    if (!(a >= 0.0 && a < b && b <= 1.0)) {
        throw std::invalid_argument("addition interval must satisfy 0 <= a < b <= 1");
    }
}

ModelParams make_params(std::size_t n_sites, double a, double b) {
    ModelParams p{n_sites, a, b};
    p.validate();
    return p;
}

Configuration::Configuration(std::vector<double> energies) : energies_(std::move(energies)) {
    for (double e : energies_) {
        if (!std::isfinite(e) || e < 0.0) {
            throw std::domain_error("configuration energies must be finite and nonnegative");
        }
    }
}

Configuration::Configuration(std::initializer_list<double> energies)
    : Configuration(std::vector<double>(energies)) {}

Configuration Configuration::zeros(std::size_t n) { return Configuration(std::vector<double>(n, 0.0)); }

bool Configuration::is_stable() const {
    for (double e : energies_) {
        if (e >= critical_energy) return false;
    }
    return true;
}

double Configuration::total_energy() const {
    return std::accumulate(energies_.begin(), energies_.end(), 0.0);
}

char label_symbol(SiteLabel label) {
    switch (label) {
        case SiteLabel::Empty: return '0';
        case SiteLabel::Anomalous: return 'a';
        case SiteLabel::Full: return '1';
        case SiteLabel::Unstable: return '2';
    }
    return '?';
}

SiteLabel classify(double energy) {
    if (!(energy >= 0.0)) {
        throw std::domain_error("cannot classify a negative energy");
    }
    if (energy == 0.0) return SiteLabel::Empty;
    if (energy < 0.5) return SiteLabel::Anomalous;
    if (energy < critical_energy) return SiteLabel::Full;
    return SiteLabel::Unstable;
}

Reduction reduce(const Configuration& c) {
    Reduction r;
    r.reserve(c.size());
    for (double e : c.energies()) r.push_back(classify(e));
    return r;
}

std::string to_string(const Reduction& r) {
    std::string s;
    s.reserve(r.size());
    for (SiteLabel l : r) s.push_back(label_symbol(l));
    return s;
}

std::size_t count_deficient(const Configuration& c) {
    std::size_t n = 0;
    for (double e : c.energies()) {
        if (e < 0.5) ++n;
    }
    return n;
}

bool is_regular(const Configuration& c) {
    if (!c.is_stable()) {
        throw std::domain_error("regularity is defined for stable configurations only");
    }
    std::size_t empty = 0;
    for (double e : c.energies()) {
        switch (classify(e)) {
            case SiteLabel::Empty: ++empty; break;
            case SiteLabel::Anomalous: return false;
            default: break;
        }
    }
    return empty <= 1;
}

bool has_zhang_fsc(const Configuration& c) {
    // A candidate left endpoint survives until an interior site reaches energy 1.
    bool open = false;
    for (double e : c.energies()) {
        if (e < 0.5) {
            if (open) return true;
            open = true;
        } else if (e >= critical_energy) {
            open = false;
        }
    }
    return false;
}

bool in_toppling_domain(const Configuration& c) {
    bool seen_unstable = false;
    bool empty_since = false;
    for (double e : c.energies()) {
        if (e >= critical_energy) {
            if (e >= 2.0 * critical_energy) return false;
            if (seen_unstable && !empty_since) return false;
            seen_unstable = true;
            empty_since = false;
        } else if (e == 0.0) {
            empty_since = true;
        }
    }
    return true;
}

}  // namespace zhang
