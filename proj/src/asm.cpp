#include "zhang/asm.hpp"

#include <algorithm>
#include <stdexcept>

namespace zhang::asm1d {

bool is_stable(const AsmConfig& c) {
    return std::all_of(c.begin(), c.end(), [](std::uint32_t g) { return g <= 1; });
}

bool is_recurrent(const AsmConfig& c) {
    return is_stable(c) && std::count(c.begin(), c.end(), 0u) <= 1;
}

AsmResult asm_add(const AsmConfig& c, std::size_t x) {
    if (!is_stable(c)) throw std::domain_error("asm_add requires a stable configuration");
    if (x >= c.size()) throw std::out_of_range("addition site outside the lattice");
    const auto n = static_cast<std::ptrdiff_t>(c.size());
    const auto xs = static_cast<std::ptrdiff_t>(x);

    AsmResult out{c, std::vector<std::uint32_t>(c.size(), 0)};
    if (c[x] == 0) {
        out.config[x] = 1;
        return out;
    }

    // Endsites are the nearest empty sites, or the virtual sites -1 and n.
    std::ptrdiff_t left = xs - 1;
    while (left >= 0 && c[static_cast<std::size_t>(left)] != 0) --left;
    std::ptrdiff_t right = xs + 1;
    while (right < n && c[static_cast<std::size_t>(right)] != 0) ++right;

    const std::ptrdiff_t i = xs - left;
    const std::ptrdiff_t j = right - xs;
    const std::ptrdiff_t new_empty = xs - i + j;

    // Counts rise with slope 1 from each endsite and level off between x and the new empty site.
    const std::ptrdiff_t cap = std::min(i, j);
    for (std::ptrdiff_t s = std::max<std::ptrdiff_t>(left, 0); s <= std::min(right, n - 1); ++s) {
        out.config[static_cast<std::size_t>(s)] = 1;
        out.topple_counts[static_cast<std::size_t>(s)] =
            static_cast<std::uint32_t>(std::min({s - left, right - s, cap}));
    }
    out.config[static_cast<std::size_t>(new_empty)] = 0;
    return out;
}

AsmResult asm_relax_bruteforce(const AsmConfig& c) {
    AsmResult out{c, std::vector<std::uint32_t>(c.size(), 0)};
    AsmConfig& g = out.config;
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t s = 0; s < g.size(); ++s) {
            if (g[s] < 2) continue;
            g[s] -= 2;
            if (s > 0) ++g[s - 1];
            if (s + 1 < g.size()) ++g[s + 1];
            ++out.topple_counts[s];
            changed = true;
        }
    }
    return out;
}

AsmConfig from_reduction(const Reduction& r) {
    AsmConfig c;
    c.reserve(r.size());
    for (SiteLabel l : r) {
        switch (l) {
            case SiteLabel::Empty: c.push_back(0); break;
            case SiteLabel::Full: c.push_back(1); break;
            case SiteLabel::Unstable: c.push_back(2); break;
            case SiteLabel::Anomalous:
                throw std::domain_error("anomalous sites have no abelian sandpile counterpart");
        }
    }
    return c;
}

}  // namespace zhang::asm1d
