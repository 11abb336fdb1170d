#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "zhang/core.hpp"

// Reference one-dimensional abelian sandpile: a site holding two or more
// grains gives one grain to each neighbour, grains leave at the boundary.
namespace zhang::asm1d {

using AsmConfig = std::vector<std::uint32_t>;

struct AsmResult {
    AsmConfig config;
    std::vector<std::uint32_t> topple_counts;
};

bool is_stable(const AsmConfig& c);

/// Stable with at most one empty site.
bool is_recurrent(const AsmConfig& c);

/**
 * @brief Closed-form addition operator a_x on a stable configuration.
 *
 * If x is empty it becomes full. Otherwise, with i the distance from x to the
 * nearest empty site on the left (i = x + 1 in 0-based terms when there is
 * none, i.e. the endsite is the virtual site beyond the boundary) and j the
 * analogous distance on the right, every site strictly between the endsites
 * x - i and x + j ends full except a new empty site at x - i + j; an empty
 * endsite inside the lattice becomes full. Each site topples min(distance to
 * either endsite) times.
 */
AsmResult asm_add(const AsmConfig& c, std::size_t x);

/// Topple any unstable site until stable; at most one site may start unstable.
AsmResult asm_relax_bruteforce(const AsmConfig& c);

/// Reduction of a Zhang configuration as grains: Empty -> 0, Full -> 1, Unstable -> 2.
/// Throws std::domain_error on anomalous sites.
AsmConfig from_reduction(const Reduction& r);

}  // namespace zhang::asm1d
