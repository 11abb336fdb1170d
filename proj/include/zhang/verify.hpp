#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace zhang {

/**
 * @brief Property suites run by the command-line `verify` command.
 *
 *  - abelian:      stabilization is independent of the toppling order
 *  - fsc:          no addition creates a Zhang-FSC
 *  - coefficients: structure of the avalanche coefficients and decay of tracked fractions
 *  - asm-match:    for a >= 1/2 the reduced dynamics is the abelian sandpile
 *  - onesite:      the single-site closed form against its delay equation and limits
 */
struct SuiteOptions {
    std::size_t sites = 6;
    std::uint64_t seed = 1;
    std::size_t trials = 10000;
    /// Toppling orders per configuration in the abelian suite.
    std::size_t orders = 5;
};

struct SuiteResult {
    std::string name;
    bool passed = true;
    std::size_t checks = 0;
    std::size_t failures = 0;
    /// Worst observed deviation of the suite's main quantity.
    double worst = 0.0;
    std::vector<std::string> messages;  // first few failures
    /// Failure counts by kind, for suites that check several properties.
    std::map<std::string, std::size_t> tally;

    void fail(std::string message);
    /// Counts the failure under `kind`; only the first detail of each kind is kept.
    void fail(const std::string& kind, const std::string& detail);
};

std::vector<std::string> suite_names();

/// Throws std::invalid_argument for an unknown suite name.
SuiteResult run_suite(const std::string& name, const SuiteOptions& options);

SuiteResult verify_abelian(const SuiteOptions& options);
SuiteResult verify_fsc(const SuiteOptions& options);
SuiteResult verify_coefficients(const SuiteOptions& options);
SuiteResult verify_asm_match(const SuiteOptions& options);
SuiteResult verify_onesite(const SuiteOptions& options);

}  // namespace zhang
