#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "zhang/montecarlo.hpp"
#include "zhang/onesite.hpp"

namespace zhang {

enum class OutputFormat { Csv, Json };

/// "zhang_N{N}_a{a}_b{b}_steps{steps}_seed{seed}".
std::string run_stem(const RunConfig& cfg);

/// Two columns (bin_left, mass) plus a trailing ZERO_ATOM row; masses are sample fractions.
void write_histogram_csv(std::ostream& os, const StationaryStats& stats, std::size_t site);
void write_histogram_json(std::ostream& os, const StationaryStats& stats, std::size_t site);

/// One row per tracked site: mean, variance, error bars, zero frequency.
void write_summary_csv(std::ostream& os, const StationaryStats& stats);
void write_summary_json(std::ostream& os, const StationaryStats& stats);

/// Writes the summary and one histogram per tracked site under `dir`; returns the paths written.
/// Throws std::runtime_error on I/O failure.
std::vector<std::filesystem::path> write_run(const std::filesystem::path& dir, const StationaryStats& stats,
                                             OutputFormat format);

/// One row of the single-site table; at h = b there is one row per side of the jump.
struct OneSiteRow {
    double h = 0.0;
    double cdf = 0.0;
    double pdf = 0.0;
    const char* side = "";  // "left", "right" or empty
};

std::vector<OneSiteRow> onesite_table(const OneSiteDistribution& d, std::size_t points);
void write_onesite_csv(std::ostream& os, const std::vector<OneSiteRow>& rows);
void write_onesite_json(std::ostream& os, double b, const std::vector<OneSiteRow>& rows);

}  // namespace zhang
