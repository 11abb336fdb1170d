#include "zhang/export.hpp"

#include <algorithm>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace zhang {

namespace {

std::string compact(double v) {
    std::ostringstream os;
    os << v;
    return os.str();
}

double bin_left(std::size_t b, std::size_t bins) { return static_cast<double>(b) / static_cast<double>(bins); }

nlohmann::json summary_json(const StationaryStats& st) {
    const ModelParams& p = st.config.params;
    nlohmann::json j;
    j["n_sites"] = p.n_sites;
    j["a"] = p.a;
    j["b"] = p.b;
    j["steps"] = st.config.steps;
    j["burn_in_steps"] = st.config.burn_in_steps();
    j["seed"] = st.config.seed;
    j["sample_count"] = st.sample_count;
    j["empty_site_frequency"] = st.empty_site_frequency;
    j["empty_site_std_error"] = st.empty_site_std_error;
    j["mean_dissipated"] = st.mean_dissipated;
    j["dissipated_std_error"] = st.dissipated_std_error;
    j["fsc_creations"] = st.invariants.fsc_creations;
    j["regularity_checks"] = st.invariants.regularity_checks;
    j["regularity_violations"] = st.invariants.regularity_violations;
    nlohmann::json sites = nlohmann::json::array();
    for (std::size_t slot = 0; slot < st.sites.size(); ++slot) {
        sites.push_back({{"site", st.sites[slot]},
                         {"mean", st.mean[slot]},
                         {"mean_std_error", st.mean_std_error[slot]},
                         {"variance", st.variance[slot]},
                         {"zero_frequency", st.zero_frequency[slot]}});
    }
    j["sites"] = std::move(sites);
    return j;
}

}  // namespace

std::string run_stem(const RunConfig& cfg) {
    std::ostringstream os;
    os << "zhang_N" << cfg.params.n_sites << "_a" << compact(cfg.params.a) << "_b" << compact(cfg.params.b)
       << "_steps" << cfg.steps << "_seed" << cfg.seed;
    return os.str();
}

void write_histogram_csv(std::ostream& os, const StationaryStats& st, std::size_t site) {
    const SiteHistogram& h = st.histograms[st.slot(site)];
    const double ns = static_cast<double>(st.sample_count);
    os.precision(17);
    os << "bin_left,mass\n";
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        os << bin_left(b, h.counts.size()) << ',' << static_cast<double>(h.counts[b]) / ns << '\n';
    }
    os << "ZERO_ATOM," << static_cast<double>(h.zero_atom) / ns << '\n';
}

void write_histogram_json(std::ostream& os, const StationaryStats& st, std::size_t site) {
    const SiteHistogram& h = st.histograms[st.slot(site)];
    const double ns = static_cast<double>(st.sample_count);
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t b = 0; b < h.counts.size(); ++b) {
        rows.push_back({{"bin_left", bin_left(b, h.counts.size())}, {"mass", static_cast<double>(h.counts[b]) / ns}});
    }
    nlohmann::json j;
    j["site"] = site;
    j["bins"] = std::move(rows);
    j["zero_atom"] = static_cast<double>(h.zero_atom) / ns;
    os << j.dump(2) << '\n';
}

void write_summary_csv(std::ostream& os, const StationaryStats& st) {
    os.precision(17);
    os << "site,mean,mean_std_error,variance,zero_frequency\n";
    for (std::size_t slot = 0; slot < st.sites.size(); ++slot) {
        os << st.sites[slot] << ',' << st.mean[slot] << ',' << st.mean_std_error[slot] << ',' << st.variance[slot]
           << ',' << st.zero_frequency[slot] << '\n';
    }
    os << "# empty_site_frequency," << st.empty_site_frequency << ',' << st.empty_site_std_error << '\n';
    os << "# mean_dissipated," << st.mean_dissipated << ',' << st.dissipated_std_error << '\n';
}

void write_summary_json(std::ostream& os, const StationaryStats& st) { os << summary_json(st).dump(2) << '\n'; }

std::vector<std::filesystem::path> write_run(const std::filesystem::path& dir, const StationaryStats& st,
                                             OutputFormat format) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
    const std::string stem = run_stem(st.config);
    const std::string ext = format == OutputFormat::Csv ? ".csv" : ".json";
    std::vector<std::filesystem::path> written;
    const auto emit = [&](const std::filesystem::path& path, const auto& writer) {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot open " + path.string());
        writer(out);
        out.flush();
        if (!out) throw std::runtime_error("write failed for " + path.string());
        written.push_back(path);
    };
    emit(dir / (stem + "_summary" + ext), [&](std::ostream& os) {
        if (format == OutputFormat::Csv) {
            write_summary_csv(os, st);
        } else {
            write_summary_json(os, st);
        }
    });
    for (std::size_t site : st.sites) {
        emit(dir / (stem + "_site" + std::to_string(site) + ext), [&](std::ostream& os) {
            if (format == OutputFormat::Csv) {
                write_histogram_csv(os, st, site);
            } else {
                write_histogram_json(os, st, site);
            }
        });
    }
    return written;
}

std::vector<OneSiteRow> onesite_table(const OneSiteDistribution& d, std::size_t points) {
    if (points < 2) throw std::invalid_argument("need at least two grid points");
    std::vector<double> grid;
    for (std::size_t k = 0; k < points; ++k) grid.push_back(static_cast<double>(k) / static_cast<double>(points - 1));
    if (std::find(grid.begin(), grid.end(), d.b()) == grid.end()) {
        grid.insert(std::upper_bound(grid.begin(), grid.end(), d.b()), d.b());
    }
    std::vector<OneSiteRow> rows;
    for (double h : grid) {
        const OneSidedDensity f = onesite_pdf(d, h);
        const double F = onesite_cdf(d, h);
        if (h == d.b() && h < 1.0) {
            rows.push_back({h, F, f.left, "left"});
            rows.push_back({h, F, f.right, "right"});
        } else {
            rows.push_back({h, F, f.left, ""});
        }
    }
    return rows;
}

void write_onesite_csv(std::ostream& os, const std::vector<OneSiteRow>& rows) {
    os.precision(17);
    os << "h,F,f,side\n";
    for (const OneSiteRow& r : rows) os << r.h << ',' << r.cdf << ',' << r.pdf << ',' << r.side << '\n';
}

void write_onesite_json(std::ostream& os, double b, const std::vector<OneSiteRow>& rows) {
    nlohmann::json j;
    j["b"] = b;
    nlohmann::json arr = nlohmann::json::array();
    for (const OneSiteRow& r : rows) arr.push_back({{"h", r.h}, {"F", r.cdf}, {"f", r.pdf}, {"side", r.side}});
    j["rows"] = std::move(arr);
    os << j.dump(2) << '\n';
}

}  // namespace zhang
