// zhangsim: command-line front end for the one-dimensional Zhang sandpile.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "zhang/core.hpp"
#include "zhang/coupling.hpp"
#include "zhang/export.hpp"
#include "zhang/montecarlo.hpp"
#include "zhang/onesite.hpp"
#include "zhang/verify.hpp"

namespace {

enum Exit { kOk = 0, kUsage = 1, kVerifyFailed = 2, kIo = 3 };

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Shared {
    std::size_t sites = 10;
    double a = 0.0;
    double b = 1.0;
    std::uint64_t steps = 100000;
    double burn_in = 0.10;
    std::optional<std::uint64_t> seed;
    std::size_t bins = 200;
    std::string out;
    std::string format = "csv";
};

void add_shared(CLI::App* cmd, Shared& s) {
    cmd->add_option("--sites", s.sites, "Number of sites N")->check(CLI::PositiveNumber);
    cmd->add_option("--a", s.a, "Lower end of the addition interval");
    cmd->add_option("--b", s.b, "Upper end of the addition interval");
    cmd->add_option("--steps", s.steps, "Number of additions")->check(CLI::PositiveNumber);
    cmd->add_option("--burn-in", s.burn_in, "Discarded fraction of the run")->check(CLI::Range(0.0, 1.0));
    cmd->add_option("--seed", s.seed, "Random seed; drawn and printed when absent");
    cmd->add_option("--bins", s.bins, "Histogram bins on [0,1)")->check(CLI::PositiveNumber);
    cmd->add_option("--out", s.out, "Output file or directory");
    cmd->add_option("--format", s.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

std::uint64_t resolve_seed(const Shared& s) {
    if (s.seed) return *s.seed;
    std::random_device rd;
    const std::uint64_t seed = (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
    std::cerr << "seed " << seed << '\n';
    return seed;
}

zhang::OutputFormat format_of(const Shared& s) {
    return s.format == "json" ? zhang::OutputFormat::Json : zhang::OutputFormat::Csv;
}

std::string pm(double value, double error) {
    std::ostringstream os;
    os.precision(6);
    os << value << " +- " << error;
    return os.str();
}

// Writes through `writer` to the file at `path`, or to stdout when the path is empty.
template <class Writer>
void write_output(const std::string& path, Writer&& writer) {
    if (path.empty()) {
        writer(std::cout);
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path);
    writer(out);
    out.flush();
    if (!out) throw IoError("write failed for " + path);
}

zhang::RunConfig run_config(const Shared& s, std::uint64_t seed) {
    zhang::RunConfig cfg;
    cfg.params = zhang::make_params(s.sites, s.a, s.b);
    cfg.steps = s.steps;
    cfg.burn_in_fraction = s.burn_in;
    cfg.seed = seed;
    cfg.bins = s.bins;
    cfg.validate();
    return cfg;
}

std::vector<std::filesystem::path> save_run(const Shared& s, const zhang::StationaryStats& st) {
    try {
        return zhang::write_run(s.out.empty() ? "." : s.out, st, format_of(s));
    } catch (const std::runtime_error& e) {
        throw IoError(e.what());
    }
}

int cmd_simulate(const Shared& s, std::size_t replicas, std::size_t threads) {
    const zhang::RunConfig cfg = run_config(s, resolve_seed(s));
    const zhang::StationaryStats st =
        replicas > 1 ? zhang::simulate_replicas(cfg, replicas, threads) : zhang::simulate_stationary(cfg);
    const auto files = save_run(s, st);
    const std::size_t centre = s.sites / 2;
    const std::size_t slot = st.slot(centre);
    std::cout << "N=" << s.sites << " central site " << centre << " mean " << pm(st.mean[slot], st.mean_std_error[slot])
              << ", empty frequency " << pm(st.empty_site_frequency, st.empty_site_std_error) << ", dissipated "
              << pm(st.mean_dissipated, st.dissipated_std_error) << ", " << files.size() << " files\n";
    return kOk;
}

int cmd_exact_onesite(const Shared& s, std::size_t points) {
    const zhang::OneSiteDistribution d(s.b);
    const auto rows = zhang::onesite_table(d, points);
    write_output(s.out, [&](std::ostream& os) {
        if (format_of(s) == zhang::OutputFormat::Json) {
            zhang::write_onesite_json(os, s.b, rows);
        } else {
            zhang::write_onesite_csv(os, rows);
        }
    });
    const zhang::OneSidedDensity jump = zhang::onesite_pdf(d, s.b);
    std::ostringstream line;
    line.precision(10);
    line << "b=" << s.b << " F(0)=" << d.f0() << " density at h=b: " << jump.left << " (left), " << jump.right
         << " (right)\n";
    (s.out.empty() ? std::cerr : std::cout) << line.str();
    return kOk;
}

int cmd_couple(const Shared& s, const std::string& mode, std::uint64_t max_attempts) {
    const std::uint64_t seed = resolve_seed(s);
    zhang::CouplingResult r;
    if (mode == "shift" || mode == "exact") {
        if (s.sites != 1) throw std::invalid_argument("shift and exact couplings use --sites 1");
        const zhang::PeriodicityInfo info = zhang::periodicity_info(s.a, s.b);
        zhang::OneSiteCouplingOptions o;
        o.mode = mode == "shift" ? zhang::CouplingMode::Shift : zhang::CouplingMode::Exact;
        r = zhang::couple_one_site(s.a, s.b, seed, s.steps, o);
        std::cerr << "periodicity gcd " << info.gcd << (info.periodic ? " (periodic)" : " (aperiodic)") << '\n';
    } else if (mode == "reduction-match") {
        r = zhang::couple_reduction_match(zhang::make_params(s.sites, s.a, s.b), seed, s.steps);
    } else {
        r = zhang::couple_equalize_zero_one(zhang::make_params(s.sites, s.a, s.b), seed, max_attempts);
    }
    write_output(s.out, [&](std::ostream& os) { zhang::write_coupling_csv(os, r); });
    std::ostringstream line;
    line << "mode " << zhang::to_string(r.mode) << ": " << (r.met ? "met" : "not met");
    if (r.meeting_time) line << " at t=" << *r.meeting_time;
    if (!r.attempts.empty()) line << " after " << r.attempts.size() << " attempts";
    if (!r.decay_trace.empty()) line << ", final difference " << r.decay_trace.back();
    (s.out.empty() ? std::cerr : std::cout) << line.str() << '\n';
    return kOk;
}

int cmd_verify(const Shared& s, const std::string& suite, std::size_t trials) {
    zhang::SuiteOptions o;
    o.sites = s.sites;
    o.seed = resolve_seed(s);
    o.trials = trials;
    std::vector<std::string> names = suite == "all" ? zhang::suite_names() : std::vector<std::string>{suite};
    bool ok = true;
    for (const std::string& name : names) {
        const zhang::SuiteResult r = zhang::run_suite(name, o);
        std::cout << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.checks << " checks, " << r.failures
                  << " failures, worst deviation " << r.worst << '\n';
        for (const std::string& m : r.messages) std::cout << "  " << m << '\n';
        ok = ok && r.passed;
    }
    return ok ? kOk : kVerifyFailed;
}

int cmd_sweep(const Shared& s, const std::vector<std::size_t>& sizes, std::size_t threads) {
    const std::uint64_t seed = resolve_seed(s);
    std::vector<zhang::StationaryStats> runs(sizes.size());
    std::vector<zhang::RunConfig> configs;
    for (std::size_t n : sizes) {
        Shared one = s;
        one.sites = n;
        configs.push_back(run_config(one, seed));
    }
    threads = std::max<std::size_t>(1, std::min(threads, sizes.size()));
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < threads; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t i = w; i < sizes.size(); i += threads) runs[i] = zhang::simulate_stationary(configs[i]);
        });
    }
    for (auto& th : pool) th.join();

    const zhang::QuasiUnitTable table = zhang::quasi_unit_report(runs);
    write_output(s.out, [&](std::ostream& os) {
        if (format_of(s) == zhang::OutputFormat::Json) {
            nlohmann::json j;
            j["a"] = s.a;
            j["b"] = s.b;
            j["steps"] = s.steps;
            j["seed"] = seed;
            j["deviation_decreasing"] = table.deviation_decreasing;
            j["variance_decreasing"] = table.variance_decreasing;
            nlohmann::json rows = nlohmann::json::array();
            for (const auto& r : table.rows) {
                rows.push_back({{"n_sites", r.n_sites},
                                {"max_mean_deviation", r.max_mean_deviation},
                                {"max_variance", r.max_variance},
                                {"central_variance", r.central_variance}});
            }
            j["rows"] = std::move(rows);
            os << j.dump(2) << '\n';
        } else {
            os.precision(17);
            os << "n_sites,max_mean_deviation,max_variance,central_variance\n";
            for (const auto& r : table.rows) {
                os << r.n_sites << ',' << r.max_mean_deviation << ',' << r.max_variance << ',' << r.central_variance
                   << '\n';
            }
        }
    });
    const auto& last = table.rows.back();
    (s.out.empty() ? std::cerr : std::cout)
        << "N=" << last.n_sites << " max |mean - " << (s.a + s.b) / 2 << "| = " << last.max_mean_deviation
        << ", deviation " << (table.deviation_decreasing ? "decreasing" : "not decreasing") << ", variance "
        << (table.variance_decreasing ? "decreasing" : "not decreasing") << '\n';
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simulation and verification tool for the one-dimensional Zhang sandpile"};
    app.require_subcommand(1);
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());

    Shared sim, exact, couple, verify, sweep;
    exact.b = 0.5;
    couple.sites = 1;
    couple.steps = 1000000;
    verify.sites = 6;

    auto* c_sim = app.add_subcommand("simulate", "Long run with histograms and summary statistics");
    add_shared(c_sim, sim);
    std::size_t replicas = 1;
    std::size_t threads = hw;
    c_sim->add_option("--replicas", replicas, "Independent replicas merged into one result")->check(CLI::PositiveNumber);
    c_sim->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);

    auto* c_exact = app.add_subcommand("exact-onesite", "Closed-form single-site law (h, F, f)");
    add_shared(c_exact, exact);
    std::size_t points = 101;
    c_exact->add_option("--points", points, "Grid points on [0,1]")->check(CLI::Range(2, 1000000));

    auto* c_couple = app.add_subcommand("couple", "Coupling experiments");
    add_shared(c_couple, couple);
    std::string mode = "exact";
    std::uint64_t max_attempts = 100000;
    c_couple->add_option("--mode", mode, "Coupling")
        ->check(CLI::IsMember({"shift", "exact", "reduction-match", "equalize"}));
    c_couple->add_option("--max-attempts", max_attempts, "Equalization attempts");

    auto* c_verify = app.add_subcommand("verify", "Property suites");
    add_shared(c_verify, verify);
    std::string suite = "all";
    std::size_t trials = 10000;
    std::vector<std::string> suites = zhang::suite_names();
    suites.push_back("all");
    c_verify->add_option("--suite", suite, "Suite to run")->check(CLI::IsMember(suites));
    c_verify->add_option("--trials", trials, "Trials per suite")->check(CLI::PositiveNumber);

    auto* c_sweep = app.add_subcommand("sweep", "Runs over several sizes with a quasi-unit table");
    add_shared(c_sweep, sweep);
    std::vector<std::size_t> sizes;
    std::size_t sweep_threads = hw;
    c_sweep->add_option("--sizes", sizes, "Sizes N")->delimiter(',')->required();
    c_sweep->add_option("--threads", sweep_threads, "Worker threads")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (c_sim->parsed()) return cmd_simulate(sim, replicas, threads);
        if (c_exact->parsed()) return cmd_exact_onesite(exact, points);
        if (c_couple->parsed()) return cmd_couple(couple, mode, max_attempts);
        if (c_verify->parsed()) return cmd_verify(verify, suite, trials);
        if (c_sweep->parsed()) return cmd_sweep(sweep, sizes, sweep_threads);
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kIo;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::domain_error& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return kUsage;
    }
    return kUsage;
}
