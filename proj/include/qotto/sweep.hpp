// Sweep driver behind the command-line tool: run configurations assembled
// from presets, a flat key=value config file and flags (in rising
// precedence), evaluated over parameter ranges into deterministic CSV.
//
// Output contract: every file has a header row, '.' decimal separator,
// configurable significant digits, UNIX newlines, the literal token NA for
// missing values, and is written to a temporary file then renamed so a
// failed run never leaves a partial file behind.

#pragma once

#include "qotto/optimizer.hpp"
#include "qotto/stochastic.hpp"

#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace qotto::cli {

struct Range {
    double start;
    double stop;
    int count;  // >= 1

    double at(int i) const {
        if (count == 1) return start;
        return start + (stop - start) * static_cast<double>(i) / (count - 1);
    }
};

struct RunConfig {
    std::string command;
    std::map<std::string, double> values;  // fixed parameters by symbol
    std::map<std::string, Range> sweeps;   // swept symbols
    std::string out_path;                  // empty -> "<command>.csv"
    std::uint64_t seed = 1;
    int precision = 12;                    // significant digits
    bool allow_solver_failures = false;
};

struct RunReport {
    int points = 0;
    int failures = 0;
    std::string summary;  // human-readable notes (engine band, sample moments, ...)
};

// ---------------------------------------------------------------------------
// Formatting and file handling.

inline std::string format_value(double v, int precision) {
    char buf[64];
    const auto res =
        std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, precision);
    return std::string(buf, res.ptr);
}

namespace detail {

inline std::string resolve_out_path(const RunConfig& rc) {
    namespace fs = std::filesystem;
    std::string path = rc.out_path.empty() ? rc.command + ".csv" : rc.out_path;
    if (const char* dir = std::getenv("QOTTO_OUT_DIR"); dir && *dir && fs::path(path).is_relative())
        path = (fs::path(dir) / path).string();
    return path;
}

inline void write_atomic(const std::string& path, const std::string& content) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path())
        fs::create_directories(target.parent_path());
    fs::path tmp(target);
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out)
            throw std::runtime_error("failed to write " + tmp.string());
    }
    fs::rename(tmp, target);
}

// Index-parallel map with deterministic output: results land in their slot
// regardless of which worker computed them.
template <typename Fn>
void for_each_index(int n, Fn&& fn) {
    const unsigned workers = std::thread::hardware_concurrency();
    if (n < 4096 || workers < 2) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    const int chunk = (n + static_cast<int>(workers) - 1) / static_cast<int>(workers);
    std::vector<std::future<void>> futures;
    for (int begin = 0; begin < n; begin += chunk) {
        const int end = std::min(begin + chunk, n);
        futures.push_back(std::async(std::launch::async, [begin, end, &fn] {
            for (int i = begin; i < end; ++i) fn(i);
        }));
    }
    for (auto& f : futures) f.get();
}

inline double require(const RunConfig& rc, const std::string& key) {
    const auto it = rc.values.find(key);
    if (it == rc.values.end())
        throw std::invalid_argument(rc.command + ": missing parameter '" + key + "'");
    return it->second;
}

inline double value_or(const RunConfig& rc, const std::string& key, double fallback) {
    const auto it = rc.values.find(key);
    return it == rc.values.end() ? fallback : it->second;
}

inline TrapShape shape_of(const RunConfig& rc, const std::string& side) {
    if (const auto it = rc.values.find("gamma_" + side); it != rc.values.end())
        return TrapShape::from_gamma(it->second);
    if (const auto it = rc.values.find("theta_" + side); it != rc.values.end())
        return TrapShape(it->second);
    throw std::invalid_argument(rc.command + ": set gamma_" + side + " or theta_" + side);
}

inline BathContact contact_of(const RunConfig& rc, const std::string& side) {
    const double beta = require(rc, "beta_" + side);
    const double sigma = value_or(rc, "sigma_" + side, 1.0);
    const double tau =
        value_or(rc, "tau_" + side, std::numeric_limits<double>::infinity());
    return BathContact(beta, sigma, tau);
}

// Cycle at given frequencies with everything else from the run config;
// contact times default to the quasi-static limit.
inline CycleConfig cycle_at(const RunConfig& rc, double omega_c, double omega_h) {
    return CycleConfig(omega_c, omega_h, shape_of(rc, "c"), shape_of(rc, "h"),
                       contact_of(rc, "c"), contact_of(rc, "h"), value_or(rc, "tau_adi", 0.0));
}

inline const Range& require_sweep(const RunConfig& rc, const std::string& key) {
    const auto it = rc.sweeps.find(key);
    if (it == rc.sweeps.end())
        throw std::invalid_argument(rc.command + ": missing sweep over '" + key + "'");
    if (it->second.count < 1)
        throw std::invalid_argument(rc.command + ": sweep count must be >= 1");
    return it->second;
}

struct Table {
    std::string header;
    std::vector<std::string> rows;
    RunReport report;
};

// ---------------------------------------------------------------------------
// Commands.

inline Table run_mode_sweep(const RunConfig& rc) {
    const Range& r_range = require_sweep(rc, "r");
    const double omega_c = value_or(rc, "omega_c", 0.36);
    const int n = r_range.count;

    std::vector<std::string> rows(n);
    std::vector<Mode> modes(n);
    std::vector<double> rs(n);
    for_each_index(n, [&](int i) {
        const double r = r_range.at(i);
        rs[i] = r;
        const auto config = cycle_at(rc, omega_c, r * r * omega_c);
        const auto metrics = evaluate(config);
        modes[i] = metrics.mode;
        std::string eta_cell = "NA";
        if (metrics.mode == Mode::Engine)
            eta_cell =
                format_value(metrics.efficiency / config.carnot_efficiency(), rc.precision);
        rows[i] = format_value(r, rc.precision) + "," + eta_cell + "," + to_string(metrics.mode);
    });

    Table table{"r,eta_over_etaC,mode", std::move(rows), {n, 0, ""}};
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (int i = 0; i < n; ++i) {
        if (modes[i] == Mode::Engine) {
            if (!any) lo = rs[i];
            hi = rs[i];
            any = true;
        }
    }
    std::ostringstream summary;
    if (any)
        summary << "engine band: r in [" << format_value(lo, 6) << ", " << format_value(hi, 6)
                << "]";
    else
        summary << "engine band: empty";
    table.report.summary = summary.str();
    return table;
}

inline Table run_work_contour(const RunConfig& rc) {
    const Range& c_range = require_sweep(rc, "omega_c");
    const Range& h_range = require_sweep(rc, "omega_h");
    const int n = c_range.count * h_range.count;

    std::vector<std::string> rows(n);
    for_each_index(n, [&](int i) {
        const double omega_c = c_range.at(i / h_range.count);
        const double omega_h = h_range.at(i % h_range.count);
        const auto config = cycle_at(rc, omega_c, omega_h);
        const auto metrics = evaluate(config);
        rows[i] = format_value(omega_c, rc.precision) + "," +
                  format_value(omega_h, rc.precision) + "," +
                  format_value(metrics.mean_work, rc.precision) + "," + to_string(metrics.mode);
    });
    return {"omega_c,omega_h,mean_work,mode", std::move(rows), {n, 0, ""}};
}

inline Table run_tradeoff(const RunConfig& rc) {
    // Sweep gamma_h against a fixed gamma_c, or r at fixed frequencies for
    // the fluctuation-versus-compression variant.
    const bool sweep_r = rc.sweeps.count("r") > 0;
    const Range& range = require_sweep(rc, sweep_r ? "r" : "gamma_h");
    const int n = range.count;

    std::vector<std::string> rows(n);
    for_each_index(n, [&](int i) {
        const double swept = range.at(i);
        RunConfig point = rc;
        double omega_c = value_or(rc, "omega_c", 0.2);
        double omega_h;
        if (sweep_r) {
            omega_h = swept * swept * omega_c;
        } else {
            point.values["gamma_h"] = swept;
            point.values.erase("theta_h");
            omega_h = require(rc, "omega_h");
        }
        const auto config = cycle_at(point, omega_c, omega_h);
        const auto metrics = evaluate(config);
        const std::string eta_cell = metrics.mode == Mode::Engine
                                         ? format_value(metrics.efficiency, rc.precision)
                                         : std::string(to_string(metrics.mode));
        const std::string fp_cell = metrics.mean_work != 0.0
                                        ? format_value(metrics.rel_power_fluct, rc.precision)
                                        : std::string("NA");
        rows[i] = format_value(swept, rc.precision) + "," + eta_cell + "," + fp_cell + "," +
                  format_value(metrics.mean_work, rc.precision) + "," +
                  format_value(metrics.work_variance, rc.precision);
    });
    const std::string first_col = sweep_r ? "r" : "gamma_h";
    return {first_col + ",eta,f_P,mean_work,work_variance", std::move(rows), {n, 0, ""}};
}

inline Table run_emp_sweep(const RunConfig& rc) {
    const Range& range = require_sweep(rc, "eta_C");
    const double beta_h = value_or(rc, "beta_h", 2.0);
    static constexpr std::array<std::pair<double, double>, 3> kGammaPairs{
        {{2.0, 2.0}, {2.0, 4.0}, {4.0, 2.0}}};

    const int n = range.count;
    std::vector<std::string> rows(n);
    std::vector<int> row_failures(n, 0);
    std::vector<std::string> logs(n);
    for_each_index(n, [&](int i) {
        const double eta_carnot = range.at(i);
        std::string row = format_value(eta_carnot, rc.precision);
        if (!(eta_carnot > 0.0) || !(eta_carnot < 1.0)) {
            row += ",NA,NA,NA,NA,NA";
            logs[i] = "eta_C out of (0,1), row skipped";
            row_failures[i] = 1;
            rows[i] = std::move(row);
            return;
        }
        const double beta_c = beta_h / (1.0 - eta_carnot);
        for (const auto& [gamma_c, gamma_h] : kGammaPairs) {
            try {
                row += "," + format_value(emp(beta_c, beta_h, gamma_c, gamma_h), rc.precision);
            } catch (const std::exception& err) {
                row += ",NA";
                logs[i] = "solver failure at eta_C=" + format_value(eta_carnot, 6) + ": " +
                          err.what();
                ++row_failures[i];
            }
        }
        row += "," + format_value(emp_analytic(eta_carnot), rc.precision);
        row += "," + format_value(ca_efficiency(eta_carnot), rc.precision);
        rows[i] = std::move(row);
    });

    Table table{"eta_C,eta_star_gc2_gh2,eta_star_gc2_gh4,eta_star_gc4_gh2,"
                "eta_star_analytic,eta_CA",
                std::move(rows),
                {n, 0, ""}};
    std::ostringstream summary;
    for (int i = 0; i < n; ++i) {
        table.report.failures += row_failures[i];
        if (!logs[i].empty()) summary << logs[i] << "\n";
    }
    table.report.summary = summary.str();
    return table;
}

inline Table run_sample(const RunConfig& rc) {
    const auto config = cycle_at(rc, require(rc, "omega_c"), require(rc, "omega_h"));
    const auto n_draws = static_cast<std::size_t>(value_or(rc, "n", 1e6));
    const auto endpoints = relax_endpoints(config);
    const auto pmf = work_pmf(config, endpoints);
    const auto stats = sample_work(pmf, n_draws, rc.seed);
    const auto exact = moments(pmf);

    std::vector<std::string> rows(pmf.atoms.size());
    for (std::size_t k = 0; k < pmf.atoms.size(); ++k) {
        rows[k] = format_value(pmf.atoms[k].value, rc.precision) + "," +
                  format_value(pmf.atoms[k].prob, rc.precision) + "," +
                  std::to_string(stats.counts[k]) + "," +
                  format_value(static_cast<double>(stats.counts[k]) / stats.n, rc.precision);
    }

    const double std_err = std::sqrt(exact.variance / static_cast<double>(stats.n));
    const double z = std_err > 0.0 ? (stats.mean - exact.mean) / std_err : 0.0;
    const double chi2 = chi_square_statistic(stats.counts, pmf);
    const int dof = static_cast<int>(pmf.atoms.size()) - 1;
    std::ostringstream summary;
    summary << "samples: " << stats.n << " (seed " << rc.seed << ")\n"
            << "exact mean/variance:  " << format_value(exact.mean, rc.precision) << " / "
            << format_value(exact.variance, rc.precision) << "\n"
            << "sample mean/variance: " << format_value(stats.mean, rc.precision) << " / "
            << format_value(stats.variance, rc.precision) << "\n"
            << "mean deviation: " << format_value(z, 6) << " standard errors\n";
    if (dof >= 1)
        summary << "chi-square: " << format_value(chi2, 6)
                << " (p = " << format_value(chi_square_pvalue(chi2, dof), 6) << ", dof " << dof
                << ")";
    else
        summary << "chi-square: single-atom distribution, nothing to test";
    return {"value,probability,count,frequency", std::move(rows),
            {static_cast<int>(pmf.atoms.size()), 0, summary.str()}};
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Presets, config files, entry point.

inline RunConfig preset(const std::string& name) {
    RunConfig rc;
    rc.values = {{"beta_c", 10.0}, {"beta_h", 2.0}};
    if (name == "fig1b") {
        rc.command = "mode-sweep";
        rc.values["gamma_c"] = 2.0;
        rc.values["gamma_h"] = 2.0;
        rc.values["omega_c"] = 0.36;
        rc.sweeps["r"] = {0.5, 3.0, 2501};
    } else if (name == "fig1c" || name == "fig1d" || name == "fig1e") {
        rc.command = "work-contour";
        rc.values["gamma_c"] = name == "fig1e" ? 4.0 : 2.0;
        rc.values["gamma_h"] = name == "fig1d" ? 4.0 : 2.0;
        rc.sweeps["omega_c"] = {0.02, 1.0, 99};
        rc.sweeps["omega_h"] = {0.02, 2.0, 100};
    } else if (name == "fig2a") {
        // Reconstruction: the trade-off machinery swept in r at the fig2b
        // bath temperatures, omega_c pinned to 0.2.
        rc.command = "tradeoff";
        rc.values["gamma_c"] = 2.0;
        rc.values["gamma_h"] = 2.0;
        rc.values["omega_c"] = 0.2;
        rc.sweeps["r"] = {1.0, 2.4, 701};
    } else if (name == "fig2b") {
        rc.command = "tradeoff";
        rc.values["gamma_c"] = 2.0;
        rc.values["omega_c"] = 0.2;
        rc.values["omega_h"] = 0.85;
        rc.sweeps["gamma_h"] = {1.5, 4.0, 1001};
    } else if (name == "fig3") {
        rc.command = "emp-sweep";
        rc.values.erase("beta_c");  // derived from eta_C per point
        rc.sweeps["eta_C"] = {0.05, 0.9, 86};
    } else {
        throw std::invalid_argument("unknown preset '" + name + "'");
    }
    if (rc.out_path.empty()) rc.out_path = name + ".csv";
    return rc;
}

// Flat key=value file.  `sym=a:b:n` adds a sweep, `sym=v` a fixed value;
// out, seed, precision and allow_solver_failures address the run itself.
inline void apply_config_file(RunConfig& rc, const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open config file " + path);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error(path + ":" + std::to_string(line_no) +
                                     ": expected key=value");
        std::string key = line.substr(first, eq - first);
        while (!key.empty() && (key.back() == ' ' || key.back() == '\t')) key.pop_back();
        std::string value = line.substr(eq + 1);
        while (!value.empty() && (value.back() == ' ' || value.back() == '\t' ||
                                  value.back() == '\r'))
            value.pop_back();
        const auto vfirst = value.find_first_not_of(" \t");
        value = vfirst == std::string::npos ? std::string() : value.substr(vfirst);

        if (key == "out") {
            rc.out_path = value;
        } else if (key == "seed") {
            rc.seed = std::stoull(value);
        } else if (key == "precision") {
            rc.precision = std::stoi(value);
        } else if (key == "allow_solver_failures") {
            rc.allow_solver_failures = value == "1" || value == "true";
        } else if (value.find(':') != std::string::npos) {
            std::istringstream ss(value);
            std::string a, b, c;
            std::getline(ss, a, ':');
            std::getline(ss, b, ':');
            std::getline(ss, c);
            rc.sweeps[key] = {std::stod(a), std::stod(b), std::stoi(c)};
        } else {
            rc.values[key] = std::stod(value);
        }
    }
}

inline RunReport run(const RunConfig& rc) {
    if (rc.precision < 1 || rc.precision > 17)
        throw std::invalid_argument("precision must be in [1, 17]");

    detail::Table table;
    if (rc.command == "mode-sweep")
        table = detail::run_mode_sweep(rc);
    else if (rc.command == "work-contour")
        table = detail::run_work_contour(rc);
    else if (rc.command == "tradeoff")
        table = detail::run_tradeoff(rc);
    else if (rc.command == "emp-sweep")
        table = detail::run_emp_sweep(rc);
    else if (rc.command == "sample")
        table = detail::run_sample(rc);
    else
        throw std::invalid_argument("unknown command '" + rc.command + "'");

    std::string content = table.header;
    content += '\n';
    for (const auto& row : table.rows) {
        content += row;
        content += '\n';
    }
    detail::write_atomic(detail::resolve_out_path(rc), content);
    return table.report;
}

}  // namespace qotto::cli
