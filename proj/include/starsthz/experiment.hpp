// SPDX-License-Identifier: Apache-2.0
//
// starsthz: joint hybrid/passive beamforming for STARS-aided terahertz links
// Copyright (C) 2026 The starsthz authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "starsthz/baselines.hpp"
#include "starsthz/channel.hpp"
#include "starsthz/config.hpp"
#include "starsthz/narrowband.hpp"
#include "starsthz/wideband.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

namespace starsthz {

enum class Command { SweepPower, SweepElements, Beamsplit };

inline Command parse_command(const std::string& s) {
    if (s == "sweep-power") return Command::SweepPower;
    if (s == "sweep-elements") return Command::SweepElements;
    if (s == "beamsplit") return Command::Beamsplit;
    throw std::invalid_argument("unknown command '" + s + "' (expected sweep-power, sweep-elements or beamsplit)");
}

/// One Monte-Carlo run. Wall time is kept out of results.csv so that reruns
/// are byte-identical; it goes to timing.csv.
struct ResultRow {
    std::uint64_t seed = 0;
    std::string scheme;
    std::string band;
    double pt_dbm = 0.0;
    int M = 0;
    double w = 0.0;
    double se = std::numeric_limits<double>::quiet_NaN();
    double ee = std::numeric_limits<double>::quiet_NaN();
    double p_transmit = 0.0, p_rate = 0.0, p_static = 0.0, p_total = 0.0;
    int outer_iterations = 0;
    int inner_iterations = 0;
    int solver_fallbacks = 0;
    bool converged = false;
    double max_violation = 0.0;
    double wall_time_s = 0.0;
    std::string error;
};

inline const std::vector<std::string>& known_schemes() {
    static const std::vector<std::string> s{"stars-i", "stars-c", "ris", "fd", "conv-hb"};
    return s;
}

inline void require_scheme(const std::string& scheme, Band band) {
    bool ok = false;
    for (const auto& k : known_schemes()) ok = ok || k == scheme;
    if (!ok) throw std::invalid_argument("unknown scheme '" + scheme + "'");
    if (scheme == "conv-hb" && band != Band::Wide)
        throw std::invalid_argument("scheme conv-hb is only defined for the wideband setup");
}

/// Seed of the random optimizer start. It depends on the channel seed only,
/// so every scheme starts from the same draw.
inline std::uint64_t init_seed_for(std::uint64_t channel_seed) {
    return channel_seed * 0x9E3779B97F4A7C15ULL + 0x2545F4914F6CDD1DULL;
}

/// Runs one scheme on a given channel.
inline RunResult run_scheme(const std::string& scheme, const WideChannel& ch, const ScenarioConfig& cfg,
                            double pt_dbm, double w, std::uint64_t init_seed) {
    require_scheme(scheme, cfg.band);
    const bool wide = cfg.band == Band::Wide;
    if (scheme == "stars-i" || scheme == "stars-c") {
        const StarsMode mode = scheme == "stars-i" ? StarsMode::Independent : StarsMode::Coupled;
        if (wide) return run_wideband(ch, cfg, mode, pt_dbm, w, init_seed);
        return run_narrowband(ch.sub.front(), cfg, mode, pt_dbm, w, init_seed);
    }
    if (scheme == "ris") return run_conventional_ris(ch, cfg, pt_dbm, w, init_seed);
    if (scheme == "fd") return run_full_digital(ch, cfg, StarsMode::Independent, pt_dbm, w, init_seed);
    return run_conventional_hybrid_wide(ch, cfg, StarsMode::Independent, pt_dbm, w, init_seed);
}

/// Channel realization of a seed; shared by every scheme and sweep point
/// with the same geometry.
inline WideChannel channel_for_seed(const ScenarioConfig& cfg, std::uint64_t seed) {
    return make_channel(sample_paths(cfg, seed), cfg);
}

inline ResultRow run_cell(const ScenarioConfig& cfg, const WideChannel& ch, std::uint64_t seed,
                          const std::string& scheme, double pt_dbm, double w) {
    ResultRow row;
    row.seed = seed;
    row.scheme = scheme;
    row.band = std::string(to_string(cfg.band));
    row.pt_dbm = pt_dbm;
    row.M = cfg.M();
    row.w = w;
    try {
        const RunResult res = run_scheme(scheme, ch, cfg, pt_dbm, w, init_seed_for(seed));
        row.se = res.metrics.se;
        row.ee = res.metrics.ee;
        row.p_transmit = res.metrics.power.transmit;
        row.p_rate = res.metrics.power.rate_dependent;
        row.p_static = res.metrics.power.static_;
        row.p_total = res.metrics.power.total();
        row.outer_iterations = res.report.outer_iterations;
        row.inner_iterations = res.report.inner_iterations;
        row.solver_fallbacks = res.report.solver_fallbacks;
        row.converged = res.report.converged;
        row.max_violation = res.max_violation;
        row.wall_time_s = res.report.wall_time_s;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

/// A sweep cell before it runs.
struct CellSpec {
    std::uint64_t seed = 0;
    std::string scheme;
    double pt_dbm = 0.0;
    double w = 0.0;
    int element_index = -1; // into element_sweep; -1 keeps the config's surface
};

inline std::vector<CellSpec> plan_cells(const ScenarioConfig& cfg, Command cmd) {
    std::vector<CellSpec> cells;
    const int n_geom = cmd == Command::SweepElements ? static_cast<int>(cfg.element_sweep.size()) : 1;
    for (int g = 0; g < n_geom; ++g)
        for (std::uint64_t seed : cfg.seeds)
            for (double w : cfg.weights)
                for (const auto& scheme : cfg.schemes) {
                    if (cmd == Command::SweepPower) {
                        for (double pt : cfg.pt_dbm) cells.push_back({seed, scheme, pt, w, -1});
                    } else {
                        cells.push_back({seed, scheme, cfg.pt_fixed_dbm, w, g});
                    }
                }
    return cells;
}

inline ScenarioConfig config_for_cell(const ScenarioConfig& cfg, const CellSpec& c) {
    ScenarioConfig out = cfg;
    if (c.element_index >= 0) {
        out.M_h = cfg.element_sweep[static_cast<std::size_t>(c.element_index)].first;
        out.M_v = cfg.element_sweep[static_cast<std::size_t>(c.element_index)].second;
        validate(out);
    }
    return out;
}

/// Runs every cell, on `threads` workers (0 = hardware concurrency). The
/// returned rows follow the plan order regardless of scheduling.
inline std::vector<ResultRow> run_sweep(const ScenarioConfig& cfg, Command cmd, unsigned threads = 1,
                                        const std::function<void(std::size_t, std::size_t)>& progress = {}) {
    if (cmd == Command::Beamsplit) throw std::invalid_argument("run_sweep: beamsplit is not a sweep");
    for (const auto& s : cfg.schemes) require_scheme(s, cfg.band);
    const std::vector<CellSpec> cells = plan_cells(cfg, cmd);
    std::vector<ResultRow> rows(cells.size());
    std::atomic<std::size_t> next{0}, done{0};
    std::mutex progress_mutex;
    auto worker = [&]() {
        for (std::size_t i = next++; i < cells.size(); i = next++) {
            const ScenarioConfig c = config_for_cell(cfg, cells[i]);
            const WideChannel ch = channel_for_seed(c, cells[i].seed);
            rows[i] = run_cell(c, ch, cells[i].seed, cells[i].scheme, cells[i].pt_dbm, cells[i].w);
            const std::size_t d = ++done;
            if (progress) {
                std::lock_guard<std::mutex> lock(progress_mutex);
                progress(d, cells.size());
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(1, cells.size())));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return rows;
}

// ---------------------------------------------------------------------------
// CSV output
// ---------------------------------------------------------------------------

namespace detail {

inline std::string fmt(double v) {
    if (std::isnan(v)) return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch == '\n' ? ' ' : ch;
    }
    return out + "\"";
}

} // namespace detail

inline constexpr const char* kResultsHeader =
    "seed,scheme,band,pt_dbm,M,w,se,ee,p_transmit_w,p_rate_w,p_static_w,p_total_w,"
    "outer_iterations,inner_iterations,solver_fallbacks,converged,max_violation,error";

inline void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    using detail::fmt;
    os << kResultsHeader << '\n';
    for (const auto& r : rows)
        os << r.seed << ',' << r.scheme << ',' << r.band << ',' << fmt(r.pt_dbm) << ',' << r.M << ',' << fmt(r.w)
           << ',' << fmt(r.se) << ',' << fmt(r.ee) << ',' << fmt(r.p_transmit) << ',' << fmt(r.p_rate) << ','
           << fmt(r.p_static) << ',' << fmt(r.p_total) << ',' << r.outer_iterations << ',' << r.inner_iterations
           << ',' << r.solver_fallbacks << ',' << (r.converged ? 1 : 0) << ',' << fmt(r.max_violation) << ','
           << detail::csv_quote(r.error) << '\n';
}

inline void write_timing_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    os << "seed,scheme,pt_dbm,M,w,wall_time_s\n";
    for (const auto& r : rows)
        os << r.seed << ',' << r.scheme << ',' << detail::fmt(r.pt_dbm) << ',' << r.M << ',' << detail::fmt(r.w)
           << ',' << detail::fmt(r.wall_time_s) << '\n';
}

/// Mean and sample standard deviation of SE and EE per (scheme, P_t, M, w),
/// over the rows that finished without error.
inline void write_summary_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
    struct Acc {
        int n = 0, failed = 0;
        double se = 0, se2 = 0, ee = 0, ee2 = 0;
    };
    std::map<std::tuple<std::string, double, int, double>, Acc> groups;
    for (const auto& r : rows) {
        Acc& a = groups[{r.scheme, r.pt_dbm, r.M, r.w}];
        if (!r.error.empty() || std::isnan(r.se)) {
            ++a.failed;
            continue;
        }
        ++a.n;
        a.se += r.se;
        a.se2 += r.se * r.se;
        a.ee += r.ee;
        a.ee2 += r.ee * r.ee;
    }
    auto sd = [](double s, double s2, int n) {
        return n > 1 ? std::sqrt(std::max(0.0, (s2 - s * s / n) / (n - 1))) : 0.0;
    };
    using detail::fmt;
    os << "scheme,pt_dbm,M,w,runs,failed,se_mean,se_std,ee_mean,ee_std\n";
    for (const auto& [key, a] : groups) {
        const double n = a.n > 0 ? a.n : std::numeric_limits<double>::quiet_NaN();
        os << std::get<0>(key) << ',' << fmt(std::get<1>(key)) << ',' << std::get<2>(key) << ','
           << fmt(std::get<3>(key)) << ',' << a.n << ',' << a.failed << ',' << fmt(a.se / n) << ','
           << fmt(sd(a.se, a.se2, a.n)) << ',' << fmt(a.ee / n) << ',' << fmt(sd(a.ee, a.ee2, a.n)) << '\n';
    }
}

inline void write_beamsplit_csv(std::ostream& os, const std::vector<BeamsplitRow>& rows) {
    os << "f_hz,angle_rad,gain,scheme\n";
    for (const auto& r : rows)
        os << detail::fmt(r.f_hz) << ',' << detail::fmt(r.angle_rad) << ',' << detail::fmt(r.gain) << ',' << r.scheme
           << '\n';
}

/// Runs a command and writes its CSV files into `out_dir` (created if
/// needed). Returns the paths written.
inline std::vector<std::filesystem::path> run_experiment(const ScenarioConfig& cfg, Command cmd,
                                                         const std::filesystem::path& out_dir, unsigned threads = 1,
                                                         const std::function<void(std::size_t, std::size_t)>& progress = {}) {
    std::filesystem::create_directories(out_dir);
    auto open = [](const std::filesystem::path& p) {
        std::ofstream f(p, std::ios::binary);
        if (!f) throw std::runtime_error("cannot write '" + p.string() + "'");
        return f;
    };
    std::vector<std::filesystem::path> written;
    if (cmd == Command::Beamsplit) {
        const auto p = out_dir / "beamsplit.csv";
        auto f = open(p);
        write_beamsplit_csv(f, beamsplit_table(cfg));
        written.push_back(p);
        return written;
    }
    const std::vector<ResultRow> rows = run_sweep(cfg, cmd, threads, progress);
    for (const auto& [name, writer] :
         std::vector<std::pair<std::string, void (*)(std::ostream&, const std::vector<ResultRow>&)>>{
             {"results.csv", write_results_csv}, {"summary.csv", write_summary_csv}, {"timing.csv", write_timing_csv}}) {
        const auto p = out_dir / name;
        auto f = open(p);
        writer(f, rows);
        written.push_back(p);
    }
    return written;
}

} // namespace starsthz
