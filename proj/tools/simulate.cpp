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


// Command-line driver: Monte-Carlo sweeps and the beam-split table.

#include "starsthz/experiment.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>

namespace {

// STARSTHZ_LOG=0 silences progress, 1 (default) prints a line per 10%,
// 2 prints every cell.
int log_level() {
    const char* v = std::getenv("STARSTHZ_LOG");
    if (!v || !*v) return 1;
    return std::atoi(v);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Beamforming sweeps for STARS-aided terahertz links"};
    std::string config_path, command, out_dir, seeds, schemes;
    unsigned threads = 1;
    app.add_option("--config", config_path, "INI configuration file")->required()->check(CLI::ExistingFile);
    app.add_option("--command", command, "sweep-power | sweep-elements | beamsplit")
        ->required()
        ->check(CLI::IsMember({"sweep-power", "sweep-elements", "beamsplit"}));
    app.add_option("--out", out_dir, "output directory")->required();
    app.add_option("--seeds", seeds, "comma-separated seeds or ranges, e.g. 1,2,5-9");
    app.add_option("--schemes", schemes, "comma-separated schemes: stars-i, stars-c, ris, fd, conv-hb");
    app.add_option("--threads", threads, "worker threads, 0 = all cores")->default_val(1);
    CLI11_PARSE(app, argc, argv);

    try {
        starsthz::ScenarioConfig cfg = starsthz::load_config(config_path);
        if (!seeds.empty()) cfg.seeds = starsthz::detail::parse_seeds("--seeds", seeds);
        if (!schemes.empty()) cfg.schemes = starsthz::detail::split_list(schemes);
        for (const auto& s : cfg.schemes) starsthz::require_scheme(s, cfg.band);

        const int level = log_level();
        std::size_t last_decile = 0;
        auto progress = [&](std::size_t done, std::size_t total) {
            if (level >= 2) {
                std::cerr << "[simulate] " << done << "/" << total << "\n";
            } else if (level == 1) {
                const std::size_t decile = done * 10 / total;
                if (decile != last_decile) {
                    last_decile = decile;
                    std::cerr << "[simulate] " << decile * 10 << "% (" << done << "/" << total << ")\n";
                }
            }
        };
        const auto files = starsthz::run_experiment(cfg, starsthz::parse_command(command), out_dir, threads, progress);
        for (const auto& f : files) std::cout << f.string() << "\n";
    } catch (const std::exception& e) {
        std::cerr << "simulate: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
