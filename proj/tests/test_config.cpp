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

#include "starsthz/config.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace starsthz;

TEST_CASE("empty config yields the narrowband defaults") {
    const ScenarioConfig c = parse_config_string("");
    CHECK(c.band == Band::Narrow);
    CHECK(c.N == 128);
    CHECK(c.N_RF == 4);
    CHECK(c.K == 4);
    CHECK(c.L == 4);
    CHECK(c.L_k == 4);
    CHECK(c.M() == 36);
    CHECK(c.pdd.rho0 == 1e3);
    CHECK(c.pdd.reduction == 0.6);
    CHECK(c.pdd.max_outer == 30);
    CHECK(c.bandwidth() == 100e6);
    CHECK(c.seeds.size() == 100);
    CHECK(c.schemes == std::vector<std::string>{"stars-i", "stars-c", "ris", "fd"});
}

TEST_CASE("wideband config must split the array evenly between TTDs") {
    CHECK_THROWS_AS(parse_config_string("[scenario]\nband = wide\nantennas = 100\n[wideband]\nttd_per_rf = 8\n"),
                    ConfigError);
    try {
        parse_config_string("[scenario]\nband = wide\nantennas = 100\n[wideband]\nttd_per_rf = 8\n");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("divisible") != std::string::npos);
    }
    CHECK_NOTHROW(parse_config_string("[scenario]\nband = wide\nantennas = 96\n[wideband]\nttd_per_rf = 8\n"));
}

TEST_CASE("power sweep list") {
    const ScenarioConfig c = parse_config_string("[experiment]\npt_dbm = 20, 25, 30\n");
    CHECK(c.pt_dbm == std::vector<double>{20, 25, 30});
}

TEST_CASE("seed lists accept ranges") {
    const ScenarioConfig c = parse_config_string("[experiment]\nseeds = 3, 7-9, 12\n");
    CHECK(c.seeds == std::vector<std::uint64_t>{3, 7, 8, 9, 12});
    CHECK_THROWS_AS(parse_config_string("[experiment]\nseeds = 9-7\n"), ConfigError);
}

TEST_CASE("unknown keys and bad values are rejected with the field name") {
    CHECK_THROWS_WITH(parse_config_string("[scenario]\nantenas = 3\n"), Catch::Matchers::ContainsSubstring("antenas"));
    CHECK_THROWS_WITH(parse_config_string("[scenario]\nantennas = many\n"),
                      Catch::Matchers::ContainsSubstring("scenario.antennas"));
    CHECK_THROWS_AS(parse_config_string("[scenario]\nusers = 4\nusers_transmit = 5\n"), ConfigError);
    CHECK_THROWS_AS(parse_config_string("[scenario]\nband = medium\n"), ConfigError);
}

TEST_CASE("quantization tolerances map to level counts") {
    CHECK(levels_for_tolerance(1.0, 0.005) == 100.0);
    CHECK(levels_for_tolerance(360.0, 1.0) == 180.0);
    const ScenarioConfig c = parse_config_string("[power]\namplitude_tol = 0.01\nphase_tol_deg = 2\n");
    CHECK(c.power.L_beta == 50.0);
    CHECK(c.power.L_phi == 90.0);
}

TEST_CASE("element sweep parsing") {
    const ScenarioConfig c = parse_config_string("[experiment]\nelements = 2x2, 4x6\n");
    REQUIRE(c.element_sweep.size() == 2);
    CHECK(c.element_sweep[1] == std::pair<int, int>{4, 6});
}

TEST_CASE("load_config reads files and reports missing ones") {
    const auto path = std::filesystem::temp_directory_path() / "starsthz_cfg_test.ini";
    {
        std::ofstream f(path);
        f << "[scenario]\nantennas = 32\nstars_h = 4\nstars_v = 4\n";
    }
    const ScenarioConfig c = load_config(path.string());
    CHECK(c.N == 32);
    CHECK(c.M() == 16);
    std::filesystem::remove(path);
    CHECK_THROWS_AS(load_config(path.string()), ConfigError);
}

TEST_CASE("noise power and rate prefactor per band") {
    ScenarioConfig c = parse_config_string("");
    CHECK(c.noise_power() == Catch::Approx(dbm_to_watt(-174.0) * 100e6).epsilon(1e-12));
    CHECK(c.rate_prefactor() == 1.0);
    c.band = Band::Wide;
    CHECK(c.bandwidth() == 10e9);
    CHECK(c.noise_power() == Catch::Approx(dbm_to_watt(-174.0) * 1e9).epsilon(1e-12));
    CHECK(c.rate_prefactor() == Catch::Approx(1.0 / 14.0));
}
