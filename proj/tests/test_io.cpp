#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "relosim/accessibility.hpp"
#include "relosim/csv.hpp"
#include "relosim/io.hpp"
#include "relosim/metrics.hpp"
#include "relosim/pipeline.hpp"
#include "relosim/synthetic.hpp"

using namespace relosim;

namespace {

std::filesystem::path temp_dir() {
    const auto dir = std::filesystem::temp_directory_path() / "relosim_io_tests";
    std::filesystem::create_directories(dir);
    return dir;
}

std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

Region sample_region() {
    SyntheticConfig config;
    config.n_cells = 25;
    config.n_households = 120;
    return generate_synthetic_region(config, ProviderConfig{}, 77);
}

} // namespace

TEST_CASE("dataset tables round-trip losslessly and write byte-stably") {
    const auto dir = temp_dir();
    const Region region = sample_region();

    write_cells_csv(dir / "cells.csv", region.cells);
    const auto cells = read_cells_csv(dir / "cells.csv");
    REQUIRE(cells.size() == region.cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        CHECK(cells[i].id == region.cells[i].id);
        CHECK(cells[i].land_price == region.cells[i].land_price); // bitwise
        CHECK(cells[i].logsum_work == region.cells[i].logsum_work);
        CHECK(cells[i].city == region.cells[i].city);
        CHECK(cells[i].in_daa == region.cells[i].in_daa);
    }
    const std::string first = slurp(dir / "cells.csv");
    write_cells_csv(dir / "cells.csv", cells);
    CHECK(slurp(dir / "cells.csv") == first);

    write_households_csv(dir / "households.csv", region.households);
    const auto households = read_households_csv(dir / "households.csv");
    REQUIRE(households.size() == region.households.size());
    for (std::size_t i = 0; i < households.size(); ++i) {
        CHECK(households[i].id == region.households[i].id);
        CHECK(households[i].home_cell == region.households[i].home_cell);
        CHECK(households[i].segment == region.households[i].segment);
    }

    write_edges_csv(dir / "network.csv", region.edges);
    const auto edges = read_edges_csv(dir / "network.csv");
    REQUIRE(edges.size() == region.edges.size());
    for (std::size_t i = 0; i < edges.size(); ++i) {
        CHECK(edges[i].from == region.edges[i].from);
        CHECK(edges[i].to == region.edges[i].to);
        CHECK(edges[i].length_m == region.edges[i].length_m);
    }

    const MovingRateTable rates = MovingRateTable::default_table();
    write_moving_rates_csv(dir / "rates.csv", rates);
    const MovingRateTable parsed = read_moving_rates_csv(dir / "rates.csv");
    REQUIRE(parsed.bands().size() == rates.bands().size());
    for (std::size_t i = 0; i < parsed.bands().size(); ++i) {
        CHECK(parsed.bands()[i].age_min == rates.bands()[i].age_min);
        CHECK(parsed.bands()[i].did_not_move_ratio == rates.bands()[i].did_not_move_ratio);
    }
}

TEST_CASE("csv error paths") {
    const auto dir = temp_dir();
    CHECK_THROWS_AS(read_csv(dir / "missing.csv"), IoError);

    {
        std::ofstream out(dir / "ragged.csv");
        out << "a,b\n1,2\n3\n";
    }
    CHECK_THROWS_AS(read_csv(dir / "ragged.csv"), IoError);

    {
        std::ofstream out(dir / "small.csv");
        out << "a,b\n1,2\n";
    }
    const CsvTable table = read_csv(dir / "small.csv");
    CHECK_THROWS_AS(table.column("missing"), IoError);
    CHECK_THROWS_AS(parse_double("12x", "test"), IoError);
    CHECK_THROWS_AS(parse_int("1.5", "test"), IoError);
}

TEST_CASE("coefficient presets load with the documented values") {
    const std::filesystem::path presets(RELOSIM_PRESET_DIR);
    const auto segment1 = segment_coefficients_from_file(presets / "segment_1.coef");
    CHECK(segment1.segment == 1);
    CHECK(segment1.alpha_worker == 0.63);
    CHECK(segment1.alpha_student == 0.060);
    CHECK(segment1.alpha_unemployed == 0.17);
    CHECK(segment1.beta[choice_index("land_price_10k")] == -1.24);
    CHECK(segment1.beta[choice_index("share_freshwater")] == 0.0); // blank cell
    CHECK(segment1.size_coefficient == 1.0);

    const auto segment5 = segment_coefficients_from_file(presets / "segment_5.coef");
    CHECK(segment5.alpha_student == 0.0);
    CHECK(segment5.beta[choice_index("city_isesaki")] == 0.0);
    CHECK(segment5.beta[choice_index("city_maebashi")] == 0.73);

    const auto hedonic = hedonic_coefficients_from_file(presets / "hedonic.coef");
    CHECK(hedonic[hedonic_index("intercept")] == 7.83);
    CHECK(hedonic[hedonic_index("housing_stock")] == 0.0);
    CHECK(hedonic[hedonic_index("share_industrial")] == -0.58);
}

TEST_CASE("coefficient files round-trip") {
    const auto dir = temp_dir();
    SegmentCoefficients c;
    c.segment = 3;
    c.alpha_worker = 0.4;
    c.alpha_student = 0.026;
    c.beta[choice_index("land_price_10k")] = -0.84;
    write_segment_coefficients(dir / "segment.coef", c);
    const auto parsed = segment_coefficients_from_file(dir / "segment.coef");
    CHECK(parsed.segment == 3);
    CHECK(parsed.alpha_worker == 0.4);
    CHECK(parsed.beta[choice_index("land_price_10k")] == -0.84);

    // An altered size coefficient must be rejected.
    {
        std::ofstream out(dir / "bad.coef");
        out << "segment 1\nsize_housing_stock 2.0\n";
    }
    CHECK_THROWS_AS(segment_coefficients_from_file(dir / "bad.coef"), DataError);
}

TEST_CASE("accessibility surface csv round-trips through export/import") {
    const auto dir = temp_dir();
    const Region region = sample_region();
    const DistanceOracle oracle = DistanceOracle::from_network(region.cells, region.edges);
    const auto distances = oracle.all_pairs();
    const ProviderConfig provider;
    const ScenarioSpec base_spec{};
    ScenarioSpec av = base_spec;
    av.name = "s1";
    av.vot_commute_multiplier = 0.75;
    av.vot_other_multiplier = 0.85;
    av.road_capacity_factor = 1.2;
    const SyntheticAccessibilityProvider base(region.cells, distances, provider, base_spec);
    const SyntheticAccessibilityProvider scen(region.cells, distances, provider, av);
    const AccessibilitySurface surface = build_surface(scen, base, "s1");

    write_surface_csv(dir / "surface.csv", dir / "scaling.csv", surface);
    const AccessibilitySurface loaded =
        read_surface_csv(dir / "surface.csv", dir / "scaling.csv", "s1");
    REQUIRE(loaded.n_cells() == surface.n_cells());
    for (PersonCategory c : kPersonCategories)
        for (std::size_t cell = 0; cell < surface.n_cells(); ++cell) {
            CHECK(loaded.raw(c, cell) == surface.raw(c, cell));
            CHECK(loaded.reference_raw(c, cell) == surface.reference_raw(c, cell));
            CHECK(loaded.scaling(c, cell) == surface.scaling(c, cell));
            CHECK(loaded.normalized_for_home(c, cell, (cell + 3) % surface.n_cells()) ==
                  doctest::Approx(surface.normalized_for_home(c, cell,
                                                              (cell + 3) % surface.n_cells()))
                      .epsilon(1e-12));
        }

    CHECK_THROWS_AS(read_surface_csv(dir / "surface.csv", dir / "scaling.csv", "unknown"),
                    DataError);
}

TEST_CASE("an exported surface can drive the simulate command in place of the provider") {
    namespace fs = std::filesystem;
    const fs::path root = temp_dir() / "external_surface";
    fs::remove_all(root);
    fs::create_directories(root);

    ProjectConfig config = default_config();
    config.out_dir = root / "out_a";
    config.synthetic.n_cells = 49;
    config.synthetic.n_households = 400;
    config.hedonic_preset = fs::path(RELOSIM_PRESET_DIR) / "hedonic.coef";
    config.segment_presets.clear();
    for (int k = 1; k <= kNumSegments; ++k)
        config.segment_presets.push_back(fs::path(RELOSIM_PRESET_DIR) /
                                         ("segment_" + std::to_string(k) + ".coef"));

    cmd_generate(config);
    CommandOptions options;
    options.use_preset = true;
    options.runs_override = 2;
    options.scenario_names = {"base", "s1"};
    cmd_simulate(config, options);

    // Second pass reads the exported surface instead of rebuilding it.
    ProjectConfig bypass = config;
    bypass.out_dir = root / "out_b";
    bypass.cells_csv = config.out_dir / "data" / "cells.csv";
    bypass.households_csv = config.out_dir / "data" / "households.csv";
    bypass.edges_csv = config.out_dir / "data" / "network.csv";
    bypass.rates_csv = config.out_dir / "data" / "moving_rates.csv";
    bypass.external_surfaces["s1"] = {config.out_dir / "surfaces" / "s1_surface.csv",
                                      config.out_dir / "surfaces" / "s1_scaling.csv"};
    cmd_simulate(bypass, options);

    CHECK(slurp(bypass.out_dir / "scenarios" / "s1_summary.csv") ==
          slurp(config.out_dir / "scenarios" / "s1_summary.csv"));
    CHECK(slurp(bypass.out_dir / "comparison.csv") == slurp(config.out_dir / "comparison.csv"));
}

TEST_CASE("project config parsing and validation") {
    const auto dir = temp_dir();
    {
        std::ofstream out(dir / "config.json");
        out << R"({
            "seed": 7,
            "out_dir": "outputs",
            "split_fraction": 0.8,
            "synthetic": {"n_cells": 49, "n_households": 500},
            "scenarios": [
                {"name": "base"},
                {"name": "fast", "vot_commute_multiplier": 0.5, "road_capacity_factor": 1.2}
            ]
        })";
    }
    const ProjectConfig config = load_config(dir / "config.json");
    CHECK(config.seed == 7);
    CHECK(config.out_dir == dir / "outputs");
    CHECK(config.synthetic.n_cells == 49);
    CHECK(config.scenarios.size() == 2);
    CHECK(config.scenario_by_name("fast").vot_commute_multiplier == 0.5);
    CHECK(config.scenario_by_name("fast").n_monte_carlo_runs == 10);
    CHECK_THROWS_AS(config.scenario_by_name("nope"), ConfigError);

    {
        std::ofstream out(dir / "dup.json");
        out << R"({"scenarios": [{"name": "a"}, {"name": "a"}]})";
    }
    CHECK_THROWS_AS(load_config(dir / "dup.json"), ConfigError);

    {
        std::ofstream out(dir / "split.json");
        out << R"({"split_fraction": 1.0})";
    }
    CHECK_THROWS_AS(load_config(dir / "split.json"), ConfigError);

    {
        std::ofstream out(dir / "badscenario.json");
        out << R"({"scenarios": [{"name": "x", "population_ratio": 2.0}]})";
    }
    CHECK_THROWS_AS(load_config(dir / "badscenario.json"), ConfigError);

    CHECK_THROWS_AS(load_config(dir / "absent.json"), ConfigError);

    const ProjectConfig defaults = default_config();
    CHECK(defaults.scenarios.size() == 7);
    const auto& s1 = defaults.scenario_by_name("s1");
    CHECK(s1.vot_commute_multiplier == 0.75);
    CHECK(s1.vot_other_multiplier == 0.85);
    CHECK(s1.road_capacity_factor == 1.2);
    const auto& s2 = defaults.scenario_by_name("s2");
    CHECK(s2.vot_commute_multiplier == 0.50);
    CHECK(s2.vot_other_multiplier == 0.70);
    CHECK(s2.road_capacity_factor == 1.2);
    const auto& base = defaults.scenario_by_name("base");
    CHECK(base.vot_commute_multiplier == 1.0);
    CHECK(base.road_capacity_factor == 1.0);
    CHECK(base.population_ratio == 0.8245);
    CHECK(base.n_monte_carlo_runs == 10);
}
