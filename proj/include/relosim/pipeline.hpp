#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "relosim/accessibility.hpp"
#include "relosim/choice.hpp"
#include "relosim/domain.hpp"
#include "relosim/hedonic.hpp"
#include "relosim/simulate.hpp"
#include "relosim/synthetic.hpp"

namespace relosim {

struct ExternalSurfacePaths {
    std::filesystem::path surface_csv;
    std::filesystem::path scaling_csv;
};

// Everything a pipeline command needs: data locations or generation
// parameters, coefficient presets, the scenario list and the global seed.
struct ProjectConfig {
    std::filesystem::path base_dir = ".";
    std::uint64_t seed = 20240501;
    std::filesystem::path out_dir = "out";
    double split_fraction = 0.8; // estimation share of the household split
    bool resample_moves_per_run = true; // false pins the move decision across runs
    SyntheticConfig synthetic;
    ProviderConfig provider;

    // Optional explicit data files; when empty, <out>/data holds them.
    std::filesystem::path cells_csv, households_csv, edges_csv, rates_csv;

    std::filesystem::path hedonic_preset;
    std::vector<std::filesystem::path> segment_presets; // five files, segment order

    std::vector<ScenarioSpec> scenarios;
    std::map<std::string, ExternalSurfacePaths> external_surfaces; // by scenario name

    const ScenarioSpec& scenario_by_name(const std::string& name) const;
};

// The shipped scenario set: base plus the two AV scenarios and their policy
// variants. base/s1/s2 carry VoT multipliers (1.0,1.0), (0.75,0.85),
// (0.50,0.70) and road capacity 1.2 for s1/s2.
std::vector<ScenarioSpec> builtin_scenarios();

ProjectConfig default_config();
ProjectConfig load_config(const std::filesystem::path& path);

// Loaded dataset plus derived machinery shared by the commands.
struct Dataset {
    std::vector<MeshCell> cells;
    std::vector<Household> households;
    std::vector<NetworkEdge> edges;
    MovingRateTable rates = MovingRateTable::default_table();
    DistanceOracle oracle;
    std::vector<double> distances; // all-pairs meters
};

Dataset load_dataset(const ProjectConfig& config);

// Household-level estimation/validation split, seeded from the config.
struct Split {
    std::vector<Household> estimation;
    std::vector<Household> validation;
};
Split split_households(std::span<const Household> households, double fraction,
                       std::uint64_t seed);

// Builds estimation choice sets: 50 sampled alternatives with price weights
// plus the force-included observed choice.
std::vector<ChoiceSet> build_estimation_data(const Dataset& dataset,
                                             std::span<const Household> households,
                                             const AccessibilitySurface& surface,
                                             const PolicyState& policy, int n_draws,
                                             std::uint64_t seed);

ChoiceSet build_choice_set(const SampledAlternatives& sampled, std::span<const MeshCell> cells,
                           const PolicyState& policy, const AccessibilitySurface& surface,
                           const Household& household);

// Segment coefficient sets loaded from preset files (fixed layout
// segment_1..5) or from a previous estimate run.
std::vector<SegmentCoefficients> load_segment_coefficients(const ProjectConfig& config,
                                                           bool use_preset);
std::vector<double> load_hedonic_coefficients(const ProjectConfig& config, bool use_preset);

struct CommandOptions {
    bool use_preset = false;
    int runs_override = -1;                 // > 0 replaces every scenario's run count
    std::optional<std::uint64_t> seed_override;
    std::vector<std::string> scenario_names;
};

// Pipeline commands; each writes its outputs under config.out_dir and
// returns a short human-readable summary that the CLI prints.
std::string cmd_generate(const ProjectConfig& config);
std::string cmd_estimate(const ProjectConfig& config, const CommandOptions& options = {});
std::string cmd_validate(const ProjectConfig& config, const CommandOptions& options = {});
std::string cmd_simulate(const ProjectConfig& config, const CommandOptions& options = {});
std::string cmd_report_diff(const ProjectConfig& config, const CommandOptions& options = {});

} // namespace relosim
