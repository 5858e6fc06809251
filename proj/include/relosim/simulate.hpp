#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relosim/accessibility.hpp"
#include "relosim/choice.hpp"
#include "relosim/domain.hpp"
#include "relosim/metrics.hpp"
#include "relosim/rng.hpp"

namespace relosim {

// Scenario-effective state: prices, employee counts and the derived
// quantities a policy may refresh. The ledger records every refresh in order.
struct PolicyState {
    std::vector<double> effective_land_price;       // per cell index
    std::vector<double> effective_tertiary;          // thousands
    std::vector<double> effective_primary_secondary; // thousands
    std::vector<double> logsum_work, logsum_education, logsum_other;
    std::vector<std::string> recomputation_ledger;
    std::optional<AccessibilitySurface> surface; // present after a Policy-2 rebuild
};

PolicyState make_base_policy_state(std::span<const MeshCell> cells);

// Multiplies DAA land prices by (1 - subsidy_rate); non-DAA prices are never
// touched and no accessibility quantity is refreshed.
void apply_policy1(PolicyState& state, std::span<const MeshCell> cells, double subsidy_rate);

// Boosts UFAA tertiary employees by `boost`, absorbs the increase from
// non-UFAA cells in proportion to their own counts (conserving the total),
// then refreshes tour logsums, land prices (hedonic delta update) and the ABA
// surface, in that order, exactly once each. Throws DataError when non-UFAA
// employment cannot absorb the increase.
void apply_policy2(PolicyState& state, std::span<const MeshCell> cells,
                   std::span<const double> base_distance_matrix, double boost,
                   const ProviderConfig& provider_config, const ScenarioSpec& scenario,
                   std::span<const double> hedonic_coefficients, double delta_t = 1.0);

struct HouseholdOutcome {
    bool moved = false;
    CellId final_cell = -1;
};

struct SimulationRun {
    int run_index = 0;
    std::vector<HouseholdOutcome> outcomes; // aligned with the household span
};

// Uniform subset of round(ratio * n) households, original order preserved.
std::vector<Household> scale_population(std::span<const Household> households, double ratio,
                                        Rng& rng);

// 1 - r^5 for the age band's five-year did-not-move ratio r.
double moving_probability(int age_of_head, const MovingRateTable& rates);

// One Monte-Carlo pass: Bernoulli move decision per household, movers draw a
// 50-alternative sampled choice set (weights = effective land prices) and a
// simulated MNL choice. Each household consumes an independent stream keyed
// by (seed, run index, household id), so outcomes are bit-identical across
// thread counts; the serial variant exists as the reference implementation.
struct RelocationInputs {
    std::span<const MeshCell> cells;
    const AccessibilitySurface* surface = nullptr;
    std::span<const SegmentCoefficients> segment_coefficients; // indexed segment-1
    const PolicyState* policy = nullptr;
    const MovingRateTable* rates = nullptr;
    int n_draws = 50;
};

SimulationRun simulate_relocation(std::span<const Household> households,
                                  const RelocationInputs& inputs, std::uint64_t seed,
                                  int run_index, bool resample_moves_per_run = true,
                                  bool parallel = true);
SimulationRun simulate_relocation_serial(std::span<const Household> households,
                                         const RelocationInputs& inputs, std::uint64_t seed,
                                         int run_index, bool resample_moves_per_run = true);

// Indicator rows of one run and their across-run averages.
struct RunMetrics {
    SummaryStats daa_distance;
    SummaryStats ufaa_distance;
    SummaryStats daa_distance_filtered;
    SummaryStats ufaa_distance_filtered;
    double daa_share = 0.0;
    long n_households = 0;
};

struct ScenarioOutcome {
    std::string scenario;
    std::vector<SimulationRun> runs;
    std::vector<RunMetrics> per_run;
    RunMetrics averaged;                 // arithmetic mean of the per-run rows
    std::vector<double> mean_cell_counts; // mean households per cell across runs
    std::vector<double> final_distances_daa;  // last run, for histograms
    std::vector<double> final_distances_ufaa;
};

RunMetrics compute_run_metrics(std::span<const CellId> final_cells,
                               std::span<const MeshCell> cells, const DistanceOracle& oracle,
                               double filter_threshold_m = 10000.0);

// Executes scenario.n_monte_carlo_runs passes with distinct run sub-seeds and
// averages the indicator rows.
ScenarioOutcome run_scenario(std::span<const Household> scaled_households,
                             const RelocationInputs& inputs, const DistanceOracle& oracle,
                             const ScenarioSpec& scenario, std::uint64_t master_seed,
                             bool resample_moves_per_run = true);

} // namespace relosim
