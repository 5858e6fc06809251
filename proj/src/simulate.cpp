#include "relosim/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "relosim/hedonic.hpp"

namespace relosim {

PolicyState make_base_policy_state(std::span<const MeshCell> cells) {
    PolicyState state;
    state.effective_land_price.reserve(cells.size());
    state.effective_tertiary.reserve(cells.size());
    state.effective_primary_secondary.reserve(cells.size());
    state.logsum_work.reserve(cells.size());
    state.logsum_education.reserve(cells.size());
    state.logsum_other.reserve(cells.size());
    for (const auto& cell : cells) {
        state.effective_land_price.push_back(cell.land_price);
        state.effective_tertiary.push_back(cell.employees_tertiary);
        state.effective_primary_secondary.push_back(cell.employees_primary_secondary);
        state.logsum_work.push_back(cell.logsum_work);
        state.logsum_education.push_back(cell.logsum_education);
        state.logsum_other.push_back(cell.logsum_other);
    }
    return state;
}

void apply_policy1(PolicyState& state, std::span<const MeshCell> cells, double subsidy_rate) {
    if (!(subsidy_rate >= 0.0 && subsidy_rate < 1.0))
        throw DomainError("apply_policy1: subsidy rate must be in [0,1)");
    for (std::size_t i = 0; i < cells.size(); ++i)
        if (cells[i].in_daa)
            state.effective_land_price[i] *= (1.0 - subsidy_rate);
    state.recomputation_ledger.push_back("policy1:land_price_subsidy");
}

void apply_policy2(PolicyState& state, std::span<const MeshCell> cells,
                   std::span<const double> base_distance_matrix, double boost,
                   const ProviderConfig& provider_config, const ScenarioSpec& scenario,
                   std::span<const double> hedonic_coefficients, double delta_t) {
    if (boost < 0.0)
        throw DomainError("apply_policy2: boost must be >= 0");
    if (boost == 0.0) {
        state.recomputation_ledger.push_back("policy2:no-op");
        return;
    }

    double increase = 0.0;
    double non_ufaa_total = 0.0;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].in_ufaa)
            increase += state.effective_tertiary[i] * boost;
        else
            non_ufaa_total += state.effective_tertiary[i];
    }
    if (increase > non_ufaa_total)
        throw DataError("apply_policy2: non-UFAA tertiary employment (" +
                        std::to_string(non_ufaa_total) + "k) cannot absorb the UFAA increase (" +
                        std::to_string(increase) + "k)");

    // Proportional transfer conserves the total by construction; counts may
    // become fractional.
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].in_ufaa)
            state.effective_tertiary[i] *= (1.0 + boost);
        else if (non_ufaa_total > 0.0)
            state.effective_tertiary[i] -= increase * state.effective_tertiary[i] / non_ufaa_total;
    }

    // Refresh order is part of the contract: tour logsums, then land prices,
    // then the ABA surface.
    std::vector<double> old_ls[3] = {state.logsum_work, state.logsum_education,
                                     state.logsum_other};
    state.logsum_work = tour_logsum(cells, base_distance_matrix, TourPurpose::Work,
                                    provider_config, state.effective_tertiary,
                                    state.effective_primary_secondary);
    state.logsum_education = tour_logsum(cells, base_distance_matrix, TourPurpose::Education,
                                         provider_config, state.effective_tertiary,
                                         state.effective_primary_secondary);
    state.logsum_other = tour_logsum(cells, base_distance_matrix, TourPurpose::Other,
                                     provider_config, state.effective_tertiary,
                                     state.effective_primary_secondary);
    state.recomputation_ledger.push_back("tour_logsums");

    // Hedonic delta update: ln p picks up the coefficient-weighted change in
    // the logsum covariates, keeping all other covariates anchored.
    const double b_work = hedonic_coefficients[hedonic_index("logsum_work")];
    const double b_edu = hedonic_coefficients[hedonic_index("logsum_education")];
    const double b_other = hedonic_coefficients[hedonic_index("logsum_other")];
    for (std::size_t i = 0; i < cells.size(); ++i) {
        const double delta = b_work * (state.logsum_work[i] - old_ls[0][i]) +
                             b_edu * (state.logsum_education[i] - old_ls[1][i]) +
                             b_other * (state.logsum_other[i] - old_ls[2][i]);
        state.effective_land_price[i] *= std::exp(delta);
    }
    state.recomputation_ledger.push_back("land_prices");

    const ScenarioSpec base_spec{}; // reference system: no AV effects
    const SyntheticAccessibilityProvider base_provider(cells, base_distance_matrix,
                                                       provider_config, base_spec);
    const SyntheticAccessibilityProvider scenario_provider(
        cells, base_distance_matrix, provider_config, scenario, state.effective_tertiary,
        state.effective_primary_secondary);
    state.surface = build_surface(scenario_provider, base_provider, scenario.name, delta_t);
    state.recomputation_ledger.push_back("aba_surface");
}

std::vector<Household> scale_population(std::span<const Household> households, double ratio,
                                        Rng& rng) {
    if (!(ratio > 0.0 && ratio <= 1.0))
        throw DomainError("scale_population: ratio must be in (0,1]");
    const std::size_t n = households.size();
    const auto target = static_cast<std::size_t>(std::llround(ratio * static_cast<double>(n)));
    if (target >= n)
        return {households.begin(), households.end()};

    // Partial Fisher-Yates over indices, then restore original order.
    std::vector<std::size_t> indices(n);
    for (std::size_t i = 0; i < n; ++i)
        indices[i] = i;
    for (std::size_t i = 0; i < target; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(n - i));
        std::swap(indices[i], indices[j]);
    }
    indices.resize(target);
    std::sort(indices.begin(), indices.end());
    std::vector<Household> subset;
    subset.reserve(target);
    for (std::size_t i : indices)
        subset.push_back(households[i]);
    return subset;
}

double moving_probability(int age_of_head, const MovingRateTable& rates) {
    const double r = rates.ratio_for_age(age_of_head);
    return 1.0 - r * r * r * r * r;
}

namespace {

Alternative make_alternative(const MeshCell& cell, std::size_t cell_index, double correction,
                             const PolicyState& policy, const AccessibilitySurface& surface,
                             const Household& household) {
    Alternative alt;
    alt.cell = cell.id;
    const double employees[2] = {policy.effective_primary_secondary[cell_index],
                                 policy.effective_tertiary[cell_index]};
    alt.covariates =
        choice_covariates(cell, policy.effective_land_price[cell_index], employees);
    alt.aba = household_average_aba(surface, household, cell_index);
    if (!(cell.housing_stock > 0.0))
        throw DataError("alternative cell " + std::to_string(cell.id) + " has no housing stock");
    alt.size_term = std::log(cell.housing_stock);
    alt.sampling_correction = correction;
    return alt;
}

SimulationRun simulate_relocation_impl(std::span<const Household> households,
                                       const RelocationInputs& inputs, std::uint64_t seed,
                                       int run_index, bool resample_moves_per_run,
                                       bool parallel) {
    if (!inputs.surface || !inputs.policy || !inputs.rates)
        throw ContractError("simulate_relocation: incomplete inputs");
    if (inputs.segment_coefficients.size() < kNumSegments)
        throw ContractError("simulate_relocation: need coefficients for all segments");
    const auto& cells = inputs.cells;
    const auto& policy = *inputs.policy;

    std::vector<char> eligible(cells.size(), 0);
    for (std::size_t i = 0; i < cells.size(); ++i)
        eligible[i] = cells[i].housing_stock > 0.0 ? 1 : 0;

    SimulationRun run;
    run.run_index = run_index;
    run.outcomes.assign(households.size(), {});

    // The move decision draws from a run-independent stream when moves are
    // held fixed across runs; the location choice always draws per run.
    const std::uint64_t move_key = resample_moves_per_run
                                       ? 0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(run_index)
                                       : 0x9e3779b97f4a7c15ULL;

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(households.size()); ++i) {
        const Household& household = households[i];
        HouseholdOutcome& outcome = run.outcomes[i];

        Rng move_rng = derive_rng(seed ^ move_key, 0x6d6f7665ULL,
                                  static_cast<std::uint64_t>(household.id));
        const double p_move = moving_probability(household.age_of_head, *inputs.rates);
        if (!move_rng.next_bernoulli(p_move)) {
            outcome.moved = false;
            outcome.final_cell = household.home_cell;
            continue;
        }

        Rng choice_rng = derive_rng(seed, static_cast<std::uint64_t>(run_index) + 1,
                                    static_cast<std::uint64_t>(household.id));
        const SampledAlternatives sampled =
            sample_alternatives(policy.effective_land_price, eligible, inputs.n_draws, choice_rng);

        ChoiceSet set;
        set.household = household.id;
        set.segment = household.segment;
        set.alternatives.reserve(sampled.cells.size());
        for (std::size_t a = 0; a < sampled.cells.size(); ++a)
            set.alternatives.push_back(make_alternative(cells[sampled.cells[a]], sampled.cells[a],
                                                        sampled.corrections[a], policy,
                                                        *inputs.surface, household));

        const auto& coefficients = inputs.segment_coefficients[household.segment - 1];
        const std::vector<double> probabilities = choice_probabilities(set, coefficients);
        std::vector<double> cumulative(probabilities.size());
        double acc = 0.0;
        for (std::size_t a = 0; a < probabilities.size(); ++a) {
            acc += probabilities[a];
            cumulative[a] = acc;
        }
        const std::size_t pick = choice_rng.next_weighted_index(cumulative);
        outcome.moved = true;
        outcome.final_cell = set.alternatives[pick].cell;
    }
    (void)parallel;
    return run;
}

} // namespace

SimulationRun simulate_relocation(std::span<const Household> households,
                                  const RelocationInputs& inputs, std::uint64_t seed,
                                  int run_index, bool resample_moves_per_run, bool parallel) {
    return simulate_relocation_impl(households, inputs, seed, run_index, resample_moves_per_run,
                                    parallel);
}

SimulationRun simulate_relocation_serial(std::span<const Household> households,
                                         const RelocationInputs& inputs, std::uint64_t seed,
                                         int run_index, bool resample_moves_per_run) {
    return simulate_relocation_impl(households, inputs, seed, run_index, resample_moves_per_run,
                                    false);
}

RunMetrics compute_run_metrics(std::span<const CellId> final_cells,
                               std::span<const MeshCell> cells, const DistanceOracle& oracle,
                               double filter_threshold_m) {
    std::vector<std::size_t> daa_targets, ufaa_targets;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i].in_daa)
            daa_targets.push_back(i);
        if (cells[i].in_ufaa)
            ufaa_targets.push_back(i);
    }
    if (daa_targets.empty() || ufaa_targets.empty())
        throw DataError("compute_run_metrics: region has no DAA or no UFAA cells");

    // final_cells hold ids; the oracle indexes by position in the cell table.
    CellId max_id = -1;
    for (const auto& cell : cells)
        max_id = std::max(max_id, cell.id);
    std::vector<std::size_t> index_of(static_cast<std::size_t>(max_id) + 1, 0);
    for (std::size_t i = 0; i < cells.size(); ++i)
        index_of[static_cast<std::size_t>(cells[i].id)] = i;

    const auto& to_daa = oracle.to_nearest(daa_targets);
    const auto& to_ufaa = oracle.to_nearest(ufaa_targets);

    std::vector<double> d_daa, d_ufaa;
    d_daa.reserve(final_cells.size());
    d_ufaa.reserve(final_cells.size());
    for (CellId c : final_cells) {
        const std::size_t idx = index_of[static_cast<std::size_t>(c)];
        d_daa.push_back(to_daa[idx]);
        d_ufaa.push_back(to_ufaa[idx]);
    }

    RunMetrics metrics;
    metrics.n_households = static_cast<long>(final_cells.size());
    metrics.daa_distance = summarize(d_daa);
    metrics.ufaa_distance = summarize(d_ufaa);
    metrics.daa_distance_filtered = summarize(d_daa, filter_threshold_m);
    metrics.ufaa_distance_filtered = summarize(d_ufaa, filter_threshold_m);
    metrics.daa_share = daa_share(final_cells, cells);
    return metrics;
}

namespace {

SummaryStats average_stats(std::span<const RunMetrics> runs, SummaryStats RunMetrics::*member) {
    SummaryStats avg;
    const double n = static_cast<double>(runs.size());
    double count = 0.0, excluded = 0.0, filtered = 0.0;
    for (const auto& run : runs) {
        const SummaryStats& s = run.*member;
        avg.mean += s.mean / n;
        avg.median += s.median / n;
        avg.min += s.min / n;
        avg.max += s.max / n;
        avg.std_dev += s.std_dev / n;
        count += static_cast<double>(s.count) / n;
        excluded += static_cast<double>(s.excluded_unreachable) / n;
        filtered += static_cast<double>(s.excluded_by_filter) / n;
    }
    avg.count = static_cast<long>(std::llround(count));
    avg.excluded_unreachable = static_cast<long>(std::llround(excluded));
    avg.excluded_by_filter = static_cast<long>(std::llround(filtered));
    return avg;
}

} // namespace

ScenarioOutcome run_scenario(std::span<const Household> scaled_households,
                             const RelocationInputs& inputs, const DistanceOracle& oracle,
                             const ScenarioSpec& scenario, std::uint64_t master_seed,
                             bool resample_moves_per_run) {
    ScenarioOutcome outcome;
    outcome.scenario = scenario.name;
    outcome.mean_cell_counts.assign(inputs.cells.size(), 0.0);

    CellId max_id = -1;
    for (const auto& cell : inputs.cells)
        max_id = std::max(max_id, cell.id);
    std::vector<std::size_t> index_of(static_cast<std::size_t>(max_id) + 1, 0);
    for (std::size_t i = 0; i < inputs.cells.size(); ++i)
        index_of[static_cast<std::size_t>(inputs.cells[i].id)] = i;

    const int n_runs = scenario.n_monte_carlo_runs;
    for (int r = 0; r < n_runs; ++r) {
        SimulationRun run = simulate_relocation(scaled_households, inputs, master_seed, r,
                                                resample_moves_per_run);
        std::vector<CellId> final_cells(run.outcomes.size());
        for (std::size_t i = 0; i < run.outcomes.size(); ++i)
            final_cells[i] = run.outcomes[i].final_cell;
        outcome.per_run.push_back(compute_run_metrics(final_cells, inputs.cells, oracle));
        for (CellId c : final_cells)
            outcome.mean_cell_counts[index_of[static_cast<std::size_t>(c)]] += 1.0;

        if (r == n_runs - 1) {
            std::vector<std::size_t> daa_targets, ufaa_targets;
            for (std::size_t i = 0; i < inputs.cells.size(); ++i) {
                if (inputs.cells[i].in_daa)
                    daa_targets.push_back(i);
                if (inputs.cells[i].in_ufaa)
                    ufaa_targets.push_back(i);
            }
            const auto& to_daa = oracle.to_nearest(daa_targets);
            const auto& to_ufaa = oracle.to_nearest(ufaa_targets);
            for (CellId c : final_cells) {
                outcome.final_distances_daa.push_back(to_daa[index_of[static_cast<std::size_t>(c)]]);
                outcome.final_distances_ufaa.push_back(
                    to_ufaa[index_of[static_cast<std::size_t>(c)]]);
            }
        }
        outcome.runs.push_back(std::move(run));
    }
    for (double& v : outcome.mean_cell_counts)
        v /= static_cast<double>(n_runs);

    outcome.averaged.daa_distance = average_stats(outcome.per_run, &RunMetrics::daa_distance);
    outcome.averaged.ufaa_distance = average_stats(outcome.per_run, &RunMetrics::ufaa_distance);
    outcome.averaged.daa_distance_filtered =
        average_stats(outcome.per_run, &RunMetrics::daa_distance_filtered);
    outcome.averaged.ufaa_distance_filtered =
        average_stats(outcome.per_run, &RunMetrics::ufaa_distance_filtered);
    double share = 0.0;
    for (const auto& run : outcome.per_run)
        share += run.daa_share;
    outcome.averaged.daa_share = share / static_cast<double>(n_runs);
    outcome.averaged.n_households = outcome.per_run.front().n_households;
    return outcome;
}

} // namespace relosim
