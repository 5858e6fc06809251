#include <doctest.h>

#include <cmath>

#include "relosim/choice.hpp"
#include "relosim/metrics.hpp"
#include "relosim/pipeline.hpp"
#include "relosim/simulate.hpp"
#include "relosim/synthetic.hpp"

using namespace relosim;

// The OpenMP kernels against their serial reference implementations.

namespace {

struct Fixture {
    Region region;
    std::vector<double> distances;
    PolicyState policy;
    AccessibilitySurface surface;
    DistanceOracle oracle;

    Fixture() {
        SyntheticConfig config;
        config.n_cells = 64;
        config.n_households = 600;
        region = generate_synthetic_region(config, ProviderConfig{}, 12);
        oracle = DistanceOracle::from_network(region.cells, region.edges);
        distances = oracle.all_pairs_serial();
        policy = make_base_policy_state(region.cells);
        const ScenarioSpec base_spec{};
        const SyntheticAccessibilityProvider base(region.cells, distances, ProviderConfig{},
                                                  base_spec);
        surface = build_surface_serial(base, base, "base");
    }
};

} // namespace

TEST_CASE("all-pairs distances: parallel equals serial bitwise") {
    const Fixture f;
    const auto parallel = f.oracle.all_pairs();
    REQUIRE(parallel.size() == f.distances.size());
    for (std::size_t i = 0; i < parallel.size(); ++i)
        CHECK(parallel[i] == f.distances[i]);
}

TEST_CASE("surface build: parallel equals serial bitwise") {
    const Fixture f;
    ScenarioSpec av;
    av.name = "s1";
    av.vot_commute_multiplier = 0.75;
    av.vot_other_multiplier = 0.85;
    av.road_capacity_factor = 1.2;
    const ScenarioSpec base_spec{};
    const SyntheticAccessibilityProvider base(f.region.cells, f.distances, ProviderConfig{},
                                              base_spec);
    const SyntheticAccessibilityProvider scen(f.region.cells, f.distances, ProviderConfig{}, av);
    const AccessibilitySurface serial = build_surface_serial(scen, base, "s1");
    const AccessibilitySurface parallel = build_surface(scen, base, "s1");
    REQUIRE(serial.n_cells() == parallel.n_cells());
    for (PersonCategory c : kPersonCategories)
        for (std::size_t cell = 0; cell < serial.n_cells(); ++cell) {
            CHECK(serial.raw(c, cell) == parallel.raw(c, cell));
            CHECK(serial.reference_raw(c, cell) == parallel.reference_raw(c, cell));
            CHECK(serial.scaling(c, cell) == parallel.scaling(c, cell));
        }
}

TEST_CASE("log likelihood and gradient: parallel within reduction tolerance") {
    const Fixture f;
    Dataset dataset;
    dataset.cells = f.region.cells;
    dataset.households = f.region.households;
    dataset.edges = f.region.edges;
    dataset.distances = f.distances;
    const auto observations =
        build_estimation_data(dataset, f.region.households, f.surface, f.policy, 50, 3);

    std::vector<double> params(kNumChoiceParams, 0.0);
    params[0] = 0.4;
    params[2] = 0.2;
    params[3 + choice_index("land_price_10k")] = -0.9;

    Vector grad_serial, grad_parallel;
    const double ll_serial = log_likelihood_serial(observations, params, &grad_serial);
    const double ll_parallel = log_likelihood(observations, params, &grad_parallel);
    CHECK(ll_parallel == doctest::Approx(ll_serial).epsilon(1e-10));
    for (std::size_t j = 0; j < grad_serial.size(); ++j)
        CHECK(grad_parallel[j] == doctest::Approx(grad_serial[j]).epsilon(1e-9));

    // Reduction is deterministic for a fixed thread count.
    Vector grad_again;
    const double ll_again = log_likelihood(observations, params, &grad_again);
    CHECK(ll_again == ll_parallel);
    for (std::size_t j = 0; j < grad_again.size(); ++j)
        CHECK(grad_again[j] == grad_parallel[j]);
}

TEST_CASE("estimation agrees across parallel and serial evaluation") {
    const Fixture f;
    Dataset dataset;
    dataset.cells = f.region.cells;
    dataset.households = f.region.households;
    dataset.edges = f.region.edges;
    dataset.distances = f.distances;
    const auto observations =
        build_estimation_data(dataset, f.region.households, f.surface, f.policy, 50, 3);

    EstimationOptions serial_options;
    serial_options.parallel = false;
    serial_options.drop_unidentified = true;
    EstimationOptions parallel_options = serial_options;
    parallel_options.parallel = true;
    const EstimationResult a = estimate_segment(observations, serial_options);
    const EstimationResult b = estimate_segment(observations, parallel_options);
    CHECK(a.converged);
    CHECK(b.converged);
    for (std::size_t j = 0; j < kNumChoiceParams; ++j)
        CHECK(b.parameters[j] == doctest::Approx(a.parameters[j]).epsilon(1e-6));
}

TEST_CASE("relocation outcomes: parallel equals serial exactly") {
    const Fixture f;
    const MovingRateTable rates = MovingRateTable::default_table();
    std::vector<SegmentCoefficients> coefficients;
    for (int k = 1; k <= kNumSegments; ++k) {
        SegmentCoefficients c;
        c.segment = k;
        c.alpha_worker = 0.4;
        c.beta[choice_index("land_price_10k")] = -0.8;
        coefficients.push_back(c);
    }
    RelocationInputs inputs;
    inputs.cells = f.region.cells;
    inputs.surface = &f.surface;
    inputs.segment_coefficients = coefficients;
    inputs.policy = &f.policy;
    inputs.rates = &rates;

    const SimulationRun serial =
        simulate_relocation_serial(f.region.households, inputs, 2024, 4);
    const SimulationRun parallel = simulate_relocation(f.region.households, inputs, 2024, 4);
    REQUIRE(serial.outcomes.size() == parallel.outcomes.size());
    for (std::size_t i = 0; i < serial.outcomes.size(); ++i) {
        CHECK(serial.outcomes[i].moved == parallel.outcomes[i].moved);
        CHECK(serial.outcomes[i].final_cell == parallel.outcomes[i].final_cell);
    }
}
