// Benchmark comparing the OpenMP kernels against their serial reference
// implementations on a larger-than-default synthetic instance.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "relosim/accessibility.hpp"
#include "relosim/choice.hpp"
#include "relosim/metrics.hpp"
#include "relosim/pipeline.hpp"
#include "relosim/simulate.hpp"
#include "relosim/synthetic.hpp"

using namespace relosim;

namespace {

double now_ms() {
    using clock = std::chrono::steady_clock;
    return std::chrono::duration<double, std::milli>(clock::now().time_since_epoch()).count();
}

template <typename F>
double time_ms(F&& f, int repeats = 3) {
    double best = 1e300;
    for (int r = 0; r < repeats; ++r) {
        const double t0 = now_ms();
        f();
        best = std::min(best, now_ms() - t0);
    }
    return best;
}

void report(const std::string& kernel, double serial_ms, double parallel_ms, double max_diff) {
    std::printf("%-28s %10.1f ms %10.1f ms %8.2fx   max|diff| %.3g\n", kernel.c_str(), serial_ms,
                parallel_ms, serial_ms / parallel_ms, max_diff);
}

} // namespace

int main() {
    int threads = 1;
#ifdef _OPENMP
    threads = omp_get_max_threads();
#endif
    std::printf("threads: %d\n", threads);

    SyntheticConfig synth;
    synth.n_cells = 900;
    synth.n_households = 20000;
    ProviderConfig provider;
    const Region region = generate_synthetic_region(synth, provider, 99);
    const DistanceOracle oracle = DistanceOracle::from_network(region.cells, region.edges);

    std::printf("%-28s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    // All-pairs shortest paths.
    std::vector<double> dist_serial, dist_parallel;
    const double sp_serial = time_ms([&] { dist_serial = oracle.all_pairs_serial(); }, 2);
    const double sp_parallel = time_ms([&] { dist_parallel = oracle.all_pairs(); }, 2);
    double dmax = 0.0;
    for (std::size_t i = 0; i < dist_serial.size(); ++i)
        dmax = std::max(dmax, std::abs(dist_serial[i] - dist_parallel[i]));
    report("all-pairs shortest paths", sp_serial, sp_parallel, dmax);

    // Accessibility surface build.
    const ScenarioSpec base_spec{};
    ScenarioSpec av_spec;
    av_spec.name = "s1";
    av_spec.vot_commute_multiplier = 0.75;
    av_spec.vot_other_multiplier = 0.85;
    av_spec.road_capacity_factor = 1.2;
    const SyntheticAccessibilityProvider base_provider(region.cells, dist_parallel, provider,
                                                       base_spec);
    const SyntheticAccessibilityProvider av_provider(region.cells, dist_parallel, provider,
                                                     av_spec);
    AccessibilitySurface surf_serial, surf_parallel;
    const double su_serial =
        time_ms([&] { surf_serial = build_surface_serial(av_provider, base_provider, "s1"); }, 2);
    const double su_parallel =
        time_ms([&] { surf_parallel = build_surface(av_provider, base_provider, "s1"); }, 2);
    double smax = 0.0;
    for (PersonCategory c : kPersonCategories)
        for (std::size_t i = 0; i < surf_serial.n_cells(); ++i)
            smax = std::max(smax, std::abs(surf_serial.raw(c, i) - surf_parallel.raw(c, i)));
    report("accessibility surface", su_serial, su_parallel, smax);

    // MNL log likelihood + gradient.
    ProjectConfig config = default_config();
    Dataset dataset;
    dataset.cells = region.cells;
    dataset.households.assign(region.households.begin(), region.households.begin() + 8000);
    dataset.edges = region.edges;
    dataset.oracle = DistanceOracle::from_network(region.cells, region.edges);
    dataset.distances = dist_parallel;
    const PolicyState policy = make_base_policy_state(region.cells);
    const AccessibilitySurface base_surface =
        build_surface(base_provider, base_provider, "base");
    const auto observations =
        build_estimation_data(dataset, dataset.households, base_surface, policy, 50, 7);
    std::vector<double> params(kNumChoiceParams, 0.0);
    params[0] = 0.3;
    params[3] = -0.8;
    Vector grad_serial, grad_parallel;
    double ll_serial = 0.0, ll_parallel = 0.0;
    const double ll_s =
        time_ms([&] { ll_serial = log_likelihood_serial(observations, params, &grad_serial); });
    const double ll_p =
        time_ms([&] { ll_parallel = log_likelihood(observations, params, &grad_parallel); });
    double gmax = std::abs(ll_serial - ll_parallel);
    for (std::size_t j = 0; j < grad_serial.size(); ++j)
        gmax = std::max(gmax, std::abs(grad_serial[j] - grad_parallel[j]));
    report("mnl log likelihood+grad", ll_s, ll_p, gmax);

    // Relocation Monte-Carlo pass.
    const auto coefficients = [&] {
        std::vector<SegmentCoefficients> cs;
        for (int k = 1; k <= kNumSegments; ++k) {
            SegmentCoefficients c;
            c.segment = k;
            c.alpha_worker = 0.5;
            c.alpha_unemployed = 0.3;
            c.beta[0] = -0.9;
            cs.push_back(c);
        }
        return cs;
    }();
    const MovingRateTable rates = MovingRateTable::default_table();
    RelocationInputs inputs;
    inputs.cells = region.cells;
    inputs.surface = &base_surface;
    inputs.segment_coefficients = coefficients;
    inputs.policy = &policy;
    inputs.rates = &rates;
    SimulationRun run_serial, run_parallel;
    const double rl_s = time_ms(
        [&] { run_serial = simulate_relocation_serial(dataset.households, inputs, 11, 0); }, 2);
    const double rl_p =
        time_ms([&] { run_parallel = simulate_relocation(dataset.households, inputs, 11, 0); }, 2);
    long mismatches = 0;
    for (std::size_t i = 0; i < run_serial.outcomes.size(); ++i)
        mismatches += run_serial.outcomes[i].final_cell != run_parallel.outcomes[i].final_cell;
    report("relocation pass", rl_s, rl_p, static_cast<double>(mismatches));

    return 0;
}
