#include <doctest.h>

#include <cmath>
#include <vector>

#include "relosim/accessibility.hpp"
#include "relosim/metrics.hpp"
#include "relosim/rng.hpp"
#include "relosim/synthetic.hpp"

using namespace relosim;

namespace {

// Direct-summation oracle, independent of the shifted implementation.
double naive_logsum(const std::vector<double>& utilities, double constant) {
    double sum = 0.0;
    for (double v : utilities)
        sum += std::exp(v);
    return std::log(sum) + constant;
}

// Provider whose pattern utilities drop by `slope` per minute, uniformly.
class LinearTimeProvider final : public AccessibilityProvider {
public:
    explicit LinearTimeProvider(double slope) : slope_(slope) {}
    std::vector<double> pattern_utilities(PersonCategory, std::size_t,
                                          double time_shift_min) const override {
        return {1.0 - slope_ * time_shift_min, 0.5 - slope_ * time_shift_min,
                -0.25 - slope_ * time_shift_min};
    }
    std::size_t n_cells() const override { return 1; }

private:
    double slope_;
};

Region small_region(unsigned seed = 5) {
    SyntheticConfig config;
    config.n_cells = 36;
    config.n_households = 200;
    return generate_synthetic_region(config, ProviderConfig{}, seed);
}

} // namespace

TEST_CASE("aba_logsum examples and errors") {
    const std::vector<double> zero{0.0};
    CHECK(aba_logsum(zero, 0.0) == doctest::Approx(0.0));

    Rng rng(42);
    for (int i = 0; i < 20; ++i) {
        const double u = 10.0 * (rng.next_double() - 0.5);
        const std::vector<double> pair{u, u};
        CHECK(aba_logsum(pair, 0.0) == doctest::Approx(u + std::log(2.0)).epsilon(1e-12));
    }

    const std::vector<double> three{1.0, 2.0, 3.0};
    CHECK(aba_logsum(three, 0.0) == doctest::Approx(3.40760).epsilon(1e-5));
    CHECK(aba_logsum(three, 0.0) == doctest::Approx(naive_logsum(three, 0.0)).epsilon(1e-12));

    CHECK_THROWS_AS(aba_logsum(std::vector<double>{}, 0.0), DomainError);
    CHECK_THROWS_AS(aba_logsum(std::vector<double>{std::nan("")}, 0.0), DomainError);

    // Overflow safety where the naive oracle would saturate.
    const std::vector<double> large{800.0, 801.0};
    CHECK(std::isfinite(aba_logsum(large, 0.0)));
    CHECK(aba_logsum(large, 0.0) == doctest::Approx(801.0 + std::log(1.0 + std::exp(-1.0))));
}

TEST_CASE("aba_logsum properties: translation and max bound") {
    Rng rng(7);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<double> utilities;
        const int n = 1 + static_cast<int>(rng.next_below(8));
        double vmax = -1e300;
        for (int i = 0; i < n; ++i) {
            utilities.push_back(4.0 * (rng.next_double() - 0.5));
            vmax = std::max(vmax, utilities.back());
        }
        const double constant = 2.0 * (rng.next_double() - 0.5);
        const double k = 6.0 * (rng.next_double() - 0.5);
        const double base = aba_logsum(utilities, constant);
        CHECK(base >= vmax + constant);
        std::vector<double> shifted = utilities;
        for (double& v : shifted)
            v += k;
        CHECK(aba_logsum(shifted, constant) == doctest::Approx(base + k).epsilon(1e-12));
    }
}

TEST_CASE("scaling factor from a uniformly shifting provider") {
    const LinearTimeProvider provider(0.05);
    const ScalingFactor s = compute_scaling_factor(provider, PersonCategory::Worker, 0, 1.0);
    CHECK(s.value == doctest::Approx(-0.05).epsilon(1e-12));

    const LinearTimeProvider flat(0.0);
    CHECK_THROWS_AS(compute_scaling_factor(flat, PersonCategory::Worker, 0, 1.0), NumericError);
    CHECK_THROWS_AS(compute_scaling_factor(provider, PersonCategory::Worker, 0, 0.0), DomainError);
}

TEST_CASE("scaling factor equals an independent finite difference") {
    const Region region = small_region();
    const DistanceOracle oracle = DistanceOracle::from_network(region.cells, region.edges);
    const auto distances = oracle.all_pairs();
    const ProviderConfig config;
    const ScenarioSpec base_spec{};
    const SyntheticAccessibilityProvider provider(region.cells, distances, config, base_spec);

    const std::size_t center = region.cells.size() / 2;
    for (PersonCategory category : kPersonCategories) {
        const ScalingFactor s = compute_scaling_factor(provider, category, center, 1.0);
        const double a0 = naive_logsum(provider.pattern_utilities(category, center, 0.0), 0.0);
        const double a1 = naive_logsum(provider.pattern_utilities(category, center, 1.0), 0.0);
        CHECK(s.value == doctest::Approx(a1 - a0).epsilon(1e-9));
        CHECK(s.value < 0.0); // added travel time always hurts
    }
}

TEST_CASE("normalize_aba arithmetic and constant invariance") {
    ScalingFactor s;
    s.value = -0.05;
    CHECK(normalize_aba(-10.0, -12.0, s) == doctest::Approx(40.0));
    CHECK(normalize_aba(-12.0, -10.0, s) == doctest::Approx(-40.0));
    CHECK(normalize_aba(-7.5, -7.5, s) == doctest::Approx(0.0));

    // Adding the same constant to both ABAs and to both logsums inside the
    // scaling factor leaves the normalized value unchanged.
    Rng rng(11);
    for (int rep = 0; rep < 30; ++rep) {
        const double a = rng.next_double() * 10 - 5;
        const double a0 = rng.next_double() * 10 - 5;
        const double l0 = rng.next_double() * 10 - 5;
        const double l1 = l0 - (0.01 + rng.next_double()); // time hurts
        const double c = rng.next_double() * 8 - 4;
        ScalingFactor plain{PersonCategory::Worker, l1 - l0, 1.0};
        ScalingFactor shifted{PersonCategory::Worker, (l1 + c) - (l0 + c), 1.0};
        CHECK(normalize_aba(a, a0, plain) ==
              doctest::Approx(normalize_aba(a + c, a0 + c, shifted)).epsilon(1e-9));
    }
}

TEST_CASE("household averages: absent categories and member means") {
    CHECK(member_mean(std::vector<double>{3.0, 5.0}) == doctest::Approx(4.0));
    CHECK_THROWS_AS(member_mean(std::vector<double>{}), DomainError);

    // Permutation invariance of the member mean.
    const std::vector<double> forward{1.0, 2.5, -3.0, 7.25};
    const std::vector<double> backward{7.25, -3.0, 2.5, 1.0};
    CHECK(member_mean(forward) == doctest::Approx(member_mean(backward)).epsilon(1e-15));

    AccessibilitySurface surface("base", 2);
    for (PersonCategory c : kPersonCategories) {
        surface.set(c, 0, -10.0, -10.0, -0.05);
        surface.set(c, 1, -9.5, -10.2, -0.05);
    }
    Household household;
    household.home_cell = 0;
    household.n_workers = 2;
    household.n_students = 0;
    household.n_unemployed = 1;

    const CategoryAverages at1 = household_average_aba(surface, household, 1);
    CHECK(at1.worker.has_value());
    CHECK(!at1.student.has_value()); // no members, term excluded
    CHECK(at1.unemployed.has_value());
    CHECK(*at1.worker == doctest::Approx((-9.5 - (-10.0)) / 0.05));

    const CategoryAverages at_home = household_average_aba(surface, household, 0);
    CHECK(*at_home.worker == doctest::Approx(0.0));

    CHECK_THROWS_AS(household_average_aba(surface, household, 5), DataError);
}

TEST_CASE("synthetic provider: identical scenario normalizes to zero") {
    const Region region = small_region();
    const DistanceOracle oracle = DistanceOracle::from_network(region.cells, region.edges);
    const auto distances = oracle.all_pairs();
    const ProviderConfig config;
    const ScenarioSpec base_spec{};
    const SyntheticAccessibilityProvider base(region.cells, distances, config, base_spec);
    const AccessibilitySurface surface = build_surface(base, base, "base");
    for (PersonCategory c : kPersonCategories)
        for (std::size_t cell = 0; cell < surface.n_cells(); ++cell) {
            CHECK(surface.normalized(c, cell) == doctest::Approx(0.0));
            CHECK(std::isfinite(surface.raw(c, cell)));
        }
}

TEST_CASE("synthetic provider: lower VoT weakly raises ABA everywhere") {
    const Region region = small_region();
    const DistanceOracle oracle = DistanceOracle::from_network(region.cells, region.edges);
    const auto distances = oracle.all_pairs();
    const ProviderConfig config;
    const ScenarioSpec base_spec{};
    ScenarioSpec av = base_spec;
    av.name = "av";
    av.vot_commute_multiplier = 0.75;

    const SyntheticAccessibilityProvider base(region.cells, distances, config, base_spec);
    const SyntheticAccessibilityProvider lowered(region.cells, distances, config, av);
    for (std::size_t cell = 0; cell < region.cells.size(); ++cell) {
        // Every commute pattern's utility weakly increases, so the logsum may not fall.
        const double before = aba_logsum(base.pattern_utilities(PersonCategory::Worker, cell, 0), 0);
        const double after =
            aba_logsum(lowered.pattern_utilities(PersonCategory::Worker, cell, 0), 0);
        CHECK(after >= before - 1e-12);
    }

    ScenarioSpec capacity = base_spec;
    capacity.name = "cap";
    capacity.road_capacity_factor = 1.2;
    const SyntheticAccessibilityProvider faster(region.cells, distances, config, capacity);
    for (PersonCategory c : kPersonCategories)
        for (std::size_t cell = 0; cell < region.cells.size(); ++cell) {
            const double before = aba_logsum(base.pattern_utilities(c, cell, 0), 0);
            const double after = aba_logsum(faster.pattern_utilities(c, cell, 0), 0);
            CHECK(after >= before - 1e-12);
        }
}

TEST_CASE("tour logsum anchors") {
    // Single cell, one thousand employees, zero self travel time.
    std::vector<MeshCell> one(1);
    one[0].id = 0;
    one[0].employees_tertiary = 1.0;
    const std::vector<double> zero_dist{0.0};
    const ProviderConfig config;
    const auto single = tour_logsum(one, zero_dist, TourPurpose::Other, config);
    CHECK(single[0] == doctest::Approx(0.0));

    // Two cells with hand-evaluated sums.
    std::vector<MeshCell> two(2);
    two[0].id = 0;
    two[1].id = 1;
    two[0].employees_tertiary = 2.0;
    two[1].employees_tertiary = 3.0;
    const std::vector<double> dist{0.0, 4000.0, 4000.0, 0.0};
    const auto pair = tour_logsum(two, dist, TourPurpose::Other, config);
    const double tt = 4000.0 / config.speed_m_per_min;
    const double expected0 = std::log(2.0 + 3.0 * std::exp(-config.theta_other * tt));
    const double expected1 = std::log(3.0 + 2.0 * std::exp(-config.theta_other * tt));
    CHECK(pair[0] == doctest::Approx(expected0).epsilon(1e-12));
    CHECK(pair[1] == doctest::Approx(expected1).epsilon(1e-12));

    // Doubling every destination shifts each origin by exactly ln 2.
    std::vector<MeshCell> doubled = two;
    doubled[0].employees_tertiary *= 2.0;
    doubled[1].employees_tertiary *= 2.0;
    const auto scaled = tour_logsum(doubled, dist, TourPurpose::Other, config);
    CHECK(scaled[0] == doctest::Approx(pair[0] + std::log(2.0)).epsilon(1e-12));
    CHECK(scaled[1] == doctest::Approx(pair[1] + std::log(2.0)).epsilon(1e-12));

    // No reachable employment anywhere is a guarded error.
    std::vector<MeshCell> empty = two;
    empty[0].employees_tertiary = 0.0;
    empty[1].employees_tertiary = 0.0;
    CHECK_THROWS_AS(tour_logsum(empty, dist, TourPurpose::Other, config), NumericError);
}

TEST_CASE("pattern sets expose the provider's utilities") {
    const Region region = small_region();
    const DistanceOracle oracle = DistanceOracle::from_network(region.cells, region.edges);
    const auto distances = oracle.all_pairs();
    const SyntheticAccessibilityProvider provider(region.cells, distances, ProviderConfig{},
                                                  ScenarioSpec{});
    const PatternUtilitySet set = pattern_set(provider, PersonCategory::Student, 3);
    CHECK(set.person_category == PersonCategory::Student);
    CHECK(set.cell == 3);
    CHECK(!set.utilities.empty());
    for (double v : set.utilities)
        CHECK(std::isfinite(v));
    CHECK(aba_logsum(set.utilities, 0.0) ==
          doctest::Approx(provider_aba(provider, PersonCategory::Student, 3)).epsilon(1e-15));
    // Unemployed members carry a single tour purpose, so their pattern count
    // is half a worker's on the same cell pool.
    const PatternUtilitySet worker = pattern_set(provider, PersonCategory::Worker, 3);
    const PatternUtilitySet unemployed = pattern_set(provider, PersonCategory::Unemployed, 3);
    CHECK(worker.utilities.size() == 2 * unemployed.utilities.size());
}

TEST_CASE("surface home-referenced normalization arithmetic") {
    AccessibilitySurface surface("s1", 3);
    surface.set(PersonCategory::Worker, 0, -10.0, -11.0, -0.05);
    surface.set(PersonCategory::Worker, 1, -9.0, -10.0, -0.04);
    surface.set(PersonCategory::Worker, 2, -8.0, -9.0, -0.08);
    // Candidate 1 viewed from home 2: (raw(1) - ref(2)) / |s(2)|.
    CHECK(surface.normalized_for_home(PersonCategory::Worker, 1, 2) ==
          doctest::Approx((-9.0 - (-9.0)) / 0.08));
    CHECK(surface.normalized_for_home(PersonCategory::Worker, 0, 1) ==
          doctest::Approx((-10.0 - (-10.0)) / 0.04));
    CHECK(surface.normalized(PersonCategory::Worker, 0) ==
          doctest::Approx((-10.0 + 11.0) / 0.05));
}
