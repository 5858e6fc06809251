#include <doctest.h>

#include <cmath>
#include <set>

#include "relosim/domain.hpp"
#include "relosim/synthetic.hpp"

using namespace relosim;

TEST_CASE("segment assignment examples") {
    CHECK(assign_segment(40, 4) == 1);
    CHECK(assign_segment(70, 1) == 5);
    CHECK(assign_segment(50, 2) == 2); // 50 still falls in the younger bracket
    CHECK(assign_segment(50, 3) == 1);
    CHECK(assign_segment(51, 3) == 3);
    CHECK(assign_segment(64, 2) == 4);
    CHECK(assign_segment(65, 2) == 5);
    CHECK(assign_segment(7, 1) == 2);
    CHECK(assign_segment(100, 6) == 3);
}

TEST_CASE("segment assignment domain errors") {
    CHECK_THROWS_AS(assign_segment(6, 2), DomainError);
    CHECK_THROWS_AS(assign_segment(101, 2), DomainError);
    CHECK_THROWS_AS(assign_segment(40, 0), DomainError);
}

TEST_CASE("segmentation partitions the whole domain") {
    // Independent restatement of the five defining predicates.
    const auto expected = [](int age, int members) {
        const bool young = age > 6 && age <= 50;
        const bool old = age > 50 && age <= 100;
        const bool large = members >= 3;
        if (young && large) return 1;
        if (young && !large) return 2;
        if (old && large) return 3;
        if (age > 50 && age < 65 && !large) return 4;
        if (age >= 65 && age <= 100 && !large) return 5;
        return 0;
    };
    for (int age = 7; age <= 100; ++age)
        for (int members = 1; members <= 10; ++members) {
            const int segment = assign_segment(age, members);
            CHECK(segment >= 1);
            CHECK(segment <= 5);
            CHECK(segment == expected(age, members));
        }
}

TEST_CASE("moving rate table validates bands") {
    CHECK_THROWS_AS(MovingRateTable({}), DataError);
    CHECK_THROWS_AS(MovingRateTable({{10, 20, 0.5}, {22, 30, 0.5}}), DataError); // gap
    CHECK_THROWS_AS(MovingRateTable({{10, 20, 0.5}, {19, 30, 0.5}}), DataError); // overlap
    CHECK_THROWS_AS(MovingRateTable({{10, 20, 1.5}}), DataError);                // ratio range

    const MovingRateTable table = MovingRateTable::default_table();
    CHECK(table.ratio_for_age(7) == 0.0);
    CHECK(table.ratio_for_age(100) == doctest::Approx(std::pow(0.839, 0.2)));
    CHECK_THROWS_AS(table.ratio_for_age(101), DomainError);
    CHECK_THROWS_AS(table.ratio_for_age(5), DomainError);
}

TEST_CASE("scenario validation") {
    ScenarioSpec scenario;
    CHECK_NOTHROW(validate_scenario(scenario));
    CHECK(scenario.vot_commute_multiplier == 1.0);
    CHECK(scenario.policy1_subsidy_rate == 0.0);
    CHECK(scenario.policy2_ufaa_employee_boost == 0.0);
    scenario.population_ratio = 0.0;
    CHECK_THROWS_AS(validate_scenario(scenario), ConfigError);
    scenario.population_ratio = 0.8;
    scenario.road_capacity_factor = 0.9;
    CHECK_THROWS_AS(validate_scenario(scenario), ConfigError);
}

namespace {

bool cells_equal(const MeshCell& a, const MeshCell& b) {
    return a.id == b.id && a.x == b.x && a.y == b.y && a.land_price == b.land_price &&
           a.housing_stock == b.housing_stock && a.share_building == b.share_building &&
           a.share_agricultural == b.share_agricultural &&
           a.share_freshwater == b.share_freshwater && a.share_forest == b.share_forest &&
           a.share_industrial == b.share_industrial && a.city == b.city &&
           a.employees_primary_secondary == b.employees_primary_secondary &&
           a.employees_tertiary == b.employees_tertiary && a.in_daa == b.in_daa &&
           a.in_ufaa == b.in_ufaa && a.logsum_work == b.logsum_work &&
           a.logsum_education == b.logsum_education && a.logsum_other == b.logsum_other;
}

} // namespace

TEST_CASE("synthetic generator is deterministic") {
    SyntheticConfig config;
    config.n_cells = 100;
    config.n_households = 5000;
    const ProviderConfig provider;
    const Region a = generate_synthetic_region(config, provider, 1);
    const Region b = generate_synthetic_region(config, provider, 1);
    REQUIRE(a.cells.size() == b.cells.size());
    REQUIRE(a.households.size() == b.households.size());
    REQUIRE(a.edges.size() == b.edges.size());
    for (std::size_t i = 0; i < a.cells.size(); ++i)
        CHECK(cells_equal(a.cells[i], b.cells[i]));
    for (std::size_t i = 0; i < a.households.size(); ++i) {
        CHECK(a.households[i].home_cell == b.households[i].home_cell);
        CHECK(a.households[i].age_of_head == b.households[i].age_of_head);
        CHECK(a.households[i].n_members == b.households[i].n_members);
        CHECK(a.households[i].segment == b.households[i].segment);
    }

    const Region c = generate_synthetic_region(config, provider, 2);
    bool any_difference = false;
    for (std::size_t i = 0; i < a.cells.size() && !any_difference; ++i)
        any_difference = !cells_equal(a.cells[i], c.cells[i]);
    CHECK(any_difference);
}

TEST_CASE("synthetic generator referential integrity and stock coverage") {
    SyntheticConfig tiny;
    tiny.n_cells = 4;
    tiny.n_households = 1;
    const ProviderConfig provider;
    const Region small = generate_synthetic_region(tiny, provider, 7);
    REQUIRE(small.households.size() == 1);
    std::set<CellId> ids;
    for (const auto& cell : small.cells)
        ids.insert(cell.id);
    CHECK(ids.count(small.households.front().home_cell) == 1);

    SyntheticConfig config;
    config.n_cells = 100;
    config.n_households = 5000;
    const Region region = generate_synthetic_region(config, provider, 1);
    double stock = 0.0;
    for (const auto& cell : region.cells)
        stock += cell.housing_stock;
    CHECK(stock >= static_cast<double>(config.n_households));

    // Invariants hold for every generated record.
    CHECK_NOTHROW(validate_cells(region.cells));
    CHECK_NOTHROW(validate_households(region.households, region.cells));

    bool has_daa = false, has_ufaa = false;
    for (const auto& cell : region.cells) {
        has_daa = has_daa || cell.in_daa;
        has_ufaa = has_ufaa || cell.in_ufaa;
        if (cell.in_ufaa)
            CHECK(cell.in_daa); // the cluster nests
    }
    CHECK(has_daa);
    CHECK(has_ufaa);
}

TEST_CASE("synthetic generator preconditions") {
    const ProviderConfig provider;
    SyntheticConfig bad;
    bad.n_cells = 3;
    CHECK_THROWS_AS(generate_synthetic_region(bad, provider, 1), DomainError);
    bad.n_cells = 4;
    bad.n_households = 0;
    CHECK_THROWS_AS(generate_synthetic_region(bad, provider, 1), DomainError);
}

TEST_CASE("validators name offenders") {
    SyntheticConfig config;
    config.n_cells = 9;
    config.n_households = 10;
    const ProviderConfig provider;
    Region region = generate_synthetic_region(config, provider, 3);
    region.cells[4].share_building = 0.9;
    region.cells[4].share_agricultural = 0.9;
    CHECK_THROWS_AS(validate_cells(region.cells), DataError);

    Region broken = generate_synthetic_region(config, provider, 3);
    broken.households[0].home_cell = 999;
    CHECK_THROWS_AS(validate_households(broken.households, broken.cells), DataError);
}
