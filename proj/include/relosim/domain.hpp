#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "relosim/error.hpp"

namespace relosim {

using CellId = std::int32_t;
using HouseholdId = std::int64_t;

enum class City : std::uint8_t { Takasaki, Maebashi, Ota, Isesaki, Kiryu, Other };

const char* to_string(City city);
City city_from_string(const std::string& name);

enum class PersonCategory : std::uint8_t { Worker = 0, Student = 1, Unemployed = 2 };

inline constexpr std::array<PersonCategory, 3> kPersonCategories = {
    PersonCategory::Worker, PersonCategory::Student, PersonCategory::Unemployed};

const char* to_string(PersonCategory category);
PersonCategory person_category_from_string(const std::string& name);

// One 1 km^2 analysis zone.
struct MeshCell {
    CellId id = -1;
    double x = 0.0; // centroid, meters
    double y = 0.0;
    double land_price = 0.0;   // JPY per m^2
    double housing_stock = 0.0; // dwellings, >= 0
    double share_building = 0.0;
    double share_agricultural = 0.0;
    double share_freshwater = 0.0;
    double share_forest = 0.0;
    double share_industrial = 0.0;
    City city = City::Other;
    double employees_primary_secondary = 0.0; // thousands
    double employees_tertiary = 0.0;          // thousands
    bool in_daa = false;
    bool in_ufaa = false;
    double logsum_work = 0.0; // tour-based accessibility covariates
    double logsum_education = 0.0;
    double logsum_other = 0.0;
};

struct Household {
    HouseholdId id = -1;
    CellId home_cell = -1;
    int age_of_head = 0;
    int n_workers = 0;
    int n_students = 0;
    int n_unemployed = 0;
    int n_members = 1; // includes members under six, who carry no category
    int segment = 0;   // 1..5
};

int member_count(const Household& household, PersonCategory category);

// Market segment from the head's age and household size:
//   #1 age in (6,50]  and members >= 3      #2 age in (6,50]  and members <= 2
//   #3 age in (50,100] and members >= 3     #4 age in (50,65) and members <= 2
//   #5 age in [65,100] and members <= 2
// Throws DomainError outside age (6,100] or members < 1.
int assign_segment(int age_of_head, int n_members);

inline constexpr int kNumSegments = 5;

struct ScenarioSpec {
    std::string name = "base";
    double population_ratio = 0.8245;       // share of current households kept for the forecast year
    double vot_commute_multiplier = 1.0;    // value-of-time factor for work/education tours
    double vot_other_multiplier = 1.0;      // value-of-time factor for other tours
    double road_capacity_factor = 1.0;      // >= 1; travel times divide by it
    double policy1_subsidy_rate = 0.0;      // [0,1) applied to DAA land prices
    double policy2_ufaa_employee_boost = 0.0; // >= 0 boost to UFAA tertiary employees
    int n_monte_carlo_runs = 10;
    std::uint64_t seed = 0;
};

void validate_scenario(const ScenarioSpec& scenario);

struct MovingRateBand {
    int age_min = 0; // inclusive
    int age_max = 0; // inclusive
    double did_not_move_ratio = 0.0; // five-year ratio r in [0,1]
};

// Age bands of the household head mapped to the five-year did-not-move ratio.
// Bands must partition their covered range with no gaps or overlaps.
class MovingRateTable {
public:
    explicit MovingRateTable(std::vector<MovingRateBand> bands);

    double ratio_for_age(int age) const; // throws DomainError when uncovered
    const std::vector<MovingRateBand>& bands() const { return bands_; }

    // Built-in table; the youngest band always moves and the oldest band's
    // five-year ratio solves 1 - r^5 = 0.161.
    static MovingRateTable default_table();

private:
    std::vector<MovingRateBand> bands_;
};

struct NetworkEdge {
    CellId from = -1;
    CellId to = -1;
    double length_m = 0.0;
};

// Checks every MeshCell invariant (shares in [0,1] summing to <= 1, stock and
// price ranges, finite logsums); throws DataError naming the first offender.
void validate_cells(std::span<const MeshCell> cells);
void validate_households(std::span<const Household> households, std::span<const MeshCell> cells);

} // namespace relosim
