#include "relosim/domain.hpp"

#include <algorithm>
#include <cmath>

namespace relosim {

const char* to_string(City city) {
    switch (city) {
    case City::Takasaki: return "takasaki";
    case City::Maebashi: return "maebashi";
    case City::Ota: return "ota";
    case City::Isesaki: return "isesaki";
    case City::Kiryu: return "kiryu";
    case City::Other: return "other";
    }
    return "other";
}

City city_from_string(const std::string& name) {
    if (name == "takasaki") return City::Takasaki;
    if (name == "maebashi") return City::Maebashi;
    if (name == "ota") return City::Ota;
    if (name == "isesaki") return City::Isesaki;
    if (name == "kiryu") return City::Kiryu;
    if (name == "other") return City::Other;
    throw DataError("unknown city '" + name + "'");
}

const char* to_string(PersonCategory category) {
    switch (category) {
    case PersonCategory::Worker: return "worker";
    case PersonCategory::Student: return "student";
    case PersonCategory::Unemployed: return "unemployed";
    }
    return "worker";
}

PersonCategory person_category_from_string(const std::string& name) {
    if (name == "worker") return PersonCategory::Worker;
    if (name == "student") return PersonCategory::Student;
    if (name == "unemployed") return PersonCategory::Unemployed;
    throw DataError("unknown person category '" + name + "'");
}

int member_count(const Household& household, PersonCategory category) {
    switch (category) {
    case PersonCategory::Worker: return household.n_workers;
    case PersonCategory::Student: return household.n_students;
    case PersonCategory::Unemployed: return household.n_unemployed;
    }
    return 0;
}

int assign_segment(int age_of_head, int n_members) {
    if (age_of_head <= 6 || age_of_head > 100)
        throw DomainError("assign_segment: age of head " + std::to_string(age_of_head) +
                          " outside (6,100]");
    if (n_members < 1)
        throw DomainError("assign_segment: household must have at least one member");

    const bool large = n_members >= 3;
    if (age_of_head <= 50)
        return large ? 1 : 2;
    if (large)
        return 3;
    return age_of_head < 65 ? 4 : 5;
}

void validate_scenario(const ScenarioSpec& scenario) {
    if (!(scenario.population_ratio > 0.0 && scenario.population_ratio <= 1.0))
        throw ConfigError("scenario '" + scenario.name + "': population_ratio must be in (0,1]");
    if (!(scenario.vot_commute_multiplier > 0.0 && scenario.vot_commute_multiplier <= 1.0))
        throw ConfigError("scenario '" + scenario.name + "': vot_commute_multiplier must be in (0,1]");
    if (!(scenario.vot_other_multiplier > 0.0 && scenario.vot_other_multiplier <= 1.0))
        throw ConfigError("scenario '" + scenario.name + "': vot_other_multiplier must be in (0,1]");
    if (!(scenario.road_capacity_factor >= 1.0))
        throw ConfigError("scenario '" + scenario.name + "': road_capacity_factor must be >= 1");
    if (!(scenario.policy1_subsidy_rate >= 0.0 && scenario.policy1_subsidy_rate < 1.0))
        throw ConfigError("scenario '" + scenario.name + "': policy1_subsidy_rate must be in [0,1)");
    if (!(scenario.policy2_ufaa_employee_boost >= 0.0))
        throw ConfigError("scenario '" + scenario.name + "': policy2_ufaa_employee_boost must be >= 0");
    if (scenario.n_monte_carlo_runs < 1)
        throw ConfigError("scenario '" + scenario.name + "': n_monte_carlo_runs must be >= 1");
}

MovingRateTable::MovingRateTable(std::vector<MovingRateBand> bands) : bands_(std::move(bands)) {
    if (bands_.empty())
        throw DataError("moving-rate table has no bands");
    std::sort(bands_.begin(), bands_.end(),
              [](const MovingRateBand& a, const MovingRateBand& b) { return a.age_min < b.age_min; });
    for (std::size_t i = 0; i < bands_.size(); ++i) {
        const auto& band = bands_[i];
        if (band.age_min > band.age_max)
            throw DataError("moving-rate band with age_min > age_max");
        if (!(band.did_not_move_ratio >= 0.0 && band.did_not_move_ratio <= 1.0))
            throw DataError("moving-rate ratio outside [0,1] for ages " +
                            std::to_string(band.age_min) + "-" + std::to_string(band.age_max));
        if (i > 0 && band.age_min != bands_[i - 1].age_max + 1)
            throw DataError("moving-rate bands must partition the age range (gap or overlap at age " +
                            std::to_string(band.age_min) + ")");
    }
}

double MovingRateTable::ratio_for_age(int age) const {
    for (const auto& band : bands_)
        if (age >= band.age_min && age <= band.age_max)
            return band.did_not_move_ratio;
    throw DomainError("moving-rate table does not cover age " + std::to_string(age));
}

MovingRateTable MovingRateTable::default_table() {
    // Oldest band: five-year did-not-move ratio solving 1 - r^5 = 0.161.
    const double oldest = std::pow(0.839, 0.2);
    return MovingRateTable({
        {7, 29, 0.0},
        {30, 39, 0.55},
        {40, 49, 0.70},
        {50, 59, 0.80},
        {60, 69, 0.88},
        {70, 84, 0.93},
        {85, 100, oldest},
    });
}

void validate_cells(std::span<const MeshCell> cells) {
    if (cells.empty())
        throw DataError("cell table is empty");
    for (const auto& cell : cells) {
        const std::string tag = "cell " + std::to_string(cell.id);
        const double shares[] = {cell.share_building, cell.share_agricultural,
                                 cell.share_freshwater, cell.share_forest, cell.share_industrial};
        double sum = 0.0;
        for (double s : shares) {
            if (!(s >= 0.0 && s <= 1.0))
                throw DataError(tag + ": land-use share outside [0,1]");
            sum += s;
        }
        if (sum > 1.0 + 1e-9)
            throw DataError(tag + ": land-use shares sum to " + std::to_string(sum) + " > 1");
        if (cell.housing_stock < 0.0)
            throw DataError(tag + ": negative housing stock");
        if (cell.housing_stock > 0.0 && !(cell.land_price > 0.0))
            throw DataError(tag + ": residence candidate must have a positive land price");
        if (!std::isfinite(cell.logsum_work) || !std::isfinite(cell.logsum_education) ||
            !std::isfinite(cell.logsum_other))
            throw DataError(tag + ": non-finite tour logsum");
        if (cell.employees_primary_secondary < 0.0 || cell.employees_tertiary < 0.0)
            throw DataError(tag + ": negative employee count");
    }
}

void validate_households(std::span<const Household> households, std::span<const MeshCell> cells) {
    std::vector<char> present;
    CellId max_id = -1;
    for (const auto& cell : cells)
        max_id = std::max(max_id, cell.id);
    present.assign(static_cast<std::size_t>(max_id) + 1, 0);
    for (const auto& cell : cells)
        present[static_cast<std::size_t>(cell.id)] = 1;

    for (const auto& household : households) {
        const std::string tag = "household " + std::to_string(household.id);
        if (household.home_cell < 0 || household.home_cell > max_id ||
            !present[static_cast<std::size_t>(household.home_cell)])
            throw DataError(tag + ": home cell " + std::to_string(household.home_cell) +
                            " not in the cell table");
        if (household.n_members < 1)
            throw DataError(tag + ": must have at least one member");
        if (household.n_workers < 0 || household.n_students < 0 || household.n_unemployed < 0)
            throw DataError(tag + ": negative person-category count");
        if (household.segment != assign_segment(household.age_of_head, household.n_members))
            throw DataError(tag + ": segment inconsistent with age/member rule");
    }
}

} // namespace relosim
