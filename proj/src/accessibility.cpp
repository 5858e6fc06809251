#include "relosim/accessibility.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace relosim {

double aba_logsum(std::span<const double> utilities, double constant) {
    if (utilities.empty())
        throw DomainError("aba_logsum: empty pattern utility set");
    double vmax = -std::numeric_limits<double>::infinity();
    for (double v : utilities) {
        if (std::isnan(v))
            throw DomainError("aba_logsum: non-finite pattern utility");
        vmax = std::max(vmax, v);
    }
    if (!std::isfinite(vmax))
        throw DomainError("aba_logsum: non-finite pattern utility");
    double sum = 0.0;
    for (double v : utilities)
        sum += std::exp(v - vmax);
    return vmax + std::log(sum) + constant;
}

PatternUtilitySet pattern_set(const AccessibilityProvider& provider, PersonCategory category,
                              std::size_t cell, double time_shift_min) {
    PatternUtilitySet set;
    set.person_category = category;
    set.cell = static_cast<CellId>(cell);
    set.utilities = provider.pattern_utilities(category, cell, time_shift_min);
    return set;
}

double provider_aba(const AccessibilityProvider& provider, PersonCategory category,
                    std::size_t cell, double time_shift_min) {
    return aba_logsum(provider.pattern_utilities(category, cell, time_shift_min),
                      provider.constant());
}

ScalingFactor compute_scaling_factor(const AccessibilityProvider& provider,
                                     PersonCategory category, std::size_t reference_cell,
                                     double delta_t, double epsilon) {
    if (!(delta_t > 0.0))
        throw DomainError("scaling factor: delta_t must be positive");
    const double base = provider_aba(provider, category, reference_cell, 0.0);
    const double shifted = provider_aba(provider, category, reference_cell, delta_t);
    ScalingFactor s;
    s.person_category = category;
    s.delta_t = delta_t;
    s.value = (shifted - base) / delta_t;
    if (std::abs(s.value) < epsilon)
        throw NumericError("degenerate scaling factor: provider is insensitive to travel time");
    return s;
}

double normalize_aba(double aba, double aba_original, const ScalingFactor& s) {
    return (aba - aba_original) / std::abs(s.value);
}

double member_mean(std::span<const double> member_values) {
    if (member_values.empty())
        throw DomainError("member_mean: no members");
    double sum = 0.0;
    for (double v : member_values)
        sum += v;
    return sum / static_cast<double>(member_values.size());
}

AccessibilitySurface::AccessibilitySurface(std::string scenario_name, std::size_t n_cells)
    : scenario_(std::move(scenario_name)), n_cells_(n_cells) {
    raw_.assign(3 * n_cells_, 0.0);
    ref_.assign(3 * n_cells_, 0.0);
    scale_.assign(3 * n_cells_, 0.0);
}

double AccessibilitySurface::normalized(PersonCategory c, std::size_t cell) const {
    const std::size_t i = idx(c, cell);
    return (raw_[i] - ref_[i]) / std::abs(scale_[i]);
}

double AccessibilitySurface::normalized_for_home(PersonCategory c, std::size_t candidate_cell,
                                                 std::size_t home_cell) const {
    return (raw_[idx(c, candidate_cell)] - ref_[idx(c, home_cell)]) /
           std::abs(scale_[idx(c, home_cell)]);
}

void AccessibilitySurface::set(PersonCategory c, std::size_t cell, double raw, double reference,
                               double scaling) {
    const std::size_t i = idx(c, cell);
    raw_[i] = raw;
    ref_[i] = reference;
    scale_[i] = scaling;
}

CategoryAverages household_average_aba(const AccessibilitySurface& surface,
                                       const Household& household, std::size_t candidate_cell) {
    const auto home = static_cast<std::size_t>(household.home_cell);
    if (candidate_cell >= surface.n_cells() || home >= surface.n_cells())
        throw DataError("household_average_aba: surface does not cover cell " +
                        std::to_string(candidate_cell >= surface.n_cells()
                                           ? static_cast<long>(candidate_cell)
                                           : static_cast<long>(home)));
    CategoryAverages averages;
    for (PersonCategory category : kPersonCategories) {
        const int count = member_count(household, category);
        if (count <= 0)
            continue; // category term excluded entirely
        // Prototype members of a category share the surface value, so the
        // member mean collapses to a lookup.
        averages[category] = surface.normalized_for_home(category, candidate_cell, home);
    }
    return averages;
}

double attraction_of(const MeshCell& cell, AttractionKind kind) {
    switch (kind) {
    case AttractionKind::Tertiary: return cell.employees_tertiary;
    case AttractionKind::PrimarySecondary: return cell.employees_primary_secondary;
    case AttractionKind::AllEmployees:
        return cell.employees_tertiary + cell.employees_primary_secondary;
    }
    return 0.0;
}

AttractionKind attraction_of_purpose(const ProviderConfig& config, TourPurpose purpose) {
    switch (purpose) {
    case TourPurpose::Work: return config.attraction_work;
    case TourPurpose::Education: return config.attraction_education;
    case TourPurpose::Other: return config.attraction_other;
    }
    return AttractionKind::Tertiary;
}

namespace {

double purpose_attraction(const MeshCell& cell, AttractionKind kind,
                          std::span<const double> tertiary_override,
                          std::span<const double> ps_override, std::size_t index) {
    const double tertiary =
        tertiary_override.empty() ? cell.employees_tertiary : tertiary_override[index];
    const double ps = ps_override.empty() ? cell.employees_primary_secondary : ps_override[index];
    switch (kind) {
    case AttractionKind::Tertiary: return tertiary;
    case AttractionKind::PrimarySecondary: return ps;
    case AttractionKind::AllEmployees: return tertiary + ps;
    }
    return 0.0;
}

constexpr TourPurpose kCategoryTours[3][2] = {
    {TourPurpose::Work, TourPurpose::Other},      // Worker
    {TourPurpose::Education, TourPurpose::Other}, // Student
    {TourPurpose::Other, TourPurpose::Other},     // Unemployed (single purpose)
};

int tours_for_category(PersonCategory c) { return c == PersonCategory::Unemployed ? 1 : 2; }

} // namespace

SyntheticAccessibilityProvider::SyntheticAccessibilityProvider(
    std::span<const MeshCell> cells, std::span<const double> distance_matrix,
    const ProviderConfig& config, const ScenarioSpec& scenario,
    std::span<const double> tertiary_override, std::span<const double> primary_secondary_override)
    : n_(cells.size()), config_(config), vot_commute_(scenario.vot_commute_multiplier),
      vot_other_(scenario.vot_other_multiplier), capacity_factor_(scenario.road_capacity_factor),
      distances_(distance_matrix) {
    if (distance_matrix.size() != n_ * n_)
        throw ContractError("provider: distance matrix size does not match cell count");
    if (!(config_.speed_m_per_min > 0.0))
        throw ConfigError("provider: speed must be positive");
    for (int p = 0; p < 3; ++p) {
        const auto purpose = static_cast<TourPurpose>(p);
        const AttractionKind kind = attraction_of_purpose(config_, purpose);
        attraction_[p].resize(n_);
        log_attraction_[p].resize(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const double a = purpose_attraction(cells[i], kind, tertiary_override,
                                                primary_secondary_override, i);
            attraction_[p][i] = a;
            log_attraction_[p][i] = a > 0.0 ? std::log(a) : 0.0;
        }
    }
}

double SyntheticAccessibilityProvider::travel_time_min(std::size_t origin,
                                                       std::size_t destination) const {
    return distances_[origin * n_ + destination] / (config_.speed_m_per_min * capacity_factor_);
}

double SyntheticAccessibilityProvider::vot_multiplier(TourPurpose purpose) const {
    return purpose == TourPurpose::Other ? vot_other_ : vot_commute_;
}

std::vector<double> SyntheticAccessibilityProvider::pattern_utilities(
    PersonCategory category, std::size_t cell, double time_shift_min) const {
    if (cell >= n_)
        throw ContractError("provider: cell out of range");
    std::vector<double> utilities;
    const int n_tours = tours_for_category(category);
    utilities.reserve(static_cast<std::size_t>(n_tours) * n_);
    for (int t = 0; t < n_tours; ++t) {
        const TourPurpose purpose = kCategoryTours[static_cast<int>(category)][t];
        const int p = static_cast<int>(purpose);
        const double vot = vot_multiplier(purpose);
        double asc = config_.asc_other;
        if (purpose == TourPurpose::Work)
            asc = config_.asc_work;
        else if (purpose == TourPurpose::Education)
            asc = config_.asc_education;
        for (std::size_t d = 0; d < n_; ++d) {
            if (!(attraction_[p][d] > 0.0))
                continue;
            const double tt = travel_time_min(cell, d) + time_shift_min;
            utilities.push_back(asc - config_.beta_time * vot * tt + log_attraction_[p][d]);
        }
    }
    if (utilities.empty())
        throw DataError("provider: no reachable pattern with positive attraction from cell " +
                        std::to_string(cell));
    return utilities;
}

namespace {

AccessibilitySurface build_surface_impl(const AccessibilityProvider& scenario_provider,
                                        const AccessibilityProvider& base_provider,
                                        const std::string& scenario_name, double delta_t,
                                        bool parallel) {
    if (scenario_provider.n_cells() != base_provider.n_cells())
        throw ContractError("build_surface: providers disagree on cell count");
    const std::size_t n = scenario_provider.n_cells();
    AccessibilitySurface surface(scenario_name, n);

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(n); ++i) {
        const auto cell = static_cast<std::size_t>(i);
        for (PersonCategory category : kPersonCategories) {
            const double raw = provider_aba(scenario_provider, category, cell);
            const double reference = provider_aba(base_provider, category, cell);
            const ScalingFactor s = compute_scaling_factor(base_provider, category, cell, delta_t);
            surface.set(category, cell, raw, reference, s.value);
        }
    }
    (void)parallel;
    return surface;
}

} // namespace

AccessibilitySurface build_surface(const AccessibilityProvider& scenario_provider,
                                   const AccessibilityProvider& base_provider,
                                   const std::string& scenario_name, double delta_t) {
    return build_surface_impl(scenario_provider, base_provider, scenario_name, delta_t, true);
}

AccessibilitySurface build_surface_serial(const AccessibilityProvider& scenario_provider,
                                          const AccessibilityProvider& base_provider,
                                          const std::string& scenario_name, double delta_t) {
    return build_surface_impl(scenario_provider, base_provider, scenario_name, delta_t, false);
}

std::vector<double> tour_logsum(std::span<const MeshCell> cells,
                                std::span<const double> distance_matrix, TourPurpose purpose,
                                const ProviderConfig& config,
                                std::span<const double> tertiary_override,
                                std::span<const double> primary_secondary_override) {
    const std::size_t n = cells.size();
    if (distance_matrix.size() != n * n)
        throw ContractError("tour_logsum: distance matrix size does not match cell count");
    double theta = config.theta_other;
    if (purpose == TourPurpose::Work)
        theta = config.theta_work;
    else if (purpose == TourPurpose::Education)
        theta = config.theta_education;
    if (!(theta > 0.0))
        throw ConfigError("tour_logsum: theta must be positive");

    const AttractionKind kind = attraction_of_purpose(config, purpose);
    std::vector<double> attraction(n);
    for (std::size_t i = 0; i < n; ++i)
        attraction[i] = purpose_attraction(cells[i], kind, tertiary_override,
                                           primary_secondary_override, i);

    std::vector<double> out(n, 0.0);
    for (std::size_t o = 0; o < n; ++o) {
        double sum = 0.0;
        for (std::size_t d = 0; d < n; ++d) {
            if (!(attraction[d] > 0.0))
                continue;
            const double tt = distance_matrix[o * n + d] / config.speed_m_per_min;
            if (!std::isfinite(tt))
                continue;
            sum += attraction[d] * std::exp(-theta * tt);
        }
        if (!(sum > 0.0))
            throw NumericError("tour_logsum: cell " + std::to_string(cells[o].id) +
                               " reaches no positive attraction");
        out[o] = std::log(sum);
    }
    return out;
}

} // namespace relosim
