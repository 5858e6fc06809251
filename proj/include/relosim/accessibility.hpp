#pragma once

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relosim/domain.hpp"

namespace relosim {

// Pattern utilities for one person category at one home cell.
struct PatternUtilitySet {
    PersonCategory person_category = PersonCategory::Worker;
    CellId cell = -1;
    std::vector<double> utilities;
};

// ln(sum_p exp(V_p)) + constant, max-shifted for overflow safety.
// Throws DomainError on an empty or non-finite utility sequence.
double aba_logsum(std::span<const double> utilities, double constant);

struct ScalingFactor {
    PersonCategory person_category = PersonCategory::Worker;
    double value = 0.0; // utility per minute, typically negative
    double delta_t = 1.0;
};

inline constexpr double kScalingEpsilon = 1e-12;

// Contract for anything that can evaluate daily-pattern utilities: pure
// evaluation, no shared mutable state, so surfaces can build in parallel.
class AccessibilityProvider {
public:
    virtual ~AccessibilityProvider() = default;

    // Utilities of every daily activity pattern for `category` living at
    // `cell`, with every travel time shifted by `time_shift_min` minutes.
    virtual std::vector<double> pattern_utilities(PersonCategory category, std::size_t cell,
                                                  double time_shift_min) const = 0;

    virtual std::size_t n_cells() const = 0;
    virtual double constant() const { return 0.0; }
};

PatternUtilitySet pattern_set(const AccessibilityProvider& provider, PersonCategory category,
                              std::size_t cell, double time_shift_min = 0.0);

double provider_aba(const AccessibilityProvider& provider, PersonCategory category,
                    std::size_t cell, double time_shift_min = 0.0);

// Finite-difference marginal utility of travel time at `reference_cell`.
// Throws NumericError when |value| < epsilon (provider insensitive to time).
ScalingFactor compute_scaling_factor(const AccessibilityProvider& provider,
                                     PersonCategory category, std::size_t reference_cell,
                                     double delta_t = 1.0, double epsilon = kScalingEpsilon);

// (aba - aba_original) / |s|: minutes-equivalent, positive when accessibility
// improves relative to the reference.
double normalize_aba(double aba, double aba_original, const ScalingFactor& s);

// Per-category household means; a category with no members is absent.
struct CategoryAverages {
    std::optional<double> worker;
    std::optional<double> student;
    std::optional<double> unemployed;

    std::optional<double>& operator[](PersonCategory c) {
        switch (c) {
        case PersonCategory::Worker: return worker;
        case PersonCategory::Student: return student;
        default: return unemployed;
        }
    }
    std::optional<double> operator[](PersonCategory c) const {
        switch (c) {
        case PersonCategory::Worker: return worker;
        case PersonCategory::Student: return student;
        default: return unemployed;
        }
    }
};

// Mean of explicit per-member values for one category.
double member_mean(std::span<const double> member_values);

// Normalized ABA per (category, cell) for one scenario together with the
// base-scenario reference and scaling factors used for normalization.
class AccessibilitySurface {
public:
    AccessibilitySurface() = default;
    AccessibilitySurface(std::string scenario_name, std::size_t n_cells);

    const std::string& scenario() const { return scenario_; }
    std::size_t n_cells() const { return n_cells_; }

    double raw(PersonCategory c, std::size_t cell) const { return raw_[idx(c, cell)]; }
    double reference_raw(PersonCategory c, std::size_t cell) const { return ref_[idx(c, cell)]; }
    double scaling(PersonCategory c, std::size_t cell) const { return scale_[idx(c, cell)]; }

    // Change versus the reference at the same cell, in minutes-equivalent.
    double normalized(PersonCategory c, std::size_t cell) const;

    // Change versus the reference at `home_cell` (the member's current home),
    // scaled by the home-cell factor.
    double normalized_for_home(PersonCategory c, std::size_t candidate_cell,
                               std::size_t home_cell) const;

    void set(PersonCategory c, std::size_t cell, double raw, double reference, double scaling);

private:
    std::size_t idx(PersonCategory c, std::size_t cell) const {
        return static_cast<std::size_t>(c) * n_cells_ + cell;
    }
    std::string scenario_;
    std::size_t n_cells_ = 0;
    std::vector<double> raw_, ref_, scale_;
};

// Household-level category averages of normalized ABA at a candidate cell.
// Throws DataError when the surface does not cover a needed entry.
CategoryAverages household_average_aba(const AccessibilitySurface& surface,
                                       const Household& household, std::size_t candidate_cell);

enum class TourPurpose : std::uint8_t { Work = 0, Education = 1, Other = 2 };

enum class AttractionKind : std::uint8_t { Tertiary, PrimarySecondary, AllEmployees };

// Gravity-style provider settings. Work and Education tours are priced with
// the commute value-of-time multiplier, Other tours with the other-purpose
// multiplier; travel times divide by the road capacity factor.
struct ProviderConfig {
    double speed_m_per_min = 500.0; // free-flow network speed
    double beta_time = 0.05;        // utility per minute of travel
    double asc_work = 0.0;
    double asc_education = 0.0;
    double asc_other = 0.0;
    // Education tours pull toward the primary/secondary field so the tour
    // logsums carry genuinely distinct spatial information on synthetic
    // regions; work and other tours target the tertiary field.
    AttractionKind attraction_work = AttractionKind::Tertiary;
    AttractionKind attraction_education = AttractionKind::PrimarySecondary;
    AttractionKind attraction_other = AttractionKind::Tertiary;
    double theta_work = 0.03;      // tour-logsum decay, per minute
    double theta_education = 0.10;
    double theta_other = 0.06;
    double aba_constant = 0.0;
};

double attraction_of(const MeshCell& cell, AttractionKind kind);
AttractionKind attraction_of_purpose(const ProviderConfig& config, TourPurpose purpose);

// Synthetic stand-in for a full activity-based model: one pattern per
// (purpose, destination with positive attraction), utility
//   asc - beta_time * vot(purpose) * travel_time + ln(attraction).
// Workers carry Work+Other tours, students Education+Other, unemployed Other.
class SyntheticAccessibilityProvider final : public AccessibilityProvider {
public:
    // `distance_matrix` is row-major meters [origin * n + destination].
    // `tertiary_override` / `primary_secondary_override` substitute employee
    // counts (used by the policy engine) without touching the cell table.
    SyntheticAccessibilityProvider(std::span<const MeshCell> cells,
                                   std::span<const double> distance_matrix,
                                   const ProviderConfig& config, const ScenarioSpec& scenario,
                                   std::span<const double> tertiary_override = {},
                                   std::span<const double> primary_secondary_override = {});

    std::vector<double> pattern_utilities(PersonCategory category, std::size_t cell,
                                          double time_shift_min) const override;
    std::size_t n_cells() const override { return n_; }
    double constant() const override { return config_.aba_constant; }

    double travel_time_min(std::size_t origin, std::size_t destination) const;
    double vot_multiplier(TourPurpose purpose) const;

private:
    std::size_t n_ = 0;
    ProviderConfig config_;
    double vot_commute_ = 1.0;
    double vot_other_ = 1.0;
    double capacity_factor_ = 1.0;
    std::span<const double> distances_;
    std::vector<double> attraction_[3];     // indexed by TourPurpose
    std::vector<double> log_attraction_[3]; // ln of the above where positive
};

// Builds the surface for `scenario_provider` normalized against
// `base_provider`: raw ABA per (category, cell) from the scenario, reference
// ABA and scaling factor from the base. Parallel over cells; the serial
// variant is the reference implementation and produces identical bits.
AccessibilitySurface build_surface(const AccessibilityProvider& scenario_provider,
                                   const AccessibilityProvider& base_provider,
                                   const std::string& scenario_name, double delta_t = 1.0);
AccessibilitySurface build_surface_serial(const AccessibilityProvider& scenario_provider,
                                          const AccessibilityProvider& base_provider,
                                          const std::string& scenario_name, double delta_t = 1.0);

// Per-cell tour-based accessibility covariate for the land-price model:
//   ln sum_d attraction(d) * exp(-theta * travel_time(o, d)).
// Throws NumericError when a cell reaches no positive attraction at all.
std::vector<double> tour_logsum(std::span<const MeshCell> cells,
                                std::span<const double> distance_matrix, TourPurpose purpose,
                                const ProviderConfig& config,
                                std::span<const double> tertiary_override = {},
                                std::span<const double> primary_secondary_override = {});

} // namespace relosim
