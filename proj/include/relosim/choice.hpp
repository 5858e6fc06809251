#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relosim/accessibility.hpp"
#include "relosim/domain.hpp"
#include "relosim/linalg.hpp"
#include "relosim/rng.hpp"

namespace relosim {

// Cell covariates of the residential utility, in fixed schema order. Land
// price enters in 10,000 JPY/m^2 units.
inline constexpr std::size_t kChoiceK = 12;

const std::array<std::string, kChoiceK>& choice_schema();
std::size_t choice_index(const std::string& name);

std::array<double, kChoiceK> choice_covariates(const MeshCell& cell, double effective_price_jpy,
                                               const double* employee_override = nullptr);

// Coefficients for one market segment: three ABA terms, the cell covariate
// block, and the fixed unit size coefficient.
struct SegmentCoefficients {
    int segment = 0;
    double alpha_worker = 0.0;
    double alpha_student = 0.0;
    double alpha_unemployed = 0.0;
    std::array<double, kChoiceK> beta{};
    double size_coefficient = 1.0; // fixed at 1 by construction

    double alpha(PersonCategory c) const {
        switch (c) {
        case PersonCategory::Worker: return alpha_worker;
        case PersonCategory::Student: return alpha_student;
        default: return alpha_unemployed;
        }
    }
};

struct Alternative {
    CellId cell = -1;
    std::array<double, kChoiceK> covariates{};
    CategoryAverages aba;            // absent categories contribute nothing
    double size_term = 0.0;          // ln(housing stock); stock must be > 0
    double sampling_correction = 0.0; // ln(1/pi) for the per-draw probability pi
};

struct ChoiceSet {
    HouseholdId household = -1;
    int segment = 1;
    std::vector<Alternative> alternatives; // unique by cell
    int chosen_index = -1;                 // >= 0 only in estimation data
};

// Correction attached to each sampled alternative:
//   PerDraw  - ln(1/pi), pi the per-draw probability; duplicates collapse
//              with no multiplicity term.
//   Multiset - ln(m/pi) with m the alternative's draw count (the chosen cell
//              counts one forced copy on top); this is the exact conditional
//              correction for draws with replacement and stays consistent
//              even when the draw count saturates a small cell pool.
enum class CorrectionMode : std::uint8_t { PerDraw, Multiset };

// Importance sampling with replacement over cell indices. `weights` are the
// per-cell sampling weights (eligible cells only are considered; a cell is
// eligible when eligible[i] != 0). Duplicates collapse to unique entries. In
// estimation mode the chosen cell is force-included when unsampled. Throws
// DataError when an eligible cell has a nonpositive weight.
struct SampledAlternatives {
    std::vector<std::size_t> cells;      // unique, in first-drawn order (chosen may be appended)
    std::vector<double> corrections;     // aligned with cells
    int chosen_position = -1;            // index into cells when a chosen cell was given
};

SampledAlternatives sample_alternatives(std::span<const double> weights,
                                        std::span<const char> eligible, int n_draws, Rng& rng,
                                        std::optional<std::size_t> chosen = std::nullopt,
                                        CorrectionMode mode = CorrectionMode::PerDraw);

// V = beta . X + sum_present alpha_c * (category mean ABA) + size + correction.
double household_utility(const SegmentCoefficients& coefficients, const Alternative& alt);

// Max-shifted softmax over household_utility; sums to 1 within 1e-12.
std::vector<double> choice_probabilities(const ChoiceSet& set,
                                         const SegmentCoefficients& coefficients);

// ---- Maximum likelihood estimation ------------------------------------------------

// Free-parameter layout: [alpha_worker, alpha_student, alpha_unemployed,
// beta[0..kChoiceK-1]], optionally restricted by a keep-mask.
inline constexpr std::size_t kNumChoiceParams = 3 + kChoiceK;

const std::array<std::string, kNumChoiceParams>& choice_parameter_names();

SegmentCoefficients coefficients_from_params(std::span<const double> params, int segment);
std::array<double, kNumChoiceParams> params_from_coefficients(const SegmentCoefficients& c);

// Log likelihood and (optionally) its gradient over full-parameter vectors.
// The parallel version reduces per-thread partials in thread order, so a
// fixed thread count gives reproducible sums; the serial version is the
// reference implementation.
double log_likelihood(std::span<const ChoiceSet> observations, std::span<const double> params,
                      Vector* gradient = nullptr);
double log_likelihood_serial(std::span<const ChoiceSet> observations,
                             std::span<const double> params, Vector* gradient = nullptr);

// Analytic Hessian of the log likelihood restricted to `free_indices`.
Matrix log_likelihood_hessian(std::span<const ChoiceSet> observations,
                              std::span<const double> params,
                              std::span<const std::size_t> free_indices);

struct EstimationOptions {
    double gradient_tolerance = 1e-6; // max-norm
    int max_iterations = 200;
    bool parallel = true;
    bool drop_unidentified = false; // fix zero-variance columns at 0 instead of erroring
    std::vector<double> start;      // full-length start point; zeros when empty
};

struct EstimationResult {
    int segment = 0;
    std::array<double, kNumChoiceParams> parameters{}; // dropped entries stay 0
    std::array<double, kNumChoiceParams> t_values{};   // NaN where unavailable
    std::vector<std::string> estimated_names;          // free parameters, schema order
    std::vector<std::string> dropped_names;            // zero-variance columns fixed at 0
    double ll0 = 0.0;
    double ll_final = 0.0;
    double adjusted_rho_squared = 0.0;
    int n_observations = 0;
    int n_parameters = 0; // K = estimated coefficients
    bool converged = false;
    int iterations = 0;
    double gradient_norm = 0.0;
    bool hessian_singular = false;

    SegmentCoefficients coefficients() const;
};

// Quasi-Newton (BFGS) ascent from zero with the analytic gradient. LL0 keeps
// the size and sampling corrections active. Throws NumericError on
// non-convergence (message carries the last iterate) and DataError with the
// coefficient name when a column has zero variance across the stacked data
// and drop_unidentified is off.
EstimationResult estimate_segment(std::span<const ChoiceSet> observations,
                                  const EstimationOptions& options = {});

// Adjusted rho^2 = 1 - (ll_final - k) / ll0. Throws DomainError when ll0 is 0
// or the preconditions (ll0 < 0, ll_final >= ll0, k >= 0) fail.
double goodness_of_fit(double ll0, double ll_final, int k);

} // namespace relosim
