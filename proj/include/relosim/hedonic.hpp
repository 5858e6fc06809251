#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "relosim/domain.hpp"
#include "relosim/linalg.hpp"

namespace relosim {

// Covariate schema of the land-price model. Order is fixed: serialized
// coefficient files and presets index into it by name.
inline constexpr std::size_t kHedonicK = 14;

const std::array<std::string, kHedonicK>& hedonic_schema();

// Index of a schema name; throws ContractError for unknown names.
std::size_t hedonic_index(const std::string& name);

// Covariate row for one cell, optionally overriding the three tour logsums
// (the policy engine recomputes them without touching the cell table).
std::array<double, kHedonicK> hedonic_covariates(const MeshCell& cell,
                                                 const double* logsum_override = nullptr);

struct HedonicFit {
    std::vector<std::string> names;
    Vector coefficients;
    Vector std_errors;
    Vector t_values;
    double r_squared = 0.0;
    double adjusted_r_squared = 0.0;
    double f_statistic = 0.0;
    long n_observations = 0;
    Vector residuals;
};

// OLS of y on X (QR; throws NumericError naming collinear columns).
// Requires n > k. Adjusted R^2 = 1 - (1-R^2)(n-1)/(n-k); the F statistic
// tests all non-intercept coefficients jointly.
HedonicFit fit_ols(const Matrix& x, const Vector& y, const std::vector<std::string>& names);

// Fits ln(land_price) on the hedonic schema over `cells`.
HedonicFit fit_hedonic(std::span<const MeshCell> cells);

// exp(linear predictor) in JPY per m^2. Throws DataError when a covariate is
// non-finite.
double predict_land_price(std::span<const double> coefficients,
                          std::span<const double> covariates);
double predict_land_price(std::span<const double> coefficients, const MeshCell& cell,
                          const double* logsum_override = nullptr);

} // namespace relosim
