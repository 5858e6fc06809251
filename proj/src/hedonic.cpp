#include "relosim/hedonic.hpp"

#include <cmath>
#include <limits>

namespace relosim {

const std::array<std::string, kHedonicK>& hedonic_schema() {
    static const std::array<std::string, kHedonicK> schema = {
        "intercept",
        "housing_stock",
        "logsum_work",
        "logsum_education",
        "logsum_other",
        "city_takasaki",
        "city_maebashi",
        "city_ota",
        "city_isesaki",
        "city_kiryu",
        "share_agricultural",
        "share_forest",
        "share_freshwater",
        "share_industrial",
    };
    return schema;
}

std::size_t hedonic_index(const std::string& name) {
    const auto& schema = hedonic_schema();
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i] == name)
            return i;
    throw ContractError("unknown land-price covariate '" + name + "'");
}

std::array<double, kHedonicK> hedonic_covariates(const MeshCell& cell,
                                                 const double* logsum_override) {
    std::array<double, kHedonicK> x{};
    x[0] = 1.0;
    x[1] = cell.housing_stock;
    x[2] = logsum_override ? logsum_override[0] : cell.logsum_work;
    x[3] = logsum_override ? logsum_override[1] : cell.logsum_education;
    x[4] = logsum_override ? logsum_override[2] : cell.logsum_other;
    x[5] = cell.city == City::Takasaki ? 1.0 : 0.0;
    x[6] = cell.city == City::Maebashi ? 1.0 : 0.0;
    x[7] = cell.city == City::Ota ? 1.0 : 0.0;
    x[8] = cell.city == City::Isesaki ? 1.0 : 0.0;
    x[9] = cell.city == City::Kiryu ? 1.0 : 0.0;
    x[10] = cell.share_agricultural;
    x[11] = cell.share_forest;
    x[12] = cell.share_freshwater;
    x[13] = cell.share_industrial;
    return x;
}

HedonicFit fit_ols(const Matrix& x, const Vector& y, const std::vector<std::string>& names) {
    const std::size_t n = x.rows();
    const std::size_t k = x.cols();
    if (n <= k)
        throw DataError("fit_ols: need more observations than coefficients (n=" +
                        std::to_string(n) + ", k=" + std::to_string(k) + ")");

    const LeastSquares ls = qr_least_squares(x, y, names);

    HedonicFit fit;
    fit.names = names;
    fit.coefficients = ls.coefficients;
    fit.residuals = ls.residuals;
    fit.n_observations = static_cast<long>(n);

    double mean_y = 0.0;
    for (double v : y)
        mean_y += v;
    mean_y /= static_cast<double>(n);
    double tss = 0.0;
    for (double v : y)
        tss += (v - mean_y) * (v - mean_y);

    const double dof = static_cast<double>(n - k);
    const double sigma2 = ls.rss / dof;
    fit.std_errors.assign(k, 0.0);
    fit.t_values.assign(k, 0.0);
    for (std::size_t j = 0; j < k; ++j) {
        fit.std_errors[j] = std::sqrt(sigma2 * ls.xtx_inverse(j, j));
        fit.t_values[j] = fit.std_errors[j] > 0.0 ? fit.coefficients[j] / fit.std_errors[j] : 0.0;
    }

    fit.r_squared = tss > 0.0 ? 1.0 - ls.rss / tss : 1.0;
    fit.adjusted_r_squared =
        1.0 - (1.0 - fit.r_squared) * static_cast<double>(n - 1) / dof;
    const double k_slopes = static_cast<double>(k - 1);
    fit.f_statistic =
        k_slopes > 0.0 && ls.rss > 0.0 ? ((tss - ls.rss) / k_slopes) / (ls.rss / dof)
                                       : std::numeric_limits<double>::infinity();
    return fit;
}

HedonicFit fit_hedonic(std::span<const MeshCell> cells) {
    const std::size_t n = cells.size();
    Matrix x(n, kHedonicK);
    Vector y(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(cells[i].land_price > 0.0))
            throw DataError("fit_hedonic: cell " + std::to_string(cells[i].id) +
                            " has a nonpositive land price");
        const auto row = hedonic_covariates(cells[i]);
        for (std::size_t j = 0; j < kHedonicK; ++j)
            x(i, j) = row[j];
        y[i] = std::log(cells[i].land_price);
    }
    std::vector<std::string> names(hedonic_schema().begin(), hedonic_schema().end());
    return fit_ols(x, y, names);
}

double predict_land_price(std::span<const double> coefficients,
                          std::span<const double> covariates) {
    if (coefficients.size() != covariates.size())
        throw ContractError("predict_land_price: coefficient/covariate length mismatch");
    double lp = 0.0;
    for (std::size_t j = 0; j < coefficients.size(); ++j) {
        if (!std::isfinite(covariates[j]))
            throw DataError("predict_land_price: non-finite covariate at position " +
                            std::to_string(j));
        lp += coefficients[j] * covariates[j];
    }
    return std::exp(lp);
}

double predict_land_price(std::span<const double> coefficients, const MeshCell& cell,
                          const double* logsum_override) {
    const auto x = hedonic_covariates(cell, logsum_override);
    return predict_land_price(coefficients, std::span<const double>(x.data(), x.size()));
}

} // namespace relosim
