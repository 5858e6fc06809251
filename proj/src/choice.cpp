#include "relosim/choice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace relosim {

const std::array<std::string, kChoiceK>& choice_schema() {
    static const std::array<std::string, kChoiceK> schema = {
        "land_price_10k",
        "share_building",
        "share_agricultural",
        "share_freshwater",
        "share_forest",
        "city_takasaki",
        "city_maebashi",
        "city_ota",
        "city_isesaki",
        "city_kiryu",
        "employees_primary_secondary",
        "employees_tertiary",
    };
    return schema;
}

std::size_t choice_index(const std::string& name) {
    const auto& schema = choice_schema();
    for (std::size_t i = 0; i < schema.size(); ++i)
        if (schema[i] == name)
            return i;
    throw ContractError("unknown residential covariate '" + name + "'");
}

std::array<double, kChoiceK> choice_covariates(const MeshCell& cell, double effective_price_jpy,
                                               const double* employee_override) {
    std::array<double, kChoiceK> x{};
    x[0] = effective_price_jpy / 10000.0;
    x[1] = cell.share_building;
    x[2] = cell.share_agricultural;
    x[3] = cell.share_freshwater;
    x[4] = cell.share_forest;
    x[5] = cell.city == City::Takasaki ? 1.0 : 0.0;
    x[6] = cell.city == City::Maebashi ? 1.0 : 0.0;
    x[7] = cell.city == City::Ota ? 1.0 : 0.0;
    x[8] = cell.city == City::Isesaki ? 1.0 : 0.0;
    x[9] = cell.city == City::Kiryu ? 1.0 : 0.0;
    x[10] = employee_override ? employee_override[0] : cell.employees_primary_secondary;
    x[11] = employee_override ? employee_override[1] : cell.employees_tertiary;
    return x;
}

SampledAlternatives sample_alternatives(std::span<const double> weights,
                                        std::span<const char> eligible, int n_draws, Rng& rng,
                                        std::optional<std::size_t> chosen, CorrectionMode mode) {
    if (weights.size() != eligible.size())
        throw ContractError("sample_alternatives: weight/eligibility size mismatch");
    if (n_draws < 1)
        throw DomainError("sample_alternatives: n_draws must be >= 1");

    std::vector<std::size_t> pool;
    std::vector<double> cumulative;
    pool.reserve(weights.size());
    cumulative.reserve(weights.size());
    double total = 0.0;
    for (std::size_t i = 0; i < weights.size(); ++i) {
        if (!eligible[i])
            continue;
        if (!(weights[i] > 0.0))
            throw DataError("sample_alternatives: eligible cell " + std::to_string(i) +
                            " has a nonpositive sampling weight");
        total += weights[i];
        pool.push_back(i);
        cumulative.push_back(total);
    }
    if (pool.empty() || !(total > 0.0))
        throw DataError("sample_alternatives: no eligible cells to sample");
    if (chosen) {
        const auto it = std::lower_bound(pool.begin(), pool.end(), *chosen);
        if (it == pool.end() || *it != *chosen)
            throw DataError("sample_alternatives: chosen cell " + std::to_string(*chosen) +
                            " is not eligible");
    }

    SampledAlternatives out;
    std::vector<int> position(weights.size(), -1);
    std::vector<int> multiplicity;
    for (int d = 0; d < n_draws; ++d) {
        const std::size_t k = rng.next_weighted_index(cumulative);
        const std::size_t cell = pool[k];
        if (position[cell] >= 0) {
            ++multiplicity[static_cast<std::size_t>(position[cell])];
            continue; // duplicate draw collapses
        }
        position[cell] = static_cast<int>(out.cells.size());
        out.cells.push_back(cell);
        multiplicity.push_back(1);
    }
    if (chosen) {
        if (position[*chosen] < 0) {
            position[*chosen] = static_cast<int>(out.cells.size());
            out.cells.push_back(*chosen);
            multiplicity.push_back(0);
        }
        out.chosen_position = position[*chosen];
        // The chosen cell enters the presented set as one forced copy.
        ++multiplicity[static_cast<std::size_t>(out.chosen_position)];
    }
    out.corrections.resize(out.cells.size());
    for (std::size_t a = 0; a < out.cells.size(); ++a) {
        const double pi = weights[out.cells[a]] / total;
        const double m =
            mode == CorrectionMode::Multiset ? static_cast<double>(multiplicity[a]) : 1.0;
        out.corrections[a] = std::log(m / pi);
    }
    return out;
}

double household_utility(const SegmentCoefficients& coefficients, const Alternative& alt) {
    if (!std::isfinite(alt.sampling_correction))
        throw ContractError("household_utility: non-finite sampling correction");
    double v = alt.size_term * coefficients.size_coefficient + alt.sampling_correction;
    for (std::size_t j = 0; j < kChoiceK; ++j)
        v += coefficients.beta[j] * alt.covariates[j];
    for (PersonCategory c : kPersonCategories)
        if (const auto aba = alt.aba[c])
            v += coefficients.alpha(c) * *aba;
    return v;
}

std::vector<double> choice_probabilities(const ChoiceSet& set,
                                         const SegmentCoefficients& coefficients) {
    if (set.alternatives.empty())
        throw DataError("choice_probabilities: empty choice set");
    std::vector<double> v(set.alternatives.size());
    double vmax = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < v.size(); ++a) {
        v[a] = household_utility(coefficients, set.alternatives[a]);
        vmax = std::max(vmax, v[a]);
    }
    double denom = 0.0;
    for (double& u : v) {
        u = std::exp(u - vmax);
        denom += u;
    }
    for (double& u : v)
        u /= denom;
    return v;
}

// ---- Estimation -------------------------------------------------------------------

const std::array<std::string, kNumChoiceParams>& choice_parameter_names() {
    static const std::array<std::string, kNumChoiceParams> names = [] {
        std::array<std::string, kNumChoiceParams> n;
        n[0] = "aba_worker";
        n[1] = "aba_student";
        n[2] = "aba_unemployed";
        for (std::size_t j = 0; j < kChoiceK; ++j)
            n[3 + j] = choice_schema()[j];
        return n;
    }();
    return names;
}

SegmentCoefficients coefficients_from_params(std::span<const double> params, int segment) {
    if (params.size() != kNumChoiceParams)
        throw ContractError("coefficients_from_params: wrong parameter count");
    SegmentCoefficients c;
    c.segment = segment;
    c.alpha_worker = params[0];
    c.alpha_student = params[1];
    c.alpha_unemployed = params[2];
    for (std::size_t j = 0; j < kChoiceK; ++j)
        c.beta[j] = params[3 + j];
    return c;
}

std::array<double, kNumChoiceParams> params_from_coefficients(const SegmentCoefficients& c) {
    std::array<double, kNumChoiceParams> p{};
    p[0] = c.alpha_worker;
    p[1] = c.alpha_student;
    p[2] = c.alpha_unemployed;
    for (std::size_t j = 0; j < kChoiceK; ++j)
        p[3 + j] = c.beta[j];
    return p;
}

namespace {

// Feature vector of one alternative in full parameter order; absent ABA
// categories contribute a structural zero.
inline void fill_features(const Alternative& alt, double* f) {
    f[0] = alt.aba.worker.value_or(0.0);
    f[1] = alt.aba.student.value_or(0.0);
    f[2] = alt.aba.unemployed.value_or(0.0);
    for (std::size_t j = 0; j < kChoiceK; ++j)
        f[3 + j] = alt.covariates[j];
}

// Log likelihood contribution and gradient of one observation.
double observation_ll(const ChoiceSet& set, std::span<const double> params, double* grad) {
    const std::size_t n_alt = set.alternatives.size();
    if (set.chosen_index < 0 || static_cast<std::size_t>(set.chosen_index) >= n_alt)
        throw ContractError("estimation observation without a marked chosen alternative");

    double features[kNumChoiceParams];
    std::vector<double> v(n_alt);
    double vmax = -std::numeric_limits<double>::infinity();
    for (std::size_t a = 0; a < n_alt; ++a) {
        const Alternative& alt = set.alternatives[a];
        fill_features(alt, features);
        double u = alt.size_term + alt.sampling_correction;
        for (std::size_t j = 0; j < kNumChoiceParams; ++j)
            u += params[j] * features[j];
        v[a] = u;
        vmax = std::max(vmax, u);
    }
    double denom = 0.0;
    for (double& u : v) {
        u = std::exp(u - vmax);
        denom += u;
    }
    const double log_denom = std::log(denom) + vmax;

    double ll = 0.0;
    for (std::size_t a = 0; a < n_alt; ++a) {
        const double p = v[a] / denom;
        fill_features(set.alternatives[a], features);
        const double indicator = static_cast<std::size_t>(set.chosen_index) == a ? 1.0 : 0.0;
        if (indicator > 0.0) {
            const Alternative& alt = set.alternatives[a];
            double u = alt.size_term + alt.sampling_correction;
            for (std::size_t j = 0; j < kNumChoiceParams; ++j)
                u += params[j] * features[j];
            ll = u - log_denom;
        }
        if (grad)
            for (std::size_t j = 0; j < kNumChoiceParams; ++j)
                grad[j] += (indicator - p) * features[j];
    }
    return ll;
}

double log_likelihood_impl(std::span<const ChoiceSet> observations,
                           std::span<const double> params, Vector* gradient, bool parallel) {
    if (params.size() != kNumChoiceParams)
        throw ContractError("log_likelihood: wrong parameter count");
    if (gradient)
        gradient->assign(kNumChoiceParams, 0.0);

    int n_threads = 1;
#ifdef _OPENMP
    if (parallel)
        n_threads = omp_get_max_threads();
#endif
    std::vector<double> ll_partial(n_threads, 0.0);
    std::vector<Vector> grad_partial(gradient ? n_threads : 0, Vector(kNumChoiceParams, 0.0));

#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(observations.size()); ++i) {
        int t = 0;
#ifdef _OPENMP
        t = omp_get_thread_num();
#endif
        double* g = gradient ? grad_partial[t].data() : nullptr;
        ll_partial[t] += observation_ll(observations[i], params, g);
    }

    // Thread-ordered reduction keeps the sum reproducible for a fixed count.
    double ll = 0.0;
    for (int t = 0; t < n_threads; ++t) {
        ll += ll_partial[t];
        if (gradient)
            for (std::size_t j = 0; j < kNumChoiceParams; ++j)
                (*gradient)[j] += grad_partial[t][j];
    }
    (void)parallel;
    return ll;
}

} // namespace

double log_likelihood(std::span<const ChoiceSet> observations, std::span<const double> params,
                      Vector* gradient) {
    return log_likelihood_impl(observations, params, gradient, true);
}

double log_likelihood_serial(std::span<const ChoiceSet> observations,
                             std::span<const double> params, Vector* gradient) {
    return log_likelihood_impl(observations, params, gradient, false);
}

Matrix log_likelihood_hessian(std::span<const ChoiceSet> observations,
                              std::span<const double> params,
                              std::span<const std::size_t> free_indices) {
    const std::size_t k = free_indices.size();
    Matrix hessian(k, k);
    double features[kNumChoiceParams];
    std::vector<double> z(k);
    for (const ChoiceSet& set : observations) {
        std::vector<double> v(set.alternatives.size());
        double vmax = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < set.alternatives.size(); ++a) {
            const Alternative& alt = set.alternatives[a];
            fill_features(alt, features);
            double u = alt.size_term + alt.sampling_correction;
            for (std::size_t j = 0; j < kNumChoiceParams; ++j)
                u += params[j] * features[j];
            v[a] = u;
            vmax = std::max(vmax, u);
        }
        double denom = 0.0;
        for (double& u : v) {
            u = std::exp(u - vmax);
            denom += u;
        }
        std::vector<double> mean_z(k, 0.0);
        Matrix outer(k, k);
        for (std::size_t a = 0; a < set.alternatives.size(); ++a) {
            const double p = v[a] / denom;
            fill_features(set.alternatives[a], features);
            for (std::size_t j = 0; j < k; ++j)
                z[j] = features[free_indices[j]];
            for (std::size_t r = 0; r < k; ++r) {
                mean_z[r] += p * z[r];
                for (std::size_t c = 0; c <= r; ++c)
                    outer(r, c) += p * z[r] * z[c];
            }
        }
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c <= r; ++c) {
                const double h = -(outer(r, c) - mean_z[r] * mean_z[c]);
                hessian(r, c) += h;
                if (r != c)
                    hessian(c, r) += h;
            }
    }
    return hessian;
}

SegmentCoefficients EstimationResult::coefficients() const {
    auto c = coefficients_from_params(std::span<const double>(parameters.data(), parameters.size()),
                                      segment);
    return c;
}

double goodness_of_fit(double ll0, double ll_final, int k) {
    if (ll0 == 0.0)
        throw DomainError("goodness_of_fit: initial log likelihood must be nonzero");
    if (ll0 > 0.0)
        throw DomainError("goodness_of_fit: initial log likelihood must be negative");
    if (ll_final < ll0)
        throw DomainError("goodness_of_fit: final log likelihood below initial");
    if (k < 0)
        throw DomainError("goodness_of_fit: negative parameter count");
    return 1.0 - (ll_final - static_cast<double>(k)) / ll0;
}

EstimationResult estimate_segment(std::span<const ChoiceSet> observations,
                                  const EstimationOptions& options) {
    if (observations.empty())
        throw DataError("estimate_segment: no observations");

    // Identification: a column constant across all stacked rows cannot move
    // the likelihood in any direction.
    double lo[kNumChoiceParams], hi[kNumChoiceParams];
    std::fill(std::begin(lo), std::end(lo), std::numeric_limits<double>::infinity());
    std::fill(std::begin(hi), std::end(hi), -std::numeric_limits<double>::infinity());
    double features[kNumChoiceParams];
    for (const ChoiceSet& set : observations)
        for (const Alternative& alt : set.alternatives) {
            fill_features(alt, features);
            for (std::size_t j = 0; j < kNumChoiceParams; ++j) {
                lo[j] = std::min(lo[j], features[j]);
                hi[j] = std::max(hi[j], features[j]);
            }
        }

    EstimationResult result;
    result.segment = observations.front().segment;
    result.n_observations = static_cast<int>(observations.size());

    std::vector<std::size_t> free_idx;
    const auto& names = choice_parameter_names();
    for (std::size_t j = 0; j < kNumChoiceParams; ++j) {
        if (hi[j] - lo[j] == 0.0) {
            if (!options.drop_unidentified)
                throw DataError("estimate_segment: coefficient '" + names[j] +
                                "' is not identified (zero column variance)");
            result.dropped_names.push_back(names[j]);
        } else {
            free_idx.push_back(j);
            result.estimated_names.push_back(names[j]);
        }
    }
    result.n_parameters = static_cast<int>(free_idx.size());

    const auto eval = [&](std::span<const double> full, Vector* grad_full) {
        return options.parallel ? log_likelihood(observations, full, grad_full)
                                : log_likelihood_serial(observations, full, grad_full);
    };

    std::vector<double> full(kNumChoiceParams, 0.0);
    Vector grad_full;
    result.ll0 = eval(full, &grad_full);

    const std::size_t k = free_idx.size();
    Vector theta(k, 0.0), grad(k), grad_new(k);
    double ll = result.ll0;
    if (!options.start.empty()) {
        if (options.start.size() != kNumChoiceParams)
            throw ContractError("estimate_segment: start point has wrong length");
        for (std::size_t j = 0; j < k; ++j) {
            theta[j] = options.start[free_idx[j]];
            full[free_idx[j]] = theta[j];
        }
        ll = eval(full, &grad_full);
    }
    for (std::size_t j = 0; j < k; ++j)
        grad[j] = grad_full[free_idx[j]];

    // The quasi-Newton approximation is seeded (and refreshed on a stall)
    // from the analytic curvature: the raw columns differ in scale by orders
    // of magnitude and an identity start crawls.
    Matrix inv_hessian = Matrix::identity(k);
    const auto refresh_inverse_hessian = [&](std::span<const double> at) {
        if (k == 0)
            return;
        const Matrix h = log_likelihood_hessian(observations, at, free_idx);
        Matrix neg_h(k, k);
        for (std::size_t r = 0; r < k; ++r)
            for (std::size_t c = 0; c < k; ++c)
                neg_h(r, c) = -h(r, c);
        try {
            inv_hessian = invert_spd(neg_h);
        } catch (const NumericError&) {
            inv_hessian = Matrix::identity(k); // flat directions; fall back
        }
    };
    refresh_inverse_hessian(full);
    bool reset_done = false;
    int iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        result.gradient_norm = max_abs(grad);
        if (result.gradient_norm < options.gradient_tolerance) {
            result.converged = true;
            break;
        }
        // Ascent direction d = B * grad (B approximates the inverse of -H).
        Vector direction(k, 0.0);
        for (std::size_t r = 0; r < k; ++r) {
            double s = 0.0;
            for (std::size_t c = 0; c < k; ++c)
                s += inv_hessian(r, c) * grad[c];
            direction[r] = s;
        }
        double slope = dot(direction, grad);
        if (!(slope > 0.0)) {
            inv_hessian = Matrix::identity(k);
            direction = grad;
            slope = dot(grad, grad);
        }

        double step = 1.0;
        double ll_new = -std::numeric_limits<double>::infinity();
        Vector theta_new(k);
        bool improved = false;
        // The acceptance test carries a noise floor: near the optimum the
        // Armijo improvement drops below one ulp of the log likelihood and a
        // strict test would freeze the iterate short of the tolerance.
        const double noise = 1e-12 * (1.0 + std::abs(ll));
        for (int ls = 0; ls < 60; ++ls) {
            for (std::size_t j = 0; j < k; ++j)
                theta_new[j] = theta[j] + step * direction[j];
            std::fill(full.begin(), full.end(), 0.0);
            for (std::size_t j = 0; j < k; ++j)
                full[free_idx[j]] = theta_new[j];
            ll_new = eval(full, &grad_full);
            if (std::isfinite(ll_new) && ll_new >= ll + 1e-4 * step * slope - noise) {
                improved = true;
                break;
            }
            step *= 0.5;
        }
        if (!improved) {
            if (!reset_done) {
                std::fill(full.begin(), full.end(), 0.0);
                for (std::size_t j = 0; j < k; ++j)
                    full[free_idx[j]] = theta[j];
                refresh_inverse_hessian(full);
                reset_done = true;
                continue;
            }
            break; // cannot improve; convergence check below decides
        }
        reset_done = false;

        for (std::size_t j = 0; j < k; ++j)
            grad_new[j] = grad_full[free_idx[j]];

        // BFGS update on f = -LL: s = dtheta, y = -(grad_new - grad).
        Vector s_vec(k), y_vec(k);
        for (std::size_t j = 0; j < k; ++j) {
            s_vec[j] = theta_new[j] - theta[j];
            y_vec[j] = grad[j] - grad_new[j];
        }
        const double sy = dot(s_vec, y_vec);
        if (sy > 1e-12) {
            Vector by(k, 0.0);
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c < k; ++c)
                    by[r] += inv_hessian(r, c) * y_vec[c];
            const double yby = dot(y_vec, by);
            const double factor = (sy + yby) / (sy * sy);
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c < k; ++c)
                    inv_hessian(r, c) += factor * s_vec[r] * s_vec[c] -
                                         (by[r] * s_vec[c] + s_vec[r] * by[c]) / sy;
        }

        theta = theta_new;
        grad = grad_new;
        ll = ll_new;
    }

    if (!result.converged) {
        result.gradient_norm = max_abs(grad);
        if (result.gradient_norm < options.gradient_tolerance) {
            result.converged = true;
        } else {
            std::ostringstream msg;
            msg << "estimate_segment: no convergence after " << iter
                << " iterations (gradient max-norm " << result.gradient_norm << "); last iterate:";
            for (std::size_t j = 0; j < k; ++j)
                msg << ' ' << result.estimated_names[j] << '=' << theta[j];
            throw NumericError(msg.str());
        }
    }
    result.iterations = iter;
    result.ll_final = ll;
    for (std::size_t j = 0; j < k; ++j)
        result.parameters[free_idx[j]] = theta[j];
    result.adjusted_rho_squared = goodness_of_fit(result.ll0, result.ll_final, result.n_parameters);

    result.t_values.fill(std::numeric_limits<double>::quiet_NaN());
    std::fill(full.begin(), full.end(), 0.0);
    for (std::size_t j = 0; j < k; ++j)
        full[free_idx[j]] = theta[j];
    const Matrix hessian = log_likelihood_hessian(observations, full, free_idx);
    Matrix neg_hessian(k, k);
    for (std::size_t r = 0; r < k; ++r)
        for (std::size_t c = 0; c < k; ++c)
            neg_hessian(r, c) = -hessian(r, c);
    try {
        const Matrix cov = invert_spd(neg_hessian);
        for (std::size_t j = 0; j < k; ++j) {
            const double se = std::sqrt(cov(j, j));
            if (se > 0.0 && std::isfinite(se))
                result.t_values[free_idx[j]] = theta[j] / se;
        }
    } catch (const NumericError&) {
        result.hessian_singular = true;
    }
    return result;
}

} // namespace relosim
