#include "relosim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "relosim/csv.hpp"
#include "relosim/io.hpp"
#include "relosim/metrics.hpp"
#include "relosim/rng.hpp"

namespace relosim {

using nlohmann::json;

namespace {

std::filesystem::path resolve(const std::filesystem::path& base,
                              const std::filesystem::path& path) {
    if (path.empty() || path.is_absolute())
        return path;
    return base / path;
}

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t width) {
    if (s.size() >= width)
        return s + ' ';
    return s + std::string(width - s.size(), ' ');
}

} // namespace

const ScenarioSpec& ProjectConfig::scenario_by_name(const std::string& name) const {
    for (const auto& scenario : scenarios)
        if (scenario.name == name)
            return scenario;
    throw ConfigError("unknown scenario '" + name + "'");
}

std::vector<ScenarioSpec> builtin_scenarios() {
    ScenarioSpec base;

    ScenarioSpec s1 = base;
    s1.name = "s1";
    s1.vot_commute_multiplier = 0.75;
    s1.vot_other_multiplier = 0.85;
    s1.road_capacity_factor = 1.2;

    ScenarioSpec s2 = base;
    s2.name = "s2";
    s2.vot_commute_multiplier = 0.50;
    s2.vot_other_multiplier = 0.70;
    s2.road_capacity_factor = 1.2;

    ScenarioSpec s1_p1 = s1;
    s1_p1.name = "s1_p1";
    s1_p1.policy1_subsidy_rate = 0.2;
    ScenarioSpec s2_p1 = s2;
    s2_p1.name = "s2_p1";
    s2_p1.policy1_subsidy_rate = 0.2;

    ScenarioSpec s1_p2 = s1;
    s1_p2.name = "s1_p2";
    s1_p2.policy2_ufaa_employee_boost = 0.3;
    ScenarioSpec s2_p2 = s2;
    s2_p2.name = "s2_p2";
    s2_p2.policy2_ufaa_employee_boost = 0.3;

    return {base, s1, s2, s1_p1, s2_p1, s1_p2, s2_p2};
}

ProjectConfig default_config() {
    ProjectConfig config;
    config.scenarios = builtin_scenarios();
    config.hedonic_preset = "data/presets/hedonic.coef";
    for (int k = 1; k <= kNumSegments; ++k)
        config.segment_presets.push_back("data/presets/segment_" + std::to_string(k) + ".coef");
    return config;
}

namespace {

void parse_scenario(const json& j, ScenarioSpec& scenario) {
    if (!j.contains("name"))
        throw ConfigError("scenario entry without a name");
    scenario.name = j.at("name").get<std::string>();
    if (j.contains("population_ratio"))
        scenario.population_ratio = j.at("population_ratio").get<double>();
    if (j.contains("vot_commute_multiplier"))
        scenario.vot_commute_multiplier = j.at("vot_commute_multiplier").get<double>();
    if (j.contains("vot_other_multiplier"))
        scenario.vot_other_multiplier = j.at("vot_other_multiplier").get<double>();
    if (j.contains("road_capacity_factor"))
        scenario.road_capacity_factor = j.at("road_capacity_factor").get<double>();
    if (j.contains("policy1_subsidy_rate"))
        scenario.policy1_subsidy_rate = j.at("policy1_subsidy_rate").get<double>();
    if (j.contains("policy2_ufaa_employee_boost"))
        scenario.policy2_ufaa_employee_boost = j.at("policy2_ufaa_employee_boost").get<double>();
    if (j.contains("n_monte_carlo_runs"))
        scenario.n_monte_carlo_runs = j.at("n_monte_carlo_runs").get<int>();
    if (j.contains("seed"))
        scenario.seed = j.at("seed").get<std::uint64_t>();
    validate_scenario(scenario);
}

AttractionKind attraction_from_string(const std::string& s) {
    if (s == "tertiary")
        return AttractionKind::Tertiary;
    if (s == "primary_secondary")
        return AttractionKind::PrimarySecondary;
    if (s == "all")
        return AttractionKind::AllEmployees;
    throw ConfigError("unknown attraction kind '" + s + "'");
}

} // namespace

ProjectConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config '" + path.string() + "'");
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }

    ProjectConfig config = default_config();
    config.base_dir = path.has_parent_path() ? path.parent_path() : ".";
    config.hedonic_preset = config.base_dir / "data/presets/hedonic.coef";
    config.segment_presets.clear();
    for (int k = 1; k <= kNumSegments; ++k)
        config.segment_presets.push_back(config.base_dir /
                                         ("data/presets/segment_" + std::to_string(k) + ".coef"));

    try {
        if (j.contains("seed"))
            config.seed = j.at("seed").get<std::uint64_t>();
        if (j.contains("out_dir"))
            config.out_dir = resolve(config.base_dir, j.at("out_dir").get<std::string>());
        if (j.contains("split_fraction"))
            config.split_fraction = j.at("split_fraction").get<double>();
        if (j.contains("resample_moves_per_run"))
            config.resample_moves_per_run = j.at("resample_moves_per_run").get<bool>();
        if (j.contains("synthetic")) {
            const json& s = j.at("synthetic");
            if (s.contains("n_cells"))
                config.synthetic.n_cells = s.at("n_cells").get<int>();
            if (s.contains("n_households"))
                config.synthetic.n_households = s.at("n_households").get<long>();
            if (s.contains("cell_size_m"))
                config.synthetic.cell_size_m = s.at("cell_size_m").get<double>();
            if (s.contains("price_noise_sigma"))
                config.synthetic.price_noise_sigma = s.at("price_noise_sigma").get<double>();
            if (s.contains("ufaa_radius_fraction"))
                config.synthetic.ufaa_radius_fraction = s.at("ufaa_radius_fraction").get<double>();
            if (s.contains("daa_radius_fraction"))
                config.synthetic.daa_radius_fraction = s.at("daa_radius_fraction").get<double>();
        }
        if (j.contains("provider")) {
            const json& p = j.at("provider");
            if (p.contains("speed_m_per_min"))
                config.provider.speed_m_per_min = p.at("speed_m_per_min").get<double>();
            if (p.contains("beta_time"))
                config.provider.beta_time = p.at("beta_time").get<double>();
            if (p.contains("theta_work"))
                config.provider.theta_work = p.at("theta_work").get<double>();
            if (p.contains("theta_education"))
                config.provider.theta_education = p.at("theta_education").get<double>();
            if (p.contains("theta_other"))
                config.provider.theta_other = p.at("theta_other").get<double>();
            if (p.contains("attraction_work"))
                config.provider.attraction_work =
                    attraction_from_string(p.at("attraction_work").get<std::string>());
            if (p.contains("attraction_education"))
                config.provider.attraction_education =
                    attraction_from_string(p.at("attraction_education").get<std::string>());
            if (p.contains("attraction_other"))
                config.provider.attraction_other =
                    attraction_from_string(p.at("attraction_other").get<std::string>());
        }
        if (j.contains("data")) {
            const json& d = j.at("data");
            if (d.contains("cells"))
                config.cells_csv = resolve(config.base_dir, d.at("cells").get<std::string>());
            if (d.contains("households"))
                config.households_csv =
                    resolve(config.base_dir, d.at("households").get<std::string>());
            if (d.contains("network"))
                config.edges_csv = resolve(config.base_dir, d.at("network").get<std::string>());
            if (d.contains("moving_rates"))
                config.rates_csv = resolve(config.base_dir, d.at("moving_rates").get<std::string>());
        }
        if (j.contains("presets")) {
            const json& p = j.at("presets");
            if (p.contains("hedonic"))
                config.hedonic_preset = resolve(config.base_dir, p.at("hedonic").get<std::string>());
            if (p.contains("segments")) {
                config.segment_presets.clear();
                for (const auto& entry : p.at("segments"))
                    config.segment_presets.push_back(
                        resolve(config.base_dir, entry.get<std::string>()));
            }
        }
        if (j.contains("scenarios")) {
            config.scenarios.clear();
            for (const auto& entry : j.at("scenarios")) {
                ScenarioSpec scenario;
                parse_scenario(entry, scenario);
                config.scenarios.push_back(scenario);
            }
        }
        if (j.contains("external_surfaces")) {
            for (const auto& [name, entry] : j.at("external_surfaces").items()) {
                ExternalSurfacePaths paths;
                paths.surface_csv = resolve(config.base_dir, entry.at("surface").get<std::string>());
                paths.scaling_csv = resolve(config.base_dir, entry.at("scaling").get<std::string>());
                config.external_surfaces[name] = paths;
            }
        }
    } catch (const json::exception& e) {
        throw ConfigError("config '" + path.string() + "': " + e.what());
    }

    std::set<std::string> names;
    for (const auto& scenario : config.scenarios)
        if (!names.insert(scenario.name).second)
            throw ConfigError("duplicate scenario name '" + scenario.name + "'");
    if (!(config.split_fraction > 0.0 && config.split_fraction < 1.0))
        throw ConfigError("split_fraction must be in (0,1)");
    if (config.segment_presets.size() != kNumSegments)
        throw ConfigError("expected " + std::to_string(kNumSegments) + " segment preset paths");
    return config;
}

Dataset load_dataset(const ProjectConfig& config) {
    const auto data_dir = config.out_dir / "data";
    const auto cells_path = config.cells_csv.empty() ? data_dir / "cells.csv" : config.cells_csv;
    const auto households_path =
        config.households_csv.empty() ? data_dir / "households.csv" : config.households_csv;
    const auto edges_path = config.edges_csv.empty() ? data_dir / "network.csv" : config.edges_csv;
    const auto rates_path =
        config.rates_csv.empty() ? data_dir / "moving_rates.csv" : config.rates_csv;
    if (!std::filesystem::exists(cells_path))
        throw ConfigError("no cell table at '" + cells_path.string() +
                          "'; run the generate command or point the config at data files");

    Dataset dataset;
    dataset.cells = read_cells_csv(cells_path);
    dataset.households = read_households_csv(households_path);
    dataset.edges = read_edges_csv(edges_path);
    dataset.rates = read_moving_rates_csv(rates_path);
    validate_cells(dataset.cells);
    validate_households(dataset.households, dataset.cells);
    dataset.oracle = DistanceOracle::from_network(dataset.cells, dataset.edges);
    dataset.distances = dataset.oracle.all_pairs();
    return dataset;
}

Split split_households(std::span<const Household> households, double fraction,
                       std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ConfigError("split fraction must be in (0,1); the validation set may not be empty");
    Rng rng = derive_rng(seed, 0x73706c69ULL); // split stream
    Split split;
    split.estimation = scale_population(households, fraction, rng);
    std::set<HouseholdId> chosen;
    for (const auto& h : split.estimation)
        chosen.insert(h.id);
    for (const auto& h : households)
        if (!chosen.count(h.id))
            split.validation.push_back(h);
    return split;
}

ChoiceSet build_choice_set(const SampledAlternatives& sampled, std::span<const MeshCell> cells,
                           const PolicyState& policy, const AccessibilitySurface& surface,
                           const Household& household) {
    ChoiceSet set;
    set.household = household.id;
    set.segment = household.segment;
    set.chosen_index = sampled.chosen_position;
    set.alternatives.reserve(sampled.cells.size());
    for (std::size_t a = 0; a < sampled.cells.size(); ++a) {
        const std::size_t i = sampled.cells[a];
        const MeshCell& cell = cells[i];
        Alternative alt;
        alt.cell = cell.id;
        const double employees[2] = {policy.effective_primary_secondary[i],
                                     policy.effective_tertiary[i]};
        alt.covariates = choice_covariates(cell, policy.effective_land_price[i], employees);
        alt.aba = household_average_aba(surface, household, i);
        if (!(cell.housing_stock > 0.0))
            throw DataError("alternative cell " + std::to_string(cell.id) +
                            " has no housing stock");
        alt.size_term = std::log(cell.housing_stock);
        alt.sampling_correction = sampled.corrections[a];
        set.alternatives.push_back(std::move(alt));
    }
    return set;
}

std::vector<ChoiceSet> build_estimation_data(const Dataset& dataset,
                                             std::span<const Household> households,
                                             const AccessibilitySurface& surface,
                                             const PolicyState& policy, int n_draws,
                                             std::uint64_t seed) {
    std::vector<char> eligible(dataset.cells.size(), 0);
    for (std::size_t i = 0; i < dataset.cells.size(); ++i)
        eligible[i] = dataset.cells[i].housing_stock > 0.0 ? 1 : 0;

    std::vector<std::size_t> index_of;
    CellId max_id = -1;
    for (const auto& cell : dataset.cells)
        max_id = std::max(max_id, cell.id);
    index_of.assign(static_cast<std::size_t>(max_id) + 1, 0);
    for (std::size_t i = 0; i < dataset.cells.size(); ++i)
        index_of[static_cast<std::size_t>(dataset.cells[i].id)] = i;

    std::vector<ChoiceSet> observations(households.size());
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (std::int64_t i = 0; i < static_cast<std::int64_t>(households.size()); ++i) {
        const Household& household = households[i];
        Rng rng = derive_rng(seed, 0x65737473ULL, static_cast<std::uint64_t>(household.id));
        // Estimation keeps the exact multiset correction: on a desk-scale cell
        // pool the draws saturate the pool and the plain per-draw correction
        // is measurably biased.
        const auto sampled =
            sample_alternatives(policy.effective_land_price, eligible, n_draws, rng,
                                index_of[static_cast<std::size_t>(household.home_cell)],
                                CorrectionMode::Multiset);
        observations[i] = build_choice_set(sampled, dataset.cells, policy, surface, household);
    }
    return observations;
}

std::vector<SegmentCoefficients> load_segment_coefficients(const ProjectConfig& config,
                                                           bool use_preset) {
    std::vector<SegmentCoefficients> coefficients;
    for (int k = 1; k <= kNumSegments; ++k) {
        std::filesystem::path path;
        if (use_preset)
            path = config.segment_presets[static_cast<std::size_t>(k - 1)];
        else
            path = config.out_dir / "estimates" / ("segment_" + std::to_string(k) + ".coef");
        if (!std::filesystem::exists(path))
            throw ConfigError("no coefficients for segment " + std::to_string(k) + " at '" +
                              path.string() + "'" +
                              (use_preset ? "" : "; run the estimate command or pass --preset"));
        SegmentCoefficients c = segment_coefficients_from_file(path);
        if (c.segment != k)
            throw DataError("segment file '" + path.string() + "' declares segment " +
                            std::to_string(c.segment) + ", expected " + std::to_string(k));
        coefficients.push_back(c);
    }
    return coefficients;
}

std::vector<double> load_hedonic_coefficients(const ProjectConfig& config, bool use_preset) {
    const std::filesystem::path path =
        use_preset ? config.hedonic_preset : config.out_dir / "estimates" / "hedonic.coef";
    if (!std::filesystem::exists(path))
        throw ConfigError("no land-price coefficients at '" + path.string() + "'" +
                          (use_preset ? "" : "; run the estimate command or pass --preset"));
    return hedonic_coefficients_from_file(path);
}

namespace {

AccessibilitySurface surface_for_scenario(const ProjectConfig& config, const Dataset& dataset,
                                          const ScenarioSpec& scenario, PolicyState& policy) {
    if (policy.surface) // Policy 2 already rebuilt it
        return *policy.surface;
    const auto external = config.external_surfaces.find(scenario.name);
    if (external != config.external_surfaces.end())
        return read_surface_csv(external->second.surface_csv, external->second.scaling_csv,
                                scenario.name);
    const ScenarioSpec base_spec{};
    const SyntheticAccessibilityProvider base_provider(dataset.cells, dataset.distances,
                                                       config.provider, base_spec);
    const SyntheticAccessibilityProvider scenario_provider(dataset.cells, dataset.distances,
                                                           config.provider, scenario);
    return build_surface(scenario_provider, base_provider, scenario.name);
}

struct ScenarioReportRow {
    std::string name;
    long households = 0;
    double median_daa = 0.0;
    double median_ufaa = 0.0;
    double share_daa = 0.0;
};

void write_comparison_tables(const std::filesystem::path& out_dir,
                             const std::vector<ScenarioReportRow>& rows,
                             const std::string& baseline_name, const std::string& csv_name,
                             const std::string& txt_name) {
    const ScenarioReportRow* baseline = nullptr;
    for (const auto& row : rows)
        if (row.name == baseline_name)
            baseline = &row;
    if (!baseline)
        baseline = &rows.front();

    CsvTable csv;
    csv.header = {"scenario", "n_households", "median_distance_daa_m", "pct_change_daa_vs_" +
                  baseline->name, "median_distance_ufaa_m", "pct_change_ufaa_vs_" + baseline->name,
                  "share_in_daa", "pct_change_share_vs_" + baseline->name};
    std::ostringstream txt;
    txt << "Scenario comparison (baseline: " << baseline->name << ")\n";
    txt << pad("scenario", 10) << pad("households", 11) << pad("median DAA (m)", 15)
        << pad("vs base", 9) << pad("median UFAA (m)", 16) << pad("vs base", 9)
        << pad("share in DAA", 13) << pad("vs base", 9) << '\n';
    for (const auto& row : rows) {
        const double pc_daa = percent_change(row.median_daa, baseline->median_daa);
        const double pc_ufaa = percent_change(row.median_ufaa, baseline->median_ufaa);
        const double pc_share = percent_change(row.share_daa, baseline->share_daa);
        csv.rows.push_back({row.name, std::to_string(row.households), format_double(row.median_daa),
                            fixed(pc_daa, 1), format_double(row.median_ufaa), fixed(pc_ufaa, 1),
                            format_double(row.share_daa), fixed(pc_share, 1)});
        txt << pad(row.name, 10) << pad(std::to_string(row.households), 11)
            << pad(fixed(row.median_daa, 0), 15) << pad(format_percent(pc_daa), 9)
            << pad(fixed(row.median_ufaa, 0), 16) << pad(format_percent(pc_ufaa), 9)
            << pad(fixed(100.0 * row.share_daa, 1) + "%", 13) << pad(format_percent(pc_share), 9)
            << '\n';
    }
    write_csv(out_dir / csv_name, csv);
    std::ofstream txt_out(out_dir / txt_name, std::ios::trunc);
    txt_out << txt.str();
}

void write_summary_csv(const std::filesystem::path& path, const ScenarioOutcome& outcome) {
    CsvTable csv;
    csv.header = {"run",
                  "n_households",
                  "mean_daa_m",
                  "median_daa_m",
                  "min_daa_m",
                  "max_daa_m",
                  "sd_daa_m",
                  "mean_daa_filtered_m",
                  "median_daa_filtered_m",
                  "mean_ufaa_m",
                  "median_ufaa_m",
                  "min_ufaa_m",
                  "max_ufaa_m",
                  "sd_ufaa_m",
                  "mean_ufaa_filtered_m",
                  "median_ufaa_filtered_m",
                  "share_in_daa"};
    const auto emit = [&](const std::string& label, const RunMetrics& m) {
        csv.rows.push_back({label, std::to_string(m.n_households), format_double(m.daa_distance.mean),
                            format_double(m.daa_distance.median), format_double(m.daa_distance.min),
                            format_double(m.daa_distance.max), format_double(m.daa_distance.std_dev),
                            format_double(m.daa_distance_filtered.mean),
                            format_double(m.daa_distance_filtered.median),
                            format_double(m.ufaa_distance.mean), format_double(m.ufaa_distance.median),
                            format_double(m.ufaa_distance.min), format_double(m.ufaa_distance.max),
                            format_double(m.ufaa_distance.std_dev),
                            format_double(m.ufaa_distance_filtered.mean),
                            format_double(m.ufaa_distance_filtered.median),
                            format_double(m.daa_share)});
    };
    for (std::size_t r = 0; r < outcome.per_run.size(); ++r)
        emit(std::to_string(r), outcome.per_run[r]);
    emit("avg", outcome.averaged);
    write_csv(path, csv);
}

void write_histogram_csv(const std::filesystem::path& path, std::span<const double> distances) {
    std::vector<double> edges;
    for (int e = 0; e <= 15; ++e)
        edges.push_back(1000.0 * e);
    const auto shares = distance_histogram(distances, edges);
    CsvTable csv;
    csv.header = {"bin_low_m", "bin_high_m", "share"};
    for (std::size_t b = 0; b < shares.size(); ++b)
        csv.rows.push_back({format_double(edges[b]), format_double(edges[b + 1]),
                            format_double(shares[b])});
    write_csv(path, csv);
}

} // namespace

std::string cmd_generate(const ProjectConfig& config) {
    const Region region =
        generate_synthetic_region(config.synthetic, config.provider, config.seed);
    const auto data_dir = config.out_dir / "data";
    write_cells_csv(data_dir / "cells.csv", region.cells);
    write_households_csv(data_dir / "households.csv", region.households);
    write_edges_csv(data_dir / "network.csv", region.edges);
    write_moving_rates_csv(data_dir / "moving_rates.csv", MovingRateTable::default_table());

    long daa = 0, ufaa = 0;
    double stock = 0.0;
    for (const auto& cell : region.cells) {
        daa += cell.in_daa ? 1 : 0;
        ufaa += cell.in_ufaa ? 1 : 0;
        stock += cell.housing_stock;
    }
    std::ostringstream out;
    out << "generated " << region.cells.size() << " cells (" << daa << " DAA, " << ufaa
        << " UFAA), " << region.households.size() << " households, " << region.edges.size()
        << " network edges, total housing stock " << fixed(stock, 0) << "\n"
        << "data written to " << data_dir.string();
    return out.str();
}

namespace {

std::string segment_report_text(const std::vector<std::optional<EstimationResult>>& results) {
    const auto& names = choice_parameter_names();
    std::ostringstream txt;
    txt << "Residential location model estimation\n";
    txt << pad("variable", 28);
    for (int k = 1; k <= kNumSegments; ++k)
        txt << pad("seg" + std::to_string(k) + " coef", 11) << pad("t", 8);
    txt << '\n';
    for (std::size_t j = 0; j < kNumChoiceParams; ++j) {
        txt << pad(names[j], 28);
        for (const auto& result : results) {
            if (!result) {
                txt << pad("-", 11) << pad("-", 8);
                continue;
            }
            const bool dropped =
                std::find(result->dropped_names.begin(), result->dropped_names.end(), names[j]) !=
                result->dropped_names.end();
            if (dropped) {
                txt << pad("", 11) << pad("", 8);
            } else {
                txt << pad(fixed(result->parameters[j], 4), 11);
                const double t = result->t_values[j];
                txt << pad(std::isnan(t) ? "n/a" : fixed(t, 2), 8);
            }
        }
        txt << '\n';
    }
    txt << pad("size: ln housing stock", 28);
    for (const auto& result : results)
        txt << pad(result ? "1.00" : "-", 11) << pad("-", 8);
    txt << '\n';
    const auto stat_row = [&](const std::string& label, auto getter, int decimals) {
        txt << pad(label, 28);
        for (const auto& result : results)
            txt << pad(result ? fixed(getter(*result), decimals) : "-", 19);
        txt << '\n';
    };
    stat_row("observations", [](const EstimationResult& r) { return double(r.n_observations); }, 0);
    stat_row("initial log likelihood", [](const EstimationResult& r) { return r.ll0; }, 2);
    stat_row("final log likelihood", [](const EstimationResult& r) { return r.ll_final; }, 2);
    stat_row("adjusted rho squared",
             [](const EstimationResult& r) { return r.adjusted_rho_squared; }, 3);
    return txt.str();
}

} // namespace

std::string cmd_estimate(const ProjectConfig& config, const CommandOptions& options) {
    const std::uint64_t seed = options.seed_override.value_or(config.seed);
    Dataset dataset = load_dataset(config);
    const Split split = split_households(dataset.households, config.split_fraction, seed);

    const auto estimates_dir = config.out_dir / "estimates";
    std::filesystem::create_directories(estimates_dir);

    // Land-price model first: its fit feeds the simulate command.
    const HedonicFit hedonic = fit_hedonic(dataset.cells);
    write_hedonic_coefficients(estimates_dir / "hedonic.coef", hedonic.coefficients);
    {
        CsvTable predicted;
        predicted.header = {"cell_id", "predicted_land_price"};
        for (const auto& cell : dataset.cells)
            predicted.rows.push_back(
                {std::to_string(cell.id),
                 format_double(predict_land_price(hedonic.coefficients, cell))});
        write_csv(estimates_dir / "predicted_prices.csv", predicted);
    }
    {
        std::ostringstream txt;
        txt << "Land-price model (dependent: ln land price, JPY/m^2)\n";
        txt << pad("variable", 24) << pad("coef", 12) << pad("t", 10) << '\n';
        for (std::size_t j = 0; j < hedonic.names.size(); ++j)
            txt << pad(hedonic.names[j], 24) << pad(fixed(hedonic.coefficients[j], 4), 12)
                << pad(fixed(hedonic.t_values[j], 2), 10) << '\n';
        txt << pad("observations", 24) << hedonic.n_observations << '\n';
        txt << pad("adjusted R squared", 24) << fixed(hedonic.adjusted_r_squared, 3) << '\n';
        txt << pad("F statistic", 24) << fixed(hedonic.f_statistic, 1) << '\n';
        std::ofstream out(estimates_dir / "hedonic_report.txt", std::ios::trunc);
        out << txt.str();
    }

    const PolicyState policy = make_base_policy_state(dataset.cells);
    const ScenarioSpec base_spec{};
    const SyntheticAccessibilityProvider base_provider(dataset.cells, dataset.distances,
                                                       config.provider, base_spec);
    const AccessibilitySurface surface =
        build_surface(base_provider, base_provider, base_spec.name);

    std::vector<std::vector<Household>> by_segment(kNumSegments);
    for (const auto& household : split.estimation)
        by_segment[static_cast<std::size_t>(household.segment - 1)].push_back(household);

    std::vector<std::optional<EstimationResult>> results(kNumSegments);
    std::vector<std::string> failures;
    CsvTable report_csv;
    report_csv.header = {"segment", "parameter", "coefficient", "t_value", "status"};
    for (int k = 1; k <= kNumSegments; ++k) {
        const auto& households = by_segment[static_cast<std::size_t>(k - 1)];
        try {
            if (households.empty())
                throw DataError("no households in segment " + std::to_string(k));
            const auto observations =
                build_estimation_data(dataset, households, surface, policy, 50, seed);
            EstimationOptions est_options;
            est_options.drop_unidentified = true;
            EstimationResult result = estimate_segment(observations, est_options);
            write_segment_coefficients(estimates_dir / ("segment_" + std::to_string(k) + ".coef"),
                                       result.coefficients());
            const auto& names = choice_parameter_names();
            for (std::size_t j = 0; j < kNumChoiceParams; ++j) {
                const bool dropped = std::find(result.dropped_names.begin(),
                                               result.dropped_names.end(),
                                               names[j]) != result.dropped_names.end();
                report_csv.rows.push_back(
                    {std::to_string(k), names[j],
                     dropped ? "" : format_double(result.parameters[j]),
                     dropped || std::isnan(result.t_values[j])
                         ? ""
                         : format_double(result.t_values[j]),
                     dropped ? "excluded" : "estimated"});
            }
            report_csv.rows.push_back({std::to_string(k), "initial_log_likelihood",
                                       format_double(result.ll0), "", ""});
            report_csv.rows.push_back({std::to_string(k), "final_log_likelihood",
                                       format_double(result.ll_final), "", ""});
            report_csv.rows.push_back({std::to_string(k), "adjusted_rho_squared",
                                       format_double(result.adjusted_rho_squared), "", ""});
            report_csv.rows.push_back({std::to_string(k), "n_observations",
                                       std::to_string(result.n_observations), "", ""});
            results[static_cast<std::size_t>(k - 1)] = std::move(result);
        } catch (const Error& e) {
            // A failed segment must not abort the others.
            failures.push_back("segment " + std::to_string(k) + ": " + e.what());
            report_csv.rows.push_back({std::to_string(k), "error", "", "", e.what()});
        }
    }
    write_csv(estimates_dir / "estimation_report.csv", report_csv);
    {
        std::ofstream out(estimates_dir / "estimation_report.txt", std::ios::trunc);
        out << segment_report_text(results);
        for (const auto& failure : failures)
            out << "FAILED " << failure << '\n';
    }

    std::ostringstream out;
    out << "estimation split: " << split.estimation.size() << " households ("
        << fixed(100.0 * config.split_fraction, 0) << "%), validation holdout "
        << split.validation.size() << "\n";
    out << "land-price fit: adjusted R^2 " << fixed(hedonic.adjusted_r_squared, 3) << ", F "
        << fixed(hedonic.f_statistic, 1) << " on " << hedonic.n_observations << " cells\n";
    for (int k = 1; k <= kNumSegments; ++k) {
        const auto& result = results[static_cast<std::size_t>(k - 1)];
        if (result)
            out << "segment " << k << ": n=" << result->n_observations << " LL0="
                << fixed(result->ll0, 2) << " LL=" << fixed(result->ll_final, 2)
                << " adj rho^2=" << fixed(result->adjusted_rho_squared, 3) << "\n";
    }
    for (const auto& failure : failures)
        out << "FAILED " << failure << "\n";
    out << "reports written to " << estimates_dir.string();
    if (!failures.empty())
        throw DataError(out.str());
    return out.str();
}

std::string cmd_validate(const ProjectConfig& config, const CommandOptions& options) {
    const std::uint64_t seed = options.seed_override.value_or(config.seed);
    Dataset dataset = load_dataset(config);
    const Split split = split_households(dataset.households, config.split_fraction, seed);
    const auto coefficients = load_segment_coefficients(config, options.use_preset);

    const PolicyState policy = make_base_policy_state(dataset.cells);
    const ScenarioSpec base_spec{};
    const SyntheticAccessibilityProvider base_provider(dataset.cells, dataset.distances,
                                                       config.provider, base_spec);
    const AccessibilitySurface surface =
        build_surface(base_provider, base_provider, base_spec.name);

    // Everyone in the holdout receives a simulated residential choice.
    const MovingRateTable always_move({{0, 200, 0.0}});
    RelocationInputs inputs;
    inputs.cells = dataset.cells;
    inputs.surface = &surface;
    inputs.segment_coefficients = coefficients;
    inputs.policy = &policy;
    inputs.rates = &always_move;

    ScenarioSpec validation_spec = base_spec;
    validation_spec.name = "validation";
    validation_spec.n_monte_carlo_runs = options.runs_override > 0 ? options.runs_override : 10;

    const ScenarioOutcome simulated = run_scenario(split.validation, inputs, dataset.oracle,
                                                   validation_spec, seed);

    std::vector<CellId> observed_cells;
    observed_cells.reserve(split.validation.size());
    for (const auto& household : split.validation)
        observed_cells.push_back(household.home_cell);
    const RunMetrics observed = compute_run_metrics(observed_cells, dataset.cells, dataset.oracle);

    std::filesystem::create_directories(config.out_dir);
    CsvTable csv;
    csv.header = {"indicator", "source", "mean", "median", "min", "max", "std_dev"};
    const auto emit = [&](const std::string& indicator, const std::string& source,
                          const SummaryStats& s) {
        csv.rows.push_back({indicator, source, format_double(s.mean), format_double(s.median),
                            format_double(s.min), format_double(s.max), format_double(s.std_dev)});
    };
    emit("distance_daa_m", "observed", observed.daa_distance);
    emit("distance_daa_m", "simulated", simulated.averaged.daa_distance);
    emit("distance_daa_m_within_10km", "observed", observed.daa_distance_filtered);
    emit("distance_daa_m_within_10km", "simulated", simulated.averaged.daa_distance_filtered);
    emit("distance_ufaa_m", "observed", observed.ufaa_distance);
    emit("distance_ufaa_m", "simulated", simulated.averaged.ufaa_distance);
    emit("distance_ufaa_m_within_10km", "observed", observed.ufaa_distance_filtered);
    emit("distance_ufaa_m_within_10km", "simulated", simulated.averaged.ufaa_distance_filtered);
    csv.rows.push_back({"share_in_daa", "observed", format_double(observed.daa_share), "", "", "",
                        ""});
    csv.rows.push_back({"share_in_daa", "simulated", format_double(simulated.averaged.daa_share),
                        "", "", "", ""});
    write_csv(config.out_dir / "validation_report.csv", csv);

    std::ostringstream txt;
    txt << "Residential location model validation (" << validation_spec.n_monte_carlo_runs
        << "-run Monte-Carlo average, holdout " << split.validation.size() << " households)\n";
    txt << pad("indicator", 30) << pad("source", 12) << pad("mean", 9) << pad("median", 9)
        << pad("min", 8) << pad("max", 9) << pad("sd", 9) << '\n';
    const auto row = [&](const std::string& label, const std::string& source,
                         const SummaryStats& s) {
        txt << pad(label, 30) << pad(source, 12) << pad(fixed(s.mean, 0), 9)
            << pad(fixed(s.median, 0), 9) << pad(fixed(s.min, 0), 8) << pad(fixed(s.max, 0), 9)
            << pad(fixed(s.std_dev, 0), 9) << '\n';
    };
    row("distance to DAA (m)", "observed", observed.daa_distance);
    row("distance to DAA (m)", "simulated", simulated.averaged.daa_distance);
    row("  within 10,000 m", "observed", observed.daa_distance_filtered);
    row("  within 10,000 m", "simulated", simulated.averaged.daa_distance_filtered);
    row("distance to UFAA (m)", "observed", observed.ufaa_distance);
    row("distance to UFAA (m)", "simulated", simulated.averaged.ufaa_distance);
    row("  within 10,000 m", "observed", observed.ufaa_distance_filtered);
    row("  within 10,000 m", "simulated", simulated.averaged.ufaa_distance_filtered);
    const long observed_in_daa =
        std::lround(observed.daa_share * static_cast<double>(observed.n_households));
    const double simulated_in_daa =
        simulated.averaged.daa_share * static_cast<double>(simulated.averaged.n_households);
    txt << pad("households in DAA", 30) << pad("observed", 12) << observed_in_daa << " ("
        << fixed(100.0 * observed.daa_share, 1) << "%)\n";
    txt << pad("households in DAA", 30) << pad("simulated", 12) << fixed(simulated_in_daa, 1)
        << " (" << fixed(100.0 * simulated.averaged.daa_share, 1) << "%)\n";
    std::ofstream txt_out(config.out_dir / "validation_report.txt", std::ios::trunc);
    txt_out << txt.str();

    return txt.str() + "reports written to " + config.out_dir.string();
}

std::string cmd_simulate(const ProjectConfig& config, const CommandOptions& options) {
    Dataset dataset = load_dataset(config);
    const auto coefficients = load_segment_coefficients(config, options.use_preset);
    const auto hedonic_coefficients = load_hedonic_coefficients(config, options.use_preset);

    std::vector<std::string> names = options.scenario_names;
    if (names.empty())
        names = {"base", "s1", "s2"};

    const auto scenarios_dir = config.out_dir / "scenarios";
    std::filesystem::create_directories(scenarios_dir);

    std::vector<ScenarioReportRow> rows;
    std::vector<std::pair<std::string, std::vector<double>>> cell_counts;
    std::ostringstream out;
    for (const auto& name : names) {
        ScenarioSpec scenario = config.scenario_by_name(name);
        if (options.runs_override > 0)
            scenario.n_monte_carlo_runs = options.runs_override;
        validate_scenario(scenario);
        const std::uint64_t seed =
            options.seed_override.value_or(scenario.seed != 0 ? scenario.seed : config.seed);

        PolicyState policy = make_base_policy_state(dataset.cells);
        if (scenario.policy2_ufaa_employee_boost > 0.0)
            apply_policy2(policy, dataset.cells, dataset.distances,
                          scenario.policy2_ufaa_employee_boost, config.provider, scenario,
                          hedonic_coefficients);
        if (scenario.policy1_subsidy_rate > 0.0)
            apply_policy1(policy, dataset.cells, scenario.policy1_subsidy_rate);

        const AccessibilitySurface surface =
            surface_for_scenario(config, dataset, scenario, policy);
        write_surface_csv(config.out_dir / "surfaces" / (name + "_surface.csv"),
                          config.out_dir / "surfaces" / (name + "_scaling.csv"), surface);

        Rng scale_rng = derive_rng(seed, 0x7363616cULL);
        const std::vector<Household> scaled =
            scale_population(dataset.households, scenario.population_ratio, scale_rng);

        RelocationInputs inputs;
        inputs.cells = dataset.cells;
        inputs.surface = &surface;
        inputs.segment_coefficients = coefficients;
        inputs.policy = &policy;
        inputs.rates = &dataset.rates;

        const ScenarioOutcome outcome = run_scenario(scaled, inputs, dataset.oracle, scenario,
                                                     seed, config.resample_moves_per_run);

        write_summary_csv(scenarios_dir / (name + "_summary.csv"), outcome);
        CsvTable outcomes;
        outcomes.header = {"run", "household_id", "moved", "final_cell"};
        for (const auto& run : outcome.runs)
            for (std::size_t i = 0; i < run.outcomes.size(); ++i)
                outcomes.rows.push_back({std::to_string(run.run_index),
                                         std::to_string(scaled[i].id),
                                         run.outcomes[i].moved ? "1" : "0",
                                         std::to_string(run.outcomes[i].final_cell)});
        write_csv(scenarios_dir / (name + "_outcomes.csv"), outcomes);
        CsvTable counts;
        counts.header = {"cell_id", "mean_households"};
        for (std::size_t i = 0; i < dataset.cells.size(); ++i)
            counts.rows.push_back({std::to_string(dataset.cells[i].id),
                                   format_double(outcome.mean_cell_counts[i])});
        write_csv(scenarios_dir / (name + "_cell_counts.csv"), counts);
        write_histogram_csv(scenarios_dir / (name + "_hist_daa.csv"), outcome.final_distances_daa);
        write_histogram_csv(scenarios_dir / (name + "_hist_ufaa.csv"),
                            outcome.final_distances_ufaa);

        rows.push_back({name, outcome.averaged.n_households, outcome.averaged.daa_distance.median,
                        outcome.averaged.ufaa_distance.median, outcome.averaged.daa_share});
        cell_counts.emplace_back(name, outcome.mean_cell_counts);
        out << name << ": " << scaled.size() << " households, median DAA distance "
            << fixed(outcome.averaged.daa_distance.median, 0) << " m, share in DAA "
            << fixed(100.0 * outcome.averaged.daa_share, 1) << "%\n";
    }

    std::string baseline = names.front();
    for (const auto& name : names)
        if (name == "base")
            baseline = name;
    write_comparison_tables(config.out_dir, rows, baseline, "comparison.csv", "comparison.txt");

    // Per-cell differences against the baseline (mean households per cell).
    const auto baseline_it =
        std::find_if(cell_counts.begin(), cell_counts.end(),
                     [&](const auto& entry) { return entry.first == baseline; });
    for (const auto& [name, counts] : cell_counts) {
        if (name == baseline)
            continue;
        CsvTable diff;
        diff.header = {"cell_id", "mean_households_minus_" + baseline};
        for (std::size_t i = 0; i < counts.size(); ++i)
            diff.rows.push_back({std::to_string(dataset.cells[i].id),
                                 format_double(counts[i] - baseline_it->second[i])});
        write_csv(scenarios_dir / (name + "_cell_counts_diff.csv"), diff);
    }

    out << "comparison tables written to " << config.out_dir.string();
    return out.str();
}

std::string cmd_report_diff(const ProjectConfig& config, const CommandOptions& options) {
    std::vector<std::string> names = options.scenario_names;
    if (names.empty())
        names = {"base", "s1", "s2"};
    std::vector<ScenarioReportRow> rows;
    for (const auto& name : names) {
        const auto path = config.out_dir / "scenarios" / (name + "_summary.csv");
        if (!std::filesystem::exists(path))
            throw ConfigError("no summary for scenario '" + name + "' at '" + path.string() +
                              "'; run the simulate command first");
        const CsvTable csv = read_csv(path);
        const std::size_t run = csv.column("run"), hh = csv.column("n_households"),
                          mdaa = csv.column("median_daa_m"), mufaa = csv.column("median_ufaa_m"),
                          share = csv.column("share_in_daa");
        bool found = false;
        for (const auto& row : csv.rows) {
            if (row[run] != "avg")
                continue;
            rows.push_back({name, parse_int(row[hh], "n_households"),
                            parse_double(row[mdaa], "median_daa_m"),
                            parse_double(row[mufaa], "median_ufaa_m"),
                            parse_double(row[share], "share_in_daa")});
            found = true;
        }
        if (!found)
            throw DataError("summary for '" + name + "' has no averaged row");
    }
    write_comparison_tables(config.out_dir, rows, names.front(), "diff_report.csv",
                            "diff_report.txt");
    std::ifstream txt(config.out_dir / "diff_report.txt");
    std::ostringstream out;
    out << txt.rdbuf();
    out << "diff report written to " << (config.out_dir / "diff_report.csv").string();
    return out.str();
}

} // namespace relosim
