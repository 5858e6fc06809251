#include "relosim/synthetic.hpp"

#include <algorithm>
#include <cmath>

#include "relosim/metrics.hpp"
#include "relosim/rng.hpp"

namespace relosim {

namespace {

struct CityCenter {
    City city;
    double fx, fy; // position as a fraction of the grid extent
    double radius_fraction;
};

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

} // namespace

Region generate_synthetic_region(const SyntheticConfig& config,
                                 const ProviderConfig& provider_config, std::uint64_t seed) {
    if (config.n_cells < 4)
        throw DomainError("generate_synthetic_region: need at least 4 cells");
    if (config.n_households < 1)
        throw DomainError("generate_synthetic_region: need at least 1 household");

    const int n = config.n_cells;
    const int grid = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const double extent = grid * config.cell_size_m;
    const double cx = extent / 2.0;
    const double cy = extent / 2.0;

    Region region;
    region.cells.resize(n);

    Rng cell_rng = derive_rng(seed, 0x63656c6cULL); // cell attributes

    const CityCenter city_centers[] = {
        {City::Takasaki, 0.5, 0.5, config.takasaki_radius_fraction},
        {City::Maebashi, 0.72, 0.72, config.secondary_city_radius_fraction},
        {City::Ota, 0.25, 0.22, config.secondary_city_radius_fraction},
        {City::Isesaki, 0.78, 0.28, config.secondary_city_radius_fraction},
        {City::Kiryu, 0.22, 0.78, config.secondary_city_radius_fraction},
    };

    double max_center_dist = 0.0;
    for (int i = 0; i < n; ++i) {
        MeshCell& cell = region.cells[i];
        cell.id = i;
        const int col = i % grid;
        const int row = i / grid;
        const double jitter = config.centroid_jitter_fraction;
        cell.x = (col + 0.5 + jitter * (2.0 * cell_rng.next_double() - 1.0)) * config.cell_size_m;
        cell.y = (row + 0.5 + jitter * (2.0 * cell_rng.next_double() - 1.0)) * config.cell_size_m;
        max_center_dist = std::max(max_center_dist, std::hypot(cell.x - cx, cell.y - cy));
    }

    int closest_to_center = 0;
    double closest_dist = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i) {
        MeshCell& cell = region.cells[i];
        const double dist = std::hypot(cell.x - cx, cell.y - cy);
        if (dist < closest_dist) {
            closest_dist = dist;
            closest_to_center = i;
        }

        cell.in_ufaa = dist <= config.ufaa_radius_fraction * extent;
        cell.in_daa = dist <= config.daa_radius_fraction * extent;

        cell.city = City::Other;
        for (const auto& center : city_centers) {
            const double d =
                std::hypot(cell.x - center.fx * extent, cell.y - center.fy * extent);
            if (d <= center.radius_fraction * extent) {
                cell.city = center.city;
                break;
            }
        }

        const double rel = dist / std::max(max_center_dist, 1.0);
        double building = clamp01(0.05 + 0.45 * std::exp(-3.0 * rel) + 0.04 * cell_rng.next_double());
        double agricultural = clamp01(0.45 * (1.0 - std::exp(-3.0 * rel)) * (0.6 + 0.4 * cell_rng.next_double()));
        double forest = clamp01(0.30 * rel * rel * (0.5 + cell_rng.next_double()));
        double freshwater = 0.04 * cell_rng.next_double();
        double industrial = cell_rng.next_double() < 0.25 ? 0.05 + 0.10 * cell_rng.next_double() : 0.0;
        const double total = building + agricultural + forest + freshwater + industrial;
        if (total > 0.95) {
            const double scale = 0.95 / total;
            building *= scale;
            agricultural *= scale;
            forest *= scale;
            freshwater *= scale;
            industrial *= scale;
        }
        cell.share_building = building;
        cell.share_agricultural = agricultural;
        cell.share_forest = forest;
        cell.share_freshwater = freshwater;
        cell.share_industrial = industrial;

        // Tertiary employment clusters around every city center (polycentric),
        // primary/secondary follows the industrial pockets; distinct fields
        // keep the tour-logsum covariates separately identified.
        const double t_scale = config.tertiary_scale_fraction * extent;
        double city_proximity = std::exp(-dist / t_scale);
        for (const auto& center : city_centers) {
            const double d =
                std::hypot(cell.x - center.fx * extent, cell.y - center.fy * extent);
            city_proximity = std::max(city_proximity, 0.7 * std::exp(-d / (0.6 * t_scale)));
        }
        cell.employees_tertiary = 0.01 + config.tertiary_center * city_proximity *
                                             (0.7 + 0.6 * cell_rng.next_double());
        cell.employees_primary_secondary =
            config.primary_secondary_base * (0.3 + 3.0 * industrial + 0.5 * cell_rng.next_double());

        const double s_scale = config.stock_scale_fraction * extent;
        cell.housing_stock = std::floor(
            config.stock_center * std::exp(-dist / s_scale) * (0.5 + cell_rng.next_double()));
    }
    // The central cluster always exists, even on degenerate grids.
    region.cells[closest_to_center].in_ufaa = true;
    region.cells[closest_to_center].in_daa = true;
    for (auto& cell : region.cells)
        if (cell.in_ufaa)
            cell.in_daa = true;

    // Grid adjacency; edge lengths are centroid distances.
    for (int i = 0; i < n; ++i) {
        const int col = i % grid;
        if (col + 1 < grid && i + 1 < n)
            region.edges.push_back({static_cast<CellId>(i), static_cast<CellId>(i + 1),
                                    std::hypot(region.cells[i + 1].x - region.cells[i].x,
                                               region.cells[i + 1].y - region.cells[i].y)});
        if (i + grid < n)
            region.edges.push_back({static_cast<CellId>(i), static_cast<CellId>(i + grid),
                                    std::hypot(region.cells[i + grid].x - region.cells[i].x,
                                               region.cells[i + grid].y - region.cells[i].y)});
    }

    // Tour logsums feed the price model, so they come before prices.
    const DistanceOracle oracle = DistanceOracle::from_network(region.cells, region.edges);
    const std::vector<double> distances = oracle.all_pairs();
    const auto ls_work = tour_logsum(region.cells, distances, TourPurpose::Work, provider_config);
    const auto ls_edu =
        tour_logsum(region.cells, distances, TourPurpose::Education, provider_config);
    const auto ls_other = tour_logsum(region.cells, distances, TourPurpose::Other, provider_config);
    for (int i = 0; i < n; ++i) {
        region.cells[i].logsum_work = ls_work[i];
        region.cells[i].logsum_education = ls_edu[i];
        region.cells[i].logsum_other = ls_other[i];
    }

    for (int i = 0; i < n; ++i) {
        MeshCell& cell = region.cells[i];
        const auto covariates = hedonic_covariates(cell);
        double lp = 0.0;
        for (std::size_t j = 0; j < kHedonicK; ++j)
            lp += config.price_coefficients[j] * covariates[j];
        lp += config.price_noise_sigma * cell_rng.next_normal();
        cell.land_price = std::exp(lp);
    }

    // Housing stock must be able to host every household.
    double total_stock = 0.0;
    for (const auto& cell : region.cells)
        total_stock += cell.housing_stock;
    if (total_stock < static_cast<double>(config.n_households)) {
        const double scale =
            (static_cast<double>(config.n_households) + 1.0) / std::max(total_stock, 1.0);
        for (auto& cell : region.cells)
            cell.housing_stock = std::ceil(cell.housing_stock * scale);
    }

    validate_cells(region.cells);

    // Households placed proportionally to housing stock.
    Rng household_rng = derive_rng(seed, 0x686f7573ULL);
    std::vector<double> cumulative;
    cumulative.reserve(n);
    double acc = 0.0;
    for (const auto& cell : region.cells) {
        acc += cell.housing_stock;
        cumulative.push_back(acc);
    }

    region.households.reserve(config.n_households);
    for (long h = 0; h < config.n_households; ++h) {
        Household household;
        household.id = h;
        household.home_cell = region.cells[household_rng.next_weighted_index(cumulative)].id;
        household.age_of_head = 20 + static_cast<int>(household_rng.next_below(76)); // 20..95

        int max_members = 3;
        if (household.age_of_head < 50)
            max_members = 5;
        else if (household.age_of_head < 65)
            max_members = 4;
        household.n_members = 1 + static_cast<int>(household_rng.next_below(max_members));

        const bool head_works = household.age_of_head < 65;
        household.n_workers = head_works ? 1 : 0;
        household.n_unemployed = head_works ? 0 : 1;
        if (household.n_members >= 2) {
            if (household_rng.next_bernoulli(head_works ? 0.6 : 0.2))
                ++household.n_workers;
            else
                ++household.n_unemployed;
        }
        for (int m = 2; m < household.n_members; ++m) {
            const double u = household_rng.next_double();
            if (u < 0.2)
                continue; // under six: counted in members, no category
            if (u < 0.8)
                ++household.n_students;
            else
                ++household.n_unemployed;
        }
        household.segment = assign_segment(household.age_of_head, household.n_members);
        region.households.push_back(household);
    }

    validate_households(region.households, region.cells);
    return region;
}

} // namespace relosim
