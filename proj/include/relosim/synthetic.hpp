#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "relosim/accessibility.hpp"
#include "relosim/domain.hpp"
#include "relosim/hedonic.hpp"

namespace relosim {

// Stand-in for survey and mesh-statistics inputs: a monocentric square-grid
// region with a central UFAA/DAA cluster, prices decaying from the center,
// and households placed proportionally to housing stock. Every knob is
// exposed so tests can build degenerate geometries.
struct SyntheticConfig {
    int n_cells = 100;
    long n_households = 5000;
    double cell_size_m = 1000.0;
    double centroid_jitter_fraction = 0.15; // of cell size; 0 gives an exact lattice

    double ufaa_radius_fraction = 0.12; // of the grid extent
    double daa_radius_fraction = 0.22;
    double takasaki_radius_fraction = 0.18;
    double secondary_city_radius_fraction = 0.10;

    double stock_center = 220.0;  // dwellings in the central cell
    double stock_scale_fraction = 0.30;
    double tertiary_center = 2.5; // thousand employees
    double tertiary_scale_fraction = 0.20;
    double primary_secondary_base = 1.2;

    // True land-price process: hedonic-schema coefficients plus log-scale noise.
    std::array<double, kHedonicK> price_coefficients = {
        9.8, 0.0, 0.15, 0.043, 0.13, 0.30, 0.21, 0.0, 0.0, -0.11, -0.48, 0.0, 0.0, -0.58};
    double price_noise_sigma = 0.10;
};

struct Region {
    std::vector<MeshCell> cells;
    std::vector<Household> households;
    std::vector<NetworkEdge> edges;
};

// Deterministic for a fixed (config, provider_config, seed). Throws
// DomainError when n_cells < 4 or n_households < 1.
Region generate_synthetic_region(const SyntheticConfig& config,
                                 const ProviderConfig& provider_config, std::uint64_t seed);

} // namespace relosim
