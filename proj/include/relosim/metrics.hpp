#pragma once

#include <limits>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "relosim/domain.hpp"

namespace relosim {

inline constexpr double kUnreachable = std::numeric_limits<double>::infinity();

// Shortest-path distances over the cell-centroid network (undirected, weighted
// in meters), with a Euclidean fallback mode. Cells map one-to-one to nodes.
// Multi-target queries cache one multi-source sweep per target set; populate
// caches before sharing across threads.
class DistanceOracle {
public:
    static DistanceOracle from_network(std::span<const MeshCell> cells,
                                       std::span<const NetworkEdge> edges);
    static DistanceOracle euclidean(std::span<const MeshCell> cells);

    std::size_t n_cells() const { return n_; }
    bool graph_mode() const { return graph_mode_; }

    // Single-source distances to every cell (kUnreachable when disconnected).
    std::vector<double> distances_from(std::size_t source) const;

    // Distance from every cell to its nearest target (one Dijkstra sweep
    // seeded with all targets). Cached per target set.
    const std::vector<double>& to_nearest(const std::vector<std::size_t>& targets) const;

    // Dense all-pairs matrix, row-major [source * n + dest]. `parallel` runs
    // one source per thread; both orderings produce identical bits.
    std::vector<double> all_pairs(bool parallel = true) const;
    std::vector<double> all_pairs_serial() const { return all_pairs(false); }

private:
    std::size_t n_ = 0;
    bool graph_mode_ = false;
    std::vector<double> xs_, ys_;
    // CSR adjacency
    std::vector<std::size_t> offsets_;
    std::vector<std::size_t> neighbors_;
    std::vector<double> weights_;
    mutable std::map<std::vector<std::size_t>, std::vector<double>> nearest_cache_;

    std::vector<double> dijkstra(std::span<const std::size_t> sources) const;
};

// 0 when the residence is itself a target, kUnreachable when disconnected.
// Throws DataError on an empty target set.
double nearest_target_distance(const DistanceOracle& oracle, std::size_t residence,
                               const std::vector<std::size_t>& targets);

struct SummaryStats {
    long count = 0;
    double mean = 0.0;
    double median = 0.0;
    double min = 0.0;
    double max = 0.0;
    double std_dev = 0.0; // sample standard deviation (n-1); 0 when count < 2
    long excluded_unreachable = 0;
    long excluded_by_filter = 0;
};

// Summary of a distance sample. Values strictly greater than
// `filter_threshold` are removed (when given); unreachable sentinels are
// always excluded and counted. Throws DataError when nothing survives.
SummaryStats summarize(std::span<const double> values,
                       std::optional<double> filter_threshold = std::nullopt);

// Share of households whose final cell lies in the DAA.
double daa_share(std::span<const CellId> final_cells, std::span<const MeshCell> cells);

// 100 * (value - baseline) / baseline. Throws DomainError on a zero baseline.
double percent_change(double value, double baseline);

// Formats a signed percent at one decimal, e.g. "+7.2%".
std::string format_percent(double percent);

// Shares per bin [e0,e1), ..., [e_{k-2}, e_{k-1}] normalized over the values
// that fall inside the edge range. Edges must be strictly increasing.
std::vector<double> distance_histogram(std::span<const double> values,
                                       std::span<const double> edges);

} // namespace relosim
