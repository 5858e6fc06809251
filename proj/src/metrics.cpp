#include "relosim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <queue>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace relosim {

DistanceOracle DistanceOracle::from_network(std::span<const MeshCell> cells,
                                            std::span<const NetworkEdge> edges) {
    DistanceOracle oracle;
    oracle.n_ = cells.size();
    oracle.graph_mode_ = true;

    std::vector<std::size_t> degree(oracle.n_, 0);
    for (const auto& edge : edges) {
        if (edge.from < 0 || edge.to < 0 || static_cast<std::size_t>(edge.from) >= oracle.n_ ||
            static_cast<std::size_t>(edge.to) >= oracle.n_)
            throw DataError("network edge references an unknown cell");
        if (edge.length_m < 0.0)
            throw DataError("network edge with negative length");
        ++degree[static_cast<std::size_t>(edge.from)];
        ++degree[static_cast<std::size_t>(edge.to)];
    }
    oracle.offsets_.assign(oracle.n_ + 1, 0);
    for (std::size_t i = 0; i < oracle.n_; ++i)
        oracle.offsets_[i + 1] = oracle.offsets_[i] + degree[i];
    oracle.neighbors_.resize(oracle.offsets_.back());
    oracle.weights_.resize(oracle.offsets_.back());
    std::vector<std::size_t> cursor(oracle.offsets_.begin(), oracle.offsets_.end() - 1);
    for (const auto& edge : edges) {
        const auto u = static_cast<std::size_t>(edge.from);
        const auto v = static_cast<std::size_t>(edge.to);
        oracle.neighbors_[cursor[u]] = v;
        oracle.weights_[cursor[u]++] = edge.length_m;
        oracle.neighbors_[cursor[v]] = u;
        oracle.weights_[cursor[v]++] = edge.length_m;
    }
    return oracle;
}

DistanceOracle DistanceOracle::euclidean(std::span<const MeshCell> cells) {
    DistanceOracle oracle;
    oracle.n_ = cells.size();
    oracle.graph_mode_ = false;
    oracle.xs_.reserve(oracle.n_);
    oracle.ys_.reserve(oracle.n_);
    for (const auto& cell : cells) {
        oracle.xs_.push_back(cell.x);
        oracle.ys_.push_back(cell.y);
    }
    return oracle;
}

std::vector<double> DistanceOracle::dijkstra(std::span<const std::size_t> sources) const {
    std::vector<double> dist(n_, kUnreachable);
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
    for (std::size_t s : sources) {
        dist[s] = 0.0;
        heap.emplace(0.0, s);
    }
    while (!heap.empty()) {
        const auto [d, u] = heap.top();
        heap.pop();
        if (d > dist[u])
            continue;
        for (std::size_t e = offsets_[u]; e < offsets_[u + 1]; ++e) {
            const std::size_t v = neighbors_[e];
            const double nd = d + weights_[e];
            if (nd < dist[v]) {
                dist[v] = nd;
                heap.emplace(nd, v);
            }
        }
    }
    return dist;
}

std::vector<double> DistanceOracle::distances_from(std::size_t source) const {
    if (source >= n_)
        throw ContractError("distances_from: source out of range");
    if (!graph_mode_) {
        std::vector<double> dist(n_);
        for (std::size_t i = 0; i < n_; ++i)
            dist[i] = std::hypot(xs_[i] - xs_[source], ys_[i] - ys_[source]);
        return dist;
    }
    const std::size_t src[1] = {source};
    return dijkstra(src);
}

const std::vector<double>& DistanceOracle::to_nearest(const std::vector<std::size_t>& targets) const {
    if (targets.empty())
        throw DataError("to_nearest: empty target set");
    std::vector<std::size_t> key = targets;
    std::sort(key.begin(), key.end());
    key.erase(std::unique(key.begin(), key.end()), key.end());
    if (key.back() >= n_)
        throw ContractError("to_nearest: target out of range");
    auto it = nearest_cache_.find(key);
    if (it != nearest_cache_.end())
        return it->second;

    std::vector<double> dist;
    if (graph_mode_) {
        dist = dijkstra(key);
    } else {
        dist.assign(n_, kUnreachable);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t t : key)
                dist[i] = std::min(dist[i], std::hypot(xs_[i] - xs_[t], ys_[i] - ys_[t]));
    }
    return nearest_cache_.emplace(std::move(key), std::move(dist)).first->second;
}

std::vector<double> DistanceOracle::all_pairs(bool parallel) const {
    std::vector<double> matrix(n_ * n_, 0.0);
#ifdef _OPENMP
#pragma omp parallel for schedule(static) if (parallel)
#endif
    for (std::int64_t s = 0; s < static_cast<std::int64_t>(n_); ++s) {
        const auto row = distances_from(static_cast<std::size_t>(s));
        std::copy(row.begin(), row.end(), matrix.begin() + s * static_cast<std::int64_t>(n_));
    }
    (void)parallel;
    return matrix;
}

double nearest_target_distance(const DistanceOracle& oracle, std::size_t residence,
                               const std::vector<std::size_t>& targets) {
    if (targets.empty())
        throw DataError("nearest_target_distance: empty target set");
    for (std::size_t t : targets)
        if (t == residence)
            return 0.0;
    return oracle.to_nearest(targets)[residence];
}

SummaryStats summarize(std::span<const double> values, std::optional<double> filter_threshold) {
    SummaryStats stats;
    std::vector<double> kept;
    kept.reserve(values.size());
    for (double v : values) {
        if (!std::isfinite(v)) {
            ++stats.excluded_unreachable;
            continue;
        }
        if (filter_threshold && v > *filter_threshold) {
            ++stats.excluded_by_filter;
            continue;
        }
        kept.push_back(v);
    }
    if (kept.empty())
        throw DataError("summarize: no values remain after filtering");

    std::sort(kept.begin(), kept.end());
    stats.count = static_cast<long>(kept.size());
    stats.min = kept.front();
    stats.max = kept.back();
    const std::size_t n = kept.size();
    stats.median = (n % 2 == 1) ? kept[n / 2] : 0.5 * (kept[n / 2 - 1] + kept[n / 2]);
    double sum = 0.0;
    for (double v : kept)
        sum += v;
    stats.mean = sum / static_cast<double>(n);
    if (n > 1) {
        double ss = 0.0;
        for (double v : kept)
            ss += (v - stats.mean) * (v - stats.mean);
        stats.std_dev = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return stats;
}

double daa_share(std::span<const CellId> final_cells, std::span<const MeshCell> cells) {
    if (final_cells.empty())
        throw DataError("daa_share: no household outcomes");
    CellId max_id = -1;
    for (const auto& cell : cells)
        max_id = std::max(max_id, cell.id);
    std::vector<char> in_daa(static_cast<std::size_t>(max_id) + 1, 0);
    for (const auto& cell : cells)
        in_daa[static_cast<std::size_t>(cell.id)] = cell.in_daa ? 1 : 0;
    long count = 0;
    for (CellId c : final_cells) {
        if (c < 0 || c > max_id)
            throw DataError("daa_share: outcome references unknown cell " + std::to_string(c));
        count += in_daa[static_cast<std::size_t>(c)];
    }
    return static_cast<double>(count) / static_cast<double>(final_cells.size());
}

double percent_change(double value, double baseline) {
    if (baseline == 0.0)
        throw DomainError("percent_change: zero baseline");
    return 100.0 * (value - baseline) / baseline;
}

std::string format_percent(double percent) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%+.1f%%", percent);
    return buf;
}

std::vector<double> distance_histogram(std::span<const double> values,
                                       std::span<const double> edges) {
    if (edges.size() < 2)
        throw DataError("distance_histogram: need at least two bin edges");
    for (std::size_t i = 1; i < edges.size(); ++i)
        if (!(edges[i] > edges[i - 1]))
            throw DataError("distance_histogram: edges must be strictly increasing");

    std::vector<double> counts(edges.size() - 1, 0.0);
    double included = 0.0;
    for (double v : values) {
        if (v < edges.front() || v > edges.back())
            continue;
        // Last bin is closed on the right.
        std::size_t bin = edges.size() - 2;
        for (std::size_t i = 1; i < edges.size(); ++i) {
            if (v < edges[i]) {
                bin = i - 1;
                break;
            }
        }
        counts[bin] += 1.0;
        included += 1.0;
    }
    if (included > 0.0)
        for (double& c : counts)
            c /= included;
    return counts;
}

} // namespace relosim
