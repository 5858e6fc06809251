#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "relosim/metrics.hpp"
#include "relosim/rng.hpp"

using namespace relosim;

namespace {

std::vector<MeshCell> line_cells(int n) {
    std::vector<MeshCell> cells(n);
    for (int i = 0; i < n; ++i) {
        cells[i].id = i;
        cells[i].x = 1000.0 * i;
        cells[i].y = 0.0;
    }
    return cells;
}

// Brute-force Bellman-Ford relaxation, independent of the heap-based search.
std::vector<double> bellman_ford(std::size_t n, const std::vector<NetworkEdge>& edges,
                                 const std::vector<std::size_t>& sources) {
    std::vector<double> dist(n, kUnreachable);
    for (std::size_t s : sources)
        dist[s] = 0.0;
    for (std::size_t pass = 0; pass + 1 < n; ++pass) {
        bool changed = false;
        for (const auto& e : edges) {
            const auto u = static_cast<std::size_t>(e.from);
            const auto v = static_cast<std::size_t>(e.to);
            if (dist[u] + e.length_m < dist[v]) {
                dist[v] = dist[u] + e.length_m;
                changed = true;
            }
            if (dist[v] + e.length_m < dist[u]) {
                dist[u] = dist[v] + e.length_m;
                changed = true;
            }
        }
        if (!changed)
            break;
    }
    return dist;
}

struct RandomGraph {
    std::vector<MeshCell> cells;
    std::vector<NetworkEdge> edges;
};

RandomGraph random_graph(std::size_t n, double edge_probability, std::uint64_t seed) {
    RandomGraph g;
    Rng rng(seed);
    g.cells.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        g.cells[i].id = static_cast<CellId>(i);
        g.cells[i].x = 10000.0 * rng.next_double();
        g.cells[i].y = 10000.0 * rng.next_double();
    }
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if (rng.next_double() < edge_probability)
                g.edges.push_back({static_cast<CellId>(i), static_cast<CellId>(j),
                                   10.0 + 5000.0 * rng.next_double()});
    return g;
}

} // namespace

TEST_CASE("nearest target distance basics") {
    const auto cells = line_cells(3);
    const std::vector<NetworkEdge> edges{{0, 1, 100.0}, {1, 2, 200.0}};
    const DistanceOracle oracle = DistanceOracle::from_network(cells, edges);

    CHECK(nearest_target_distance(oracle, 0, {2}) == doctest::Approx(300.0));
    CHECK(nearest_target_distance(oracle, 2, {2}) == 0.0); // residence is a target
    CHECK(nearest_target_distance(oracle, 1, {0, 2}) == doctest::Approx(100.0));
    CHECK_THROWS_AS(nearest_target_distance(oracle, 0, {}), DataError);
}

TEST_CASE("disconnected nodes carry the unreachable sentinel") {
    const auto cells = line_cells(4);
    const std::vector<NetworkEdge> edges{{0, 1, 100.0}}; // 2 and 3 isolated
    const DistanceOracle oracle = DistanceOracle::from_network(cells, edges);
    CHECK(std::isinf(nearest_target_distance(oracle, 2, {0})));

    const std::vector<double> values{100.0, kUnreachable, 300.0};
    const SummaryStats stats = summarize(values);
    CHECK(stats.count == 2);
    CHECK(stats.excluded_unreachable == 1);
    CHECK(stats.mean == doctest::Approx(200.0));
}

TEST_CASE("euclidean fallback mode") {
    const auto cells = line_cells(3);
    const DistanceOracle oracle = DistanceOracle::euclidean(cells);
    CHECK(nearest_target_distance(oracle, 0, {2}) == doctest::Approx(2000.0));
    CHECK(oracle.distances_from(0)[1] == doctest::Approx(1000.0));
}

TEST_CASE("graph distances match a brute-force relaxation oracle") {
    for (int g = 0; g < 20; ++g) {
        const RandomGraph graph = random_graph(50, 0.08, 1000 + static_cast<std::uint64_t>(g));
        const DistanceOracle oracle = DistanceOracle::from_network(graph.cells, graph.edges);
        Rng rng(500 + static_cast<std::uint64_t>(g));

        const std::size_t source = rng.next_below(50);
        const auto dist = oracle.distances_from(source);
        const auto expected = bellman_ford(50, graph.edges, {source});
        for (std::size_t i = 0; i < 50; ++i) {
            if (std::isinf(expected[i]))
                CHECK(std::isinf(dist[i]));
            else
                CHECK(dist[i] == doctest::Approx(expected[i]).epsilon(1e-12));
        }

        std::vector<std::size_t> targets;
        const std::size_t n_targets = 1 + rng.next_below(5);
        for (std::size_t t = 0; t < n_targets; ++t)
            targets.push_back(rng.next_below(50));
        const auto& nearest = oracle.to_nearest(targets);
        const auto expected_nearest = bellman_ford(50, graph.edges, targets);
        for (std::size_t i = 0; i < 50; ++i) {
            if (std::isinf(expected_nearest[i]))
                CHECK(std::isinf(nearest[i]));
            else
                CHECK(nearest[i] == doctest::Approx(expected_nearest[i]).epsilon(1e-12));
        }
    }
}

TEST_CASE("graph metric properties: identity, symmetry, triangle inequality") {
    const RandomGraph graph = random_graph(30, 0.15, 77);
    const DistanceOracle oracle = DistanceOracle::from_network(graph.cells, graph.edges);
    const auto matrix = oracle.all_pairs();
    const std::size_t n = 30;
    for (std::size_t a = 0; a < n; ++a) {
        CHECK(matrix[a * n + a] == 0.0);
        for (std::size_t b = 0; b < n; ++b) {
            // Path sums accumulate in opposite orders, so symmetry holds to
            // rounding, not bitwise.
            if (std::isfinite(matrix[a * n + b]))
                CHECK(matrix[a * n + b] ==
                      doctest::Approx(matrix[b * n + a]).epsilon(1e-12));
            else
                CHECK(std::isinf(matrix[b * n + a]));
            for (std::size_t c = 0; c < n; ++c) {
                if (std::isfinite(matrix[a * n + b]) && std::isfinite(matrix[b * n + c]))
                    CHECK(matrix[a * n + c] <= matrix[a * n + b] + matrix[b * n + c] + 1e-9);
            }
        }
    }
}

TEST_CASE("growing the target set never increases the distance") {
    const RandomGraph graph = random_graph(40, 0.1, 123);
    const DistanceOracle oracle = DistanceOracle::from_network(graph.cells, graph.edges);
    std::vector<std::size_t> targets{3};
    std::vector<double> previous(40, kUnreachable);
    for (std::size_t extra : {std::size_t(11), std::size_t(25), std::size_t(37)}) {
        const auto& nearest = oracle.to_nearest(targets);
        for (std::size_t i = 0; i < 40; ++i) {
            CHECK(nearest[i] <= previous[i] + 1e-12);
        }
        previous = nearest;
        targets.push_back(extra);
    }
}

TEST_CASE("summarize: examples, filter semantics and errors") {
    const std::vector<double> three{0.0, 1000.0, 2000.0};
    const SummaryStats s = summarize(three);
    CHECK(s.median == doctest::Approx(1000.0));
    CHECK(s.mean == doctest::Approx(1000.0));
    CHECK(s.min == 0.0);
    CHECK(s.max == 2000.0);

    const std::vector<double> two{500.0, 15000.0};
    const SummaryStats filtered = summarize(two, 10000.0);
    CHECK(filtered.count == 1);
    CHECK(filtered.mean == doctest::Approx(500.0));
    CHECK(filtered.excluded_by_filter == 1);

    // Values exactly at the threshold are kept: the filter is strictly greater.
    const std::vector<double> boundary{9999.0, 10000.0, 10001.0};
    const SummaryStats at = summarize(boundary, 10000.0);
    CHECK(at.count == 2);
    CHECK(at.max == doctest::Approx(10000.0));

    CHECK_THROWS_AS(summarize(std::vector<double>{20000.0}, 10000.0), DataError);
    CHECK_THROWS_AS(summarize(std::vector<double>{}), DataError);

    // Even-length median is the midpoint of the two central values.
    const std::vector<double> even{1.0, 5.0, 2.0, 4.0};
    CHECK(summarize(even).median == doctest::Approx(3.0));
}

TEST_CASE("summarize properties: permutation, duplication, filtered mean") {
    Rng rng(9);
    std::vector<double> values;
    for (int i = 0; i < 101; ++i)
        values.push_back(20000.0 * rng.next_double());
    const SummaryStats base = summarize(values);

    std::vector<double> shuffled = values;
    for (std::size_t i = shuffled.size(); i-- > 1;)
        std::swap(shuffled[i], shuffled[rng.next_below(i + 1)]);
    const SummaryStats permuted = summarize(shuffled);
    CHECK(permuted.mean == doctest::Approx(base.mean).epsilon(1e-12));
    CHECK(permuted.median == base.median);
    CHECK(permuted.std_dev == doctest::Approx(base.std_dev).epsilon(1e-12));

    std::vector<double> doubled = values;
    doubled.insert(doubled.end(), values.begin(), values.end());
    const SummaryStats twice = summarize(doubled);
    CHECK(twice.count == 2 * base.count);
    CHECK(twice.mean == doctest::Approx(base.mean).epsilon(1e-12));
    CHECK(twice.median == doctest::Approx(base.median).epsilon(1e-12));

    // Removing only values above the unfiltered mean can only lower the mean.
    const SummaryStats clipped = summarize(values, base.mean);
    CHECK(clipped.mean <= base.mean);
}

TEST_CASE("daa share") {
    std::vector<MeshCell> cells(2);
    cells[0].id = 0;
    cells[0].in_daa = true;
    cells[1].id = 1;

    std::vector<CellId> all_in(5, 0);
    CHECK(daa_share(all_in, cells) == doctest::Approx(1.0));

    std::vector<CellId> mixed;
    for (int i = 0; i < 1328; ++i)
        mixed.push_back(0);
    for (int i = 0; i < 3285 - 1328; ++i)
        mixed.push_back(1);
    const double share = daa_share(mixed, cells);
    CHECK(share == doctest::Approx(0.4043).epsilon(1e-3));
    CHECK(format_percent(100.0 * share - 100.0 * share) == "+0.0%"); // formatting sanity

    std::vector<MeshCell> no_daa(1);
    no_daa[0].id = 0;
    std::vector<CellId> outcomes(3, 0);
    CHECK(daa_share(outcomes, no_daa) == 0.0);
}

TEST_CASE("percent change: reference rows and properties") {
    CHECK(format_percent(percent_change(1506, 1405)) == "+7.2%");
    CHECK(format_percent(percent_change(1990, 1405)) == "+41.6%");
    CHECK(format_percent(percent_change(2803, 2731)) == "+2.6%");
    CHECK(format_percent(percent_change(3538, 2731)) == "+29.5%");
    CHECK(format_percent(percent_change(33.2, 36.2)) == "-8.3%");
    CHECK(format_percent(percent_change(27.3, 36.2)) == "-24.6%");

    CHECK(percent_change(123.4, 123.4) == 0.0);
    CHECK(percent_change(150.0, 100.0) == doctest::Approx(-percent_change(50.0, 100.0)));
    CHECK_THROWS_AS(percent_change(1.0, 0.0), DomainError);
}

TEST_CASE("distance histogram: anchors and scan oracle") {
    const std::vector<double> one{500.0};
    const std::vector<double> single_edges{0.0, 1000.0};
    const auto single = distance_histogram(one, single_edges);
    REQUIRE(single.size() == 1);
    CHECK(single[0] == doctest::Approx(1.0));

    const std::vector<double> uniform{0.5, 1.5};
    const std::vector<double> two_edges{0.0, 1.0, 2.0};
    const auto halves = distance_histogram(uniform, two_edges);
    CHECK(halves[0] == doctest::Approx(0.5));
    CHECK(halves[1] == doctest::Approx(0.5));

    Rng rng(31);
    std::vector<double> values;
    for (int i = 0; i < 500; ++i)
        values.push_back(16000.0 * rng.next_double() - 500.0);
    std::vector<double> edges;
    for (int e = 0; e <= 15; ++e)
        edges.push_back(1000.0 * e);
    const auto shares = distance_histogram(values, edges);

    std::vector<double> oracle(edges.size() - 1, 0.0);
    double included = 0.0;
    for (double v : values) {
        for (std::size_t b = 0; b + 1 < edges.size(); ++b) {
            const bool last = b + 2 == edges.size();
            if (v >= edges[b] && (v < edges[b + 1] || (last && v == edges[b + 1]))) {
                oracle[b] += 1.0;
                included += 1.0;
                break;
            }
        }
    }
    double total = 0.0;
    for (std::size_t b = 0; b < shares.size(); ++b) {
        CHECK(shares[b] == doctest::Approx(oracle[b] / included).epsilon(1e-12));
        total += shares[b];
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

    const std::vector<double> bad_edges{0.0, 0.0};
    CHECK_THROWS_AS(distance_histogram(values, bad_edges), DataError);
}
