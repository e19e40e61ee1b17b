#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <random>
#include <vector>

#include <json.hpp>

#include "crowddyn/clustering.hpp"
#include "crowddyn/errors.hpp"
#include "crowddyn/geo.hpp"
#include "crowddyn/io.hpp"
#include "support/oracles.hpp"

using namespace crowddyn;

namespace {

const GeoPoint kCenter{40.756667, -73.986389};

double u01(std::mt19937_64& eng) {
    return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

GeoPoint in_disc(std::mt19937_64& eng, double radius_m, const GeoPoint& center = kCenter) {
    const double r = radius_m * std::sqrt(u01(eng));
    const double a = 2.0 * M_PI * u01(eng);
    return from_local_enu({r * std::cos(a), r * std::sin(a)}, center);
}

GeoPoint blob_point(std::mt19937_64& eng, const GeoPoint& center, double sigma_m) {
    // Box-Muller
    const double u1 = std::max(1e-12, u01(eng)), u2 = u01(eng);
    const double r = std::sqrt(-2.0 * std::log(u1));
    return from_local_enu({sigma_m * r * std::cos(2 * M_PI * u2),
                           sigma_m * r * std::sin(2 * M_PI * u2)},
                          center);
}

} // namespace

TEST_CASE("dbscan: fully dense set forms one cluster") {
    std::mt19937_64 eng(31);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 10; ++i) pts.push_back(in_disc(eng, 50.0));
    const Clustering c = dbscan(pts, {200.0, 4});
    CHECK(c.cluster_count() == 1);
    CHECK(c.clusters[0].size() == 10);
    for (const auto l : c.labels) CHECK(l == 0);
}

TEST_CASE("dbscan: isolated point is noise") {
    std::vector<GeoPoint> pts{kCenter};
    const Clustering c = dbscan(pts, {200.0, 2});
    CHECK(c.cluster_count() == 0);
    CHECK(c.labels[0] == kNoiseLabel);
}

TEST_CASE("dbscan equals the naive reference on random discs") {
    std::mt19937_64 eng(32);
    for (int t = 0; t < 10; ++t) {
        std::vector<GeoPoint> pts;
        for (int i = 0; i < 300; ++i) pts.push_back(in_disc(eng, 2500.0));
        const Clustering fast = dbscan(pts, {200.0, 5});
        const Clustering naive = dbscan_naive(pts, {200.0, 5});
        REQUIRE(fast.labels == naive.labels);
        REQUIRE(fast.clusters == naive.clusters);
    }
}

TEST_CASE("dbscan core membership is input-order independent") {
    std::mt19937_64 eng(33);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(in_disc(eng, 1200.0));
    const Clustering base = dbscan(pts, {250.0, 4});

    std::vector<std::size_t> perm(pts.size());
    std::iota(perm.begin(), perm.end(), 0);
    for (int t = 0; t < 5; ++t) {
        std::shuffle(perm.begin(), perm.end(), eng);
        std::vector<GeoPoint> shuffled;
        for (const std::size_t i : perm) shuffled.push_back(pts[i]);
        const Clustering again = dbscan(shuffled, {250.0, 4});
        // Canonical labels are coordinate-driven, so they transport through
        // the permutation unchanged.
        for (std::size_t j = 0; j < perm.size(); ++j)
            REQUIRE(again.labels[j] == base.labels[perm[j]]);
    }
}

TEST_CASE("dbscan index is exact near the antimeridian and at high latitude") {
    std::mt19937_64 eng(45);
    // Straddling lon = 180 and far north: the column wrap and the
    // conservative column pitch must still yield exactly the naive labels.
    for (const GeoPoint center : {GeoPoint{12.0, 179.9995}, GeoPoint{78.5, -179.9992}}) {
        std::vector<GeoPoint> pts;
        for (int i = 0; i < 250; ++i) pts.push_back(in_disc(eng, 1500.0, center));
        for (const double eps : {120.0, 300.0}) {
            const DbscanParams params{eps, 4};
            const Clustering fast = dbscan(pts, params);
            const Clustering naive = dbscan_naive(pts, params);
            REQUIRE(fast.labels == naive.labels);
        }
        // Some points on each side of the seam.
        bool east = false, west = false;
        for (const GeoPoint& p : pts) (p.lon > 0 ? east : west) = true;
        CHECK(east);
        CHECK(west);
    }
}

TEST_CASE("dbscan degenerate configurations") {
    // All coincident: everything is one dense cluster.
    std::vector<GeoPoint> same(20, kCenter);
    const Clustering c1 = dbscan(same, {10.0, 5});
    CHECK(c1.cluster_count() == 1);
    CHECK(c1.clusters[0].size() == 20);

    // All isolated: every point is noise.
    std::vector<GeoPoint> sparse;
    for (int i = 0; i < 15; ++i)
        sparse.push_back(from_local_enu({i * 1000.0, 0.0}, kCenter));
    const Clustering c2 = dbscan(sparse, {100.0, 2});
    CHECK(c2.cluster_count() == 0);

    // min_points = 1: singletons become clusters.
    const Clustering c3 = dbscan(sparse, {100.0, 1});
    CHECK(c3.cluster_count() == 15);

    CHECK_THROWS_AS(dbscan({}, {200.0, 5}), Error);
}

TEST_CASE("kmeans: optimal seeds converge immediately") {
    std::mt19937_64 eng(34);
    const GeoPoint a = from_local_enu({-1000.0, 0.0}, kCenter);
    const GeoPoint b = from_local_enu({1000.0, 0.0}, kCenter);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(blob_point(eng, i < 20 ? a : b, 50.0));

    const std::vector<GeoPoint> seeds{geographic_midpoint(std::span(pts).subspan(0, 20)),
                                      geographic_midpoint(std::span(pts).subspan(20, 20))};
    const Clustering c = kmeans(pts, seeds);
    for (int i = 0; i < 40; ++i) CHECK(c.labels[i] == (i < 20 ? 0 : 1));
    CHECK(haversine_distance(c.centroids[0], seeds[0]) < 1.0);
    CHECK(haversine_distance(c.centroids[1], seeds[1]) < 1.0);
}

TEST_CASE("kmeans with K=1 is the geographic midpoint") {
    std::mt19937_64 eng(35);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 30; ++i) pts.push_back(in_disc(eng, 2000.0));
    const Clustering c = kmeans(pts, std::vector<GeoPoint>{kCenter});
    const GeoPoint mid = geographic_midpoint(pts);
    CHECK(haversine_distance(c.centroids[0], mid) < 1e-6);
    CHECK(c.clusters[0].size() == 30);
}

TEST_CASE("kmeans objective is non-increasing across iterations") {
    std::mt19937_64 eng(36);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 200; ++i) pts.push_back(in_disc(eng, 2500.0));
    const std::vector<GeoPoint> seeds{pts[0], pts[1]};

    // Recompute the objective brute force per center snapshot.
    auto objective_at = [&](const std::vector<GeoPoint>& centers) {
        double sum = 0.0;
        for (const GeoPoint& p : pts) {
            double best = haversine_distance(p, centers[0]);
            for (std::size_t c = 1; c < centers.size(); ++c)
                best = std::min(best, haversine_distance(p, centers[c]));
            sum += best * best;
        }
        return sum;
    };

    // Replay the iterations by running kmeans with growing max_iter.
    double prev = objective_at(seeds);
    for (int iters = 1; iters <= 12; ++iters) {
        const Clustering c = kmeans(pts, seeds, iters);
        std::vector<GeoPoint> centers = c.centroids;
        const double now = objective_at(centers);
        CHECK(now <= prev * (1.0 + 1e-9));
        prev = std::min(prev, now);
    }
}

TEST_CASE("kmeans reseeds a center that lost every member") {
    const GeoPoint a = from_local_enu({-1500.0, 0.0}, kCenter);
    const GeoPoint b = from_local_enu({1500.0, 0.0}, kCenter);
    const GeoPoint c = from_local_enu({0.0, 2500.0}, kCenter);
    const std::vector<GeoPoint> pts{a, b, c};
    // Both seeds identical: one cluster starts empty.
    const Clustering result = kmeans(pts, std::vector<GeoPoint>{a, a});
    CHECK(result.clusters[0].size() + result.clusters[1].size() == 3);
    CHECK(!result.clusters[0].empty());
    CHECK(!result.clusters[1].empty());
}

TEST_CASE("select_representatives recovers planted blobs") {
    std::mt19937_64 eng(37);
    const GeoPoint a = from_local_enu({-1500.0, 0.0}, kCenter);
    const GeoPoint b = from_local_enu({1500.0, 0.0}, kCenter);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 120; ++i) pts.push_back(blob_point(eng, a, 120.0));
    for (int i = 0; i < 80; ++i) pts.push_back(blob_point(eng, b, 120.0));

    const SlotKey slot{0, 36, 15};
    const RepresentativeSet reps =
        select_representatives(pts, date_from_ymd(2025, 1, 6), slot, 2, {200.0, 10});
    REQUIRE(reps.reps.size() == 2);
    // Canonical order: bigger support first.
    CHECK(reps.support[0] >= reps.support[1]);
    CHECK(haversine_distance(reps.reps[0], geographic_midpoint(std::span(pts).subspan(0, 120))) <
          50.0);
    CHECK(haversine_distance(reps.reps[1], geographic_midpoint(std::span(pts).subspan(120, 80))) <
          50.0);
}

TEST_CASE("select_representatives deterministic and degenerate cases") {
    std::mt19937_64 eng(38);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 60; ++i) pts.push_back(blob_point(eng, kCenter, 80.0));

    const SlotKey slot{2, 10, 15};
    // k = 1: midpoint of everything.
    const RepresentativeSet one =
        select_representatives(pts, date_from_ymd(2025, 1, 8), slot, 1, {200.0, 10});
    const GeoPoint mid = geographic_midpoint(pts);
    CHECK(one.reps[0].lat == mid.lat);
    CHECK(one.reps[0].lon == mid.lon);
    CHECK(one.support[0] == 60);

    // Single dense blob cannot seed k = 2.
    try {
        select_representatives(pts, date_from_ymd(2025, 1, 8), slot, 2, {200.0, 10});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::degenerate_slot);
    }

    try {
        select_representatives({}, date_from_ymd(2025, 1, 8), slot, 2, {200.0, 10});
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::empty_slot);
    }

    // Bit-identical re-run.
    std::vector<GeoPoint> two_blobs = pts;
    const GeoPoint far = from_local_enu({2000.0, 500.0}, kCenter);
    for (int i = 0; i < 40; ++i) two_blobs.push_back(blob_point(eng, far, 80.0));
    const RepresentativeSet r1 = select_representatives(
        two_blobs, date_from_ymd(2025, 1, 8), slot, 2, {200.0, 10});
    const RepresentativeSet r2 = select_representatives(
        two_blobs, date_from_ymd(2025, 1, 8), slot, 2, {200.0, 10});
    REQUIRE(r1.reps.size() == r2.reps.size());
    for (std::size_t i = 0; i < r1.reps.size(); ++i) {
        CHECK(r1.reps[i].lat == r2.reps[i].lat);
        CHECK(r1.reps[i].lon == r2.reps[i].lon);
        CHECK(r1.support[i] == r2.support[i]);
    }
}

TEST_CASE("silhouette piecewise cases") {
    // Three points on a meridian, spaced exactly 0.25 degrees (an exactly
    // representable double, so both gaps are bitwise equal): for the middle
    // point of the pair cluster, a == b, so s == 0 exactly.
    const GeoPoint p0{40.0, -74.0};
    const GeoPoint p1{40.25, -74.0};
    const GeoPoint p2{40.5, -74.0};
    Clustering c;
    c.labels = {0, 0, 1};
    c.clusters = {{0, 1}, {2}};
    c.centroids = {geographic_midpoint(std::vector<GeoPoint>{p0, p1}), p2};
    const std::vector<GeoPoint> pts{p0, p1, p2};
    const SilhouetteResult s = silhouette(pts, c);
    REQUIRE(s.per_point.size() == 3);
    CHECK(s.per_point[1] == 0.0);          // a(p1) == b(p1)
    CHECK(s.per_point[2] == doctest::Approx(1.0)); // singleton: a = 0 -> s = 1

    // Two singleton clusters: both score 1 under the a = 0 convention.
    Clustering singles;
    singles.labels = {0, 1};
    singles.clusters = {{0}, {1}};
    singles.centroids = {p0, p2};
    const std::vector<GeoPoint> two{p0, p2};
    const SilhouetteResult s2 = silhouette(two, singles);
    CHECK(s2.per_point[0] == doctest::Approx(1.0));
    CHECK(s2.per_point[1] == doctest::Approx(1.0));
    CHECK(s2.mean == doctest::Approx(1.0));
}

TEST_CASE("silhouette matches the naive reference and stays in [-1, 1]") {
    std::mt19937_64 eng(39);
    const GeoPoint a = from_local_enu({-2000.0, 0.0}, kCenter);
    const GeoPoint b = from_local_enu({2000.0, 0.0}, kCenter);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 30; ++i) pts.push_back(blob_point(eng, a, 30.0));
    for (int i = 0; i < 30; ++i) pts.push_back(blob_point(eng, b, 30.0));

    const Clustering c = dbscan(pts, {200.0, 5});
    REQUIRE(c.cluster_count() == 2);
    const SilhouetteResult s = silhouette(pts, c);
    CHECK(s.mean == doctest::Approx(oracles::naive_mean_silhouette(pts, c)).epsilon(1e-9));
    CHECK(s.mean > 0.9); // planted, well-separated blobs
    for (const double v : s.per_point) {
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }

    // Random labelings stay in range and match the oracle too.
    for (int t = 0; t < 20; ++t) {
        Clustering random_c;
        random_c.clusters.resize(3);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const std::int32_t l = static_cast<std::int32_t>(eng() % 4) - 1; // incl. noise
            random_c.labels.push_back(l);
            if (l >= 0) random_c.clusters[l].push_back(static_cast<std::int32_t>(i));
        }
        std::size_t populated = 0;
        for (const auto& cl : random_c.clusters)
            if (!cl.empty()) ++populated;
        if (populated < 2) continue;
        random_c.centroids.resize(3, kCenter);
        const SilhouetteResult rs = silhouette(pts, random_c);
        CHECK(rs.mean ==
              doctest::Approx(oracles::naive_mean_silhouette(pts, random_c)).epsilon(1e-9));
        for (const double v : rs.per_point) {
            CHECK(v >= -1.0);
            CHECK(v <= 1.0);
        }
    }
}

TEST_CASE("clustering exports as inspectable json") {
    std::mt19937_64 eng(40);
    const GeoPoint a = from_local_enu({-2000.0, 0.0}, kCenter);
    const GeoPoint b = from_local_enu({2000.0, 0.0}, kCenter);
    std::vector<GeoPoint> pts;
    for (int i = 0; i < 25; ++i) pts.push_back(blob_point(eng, i < 15 ? a : b, 40.0));
    const Clustering c = dbscan(pts, {200.0, 5});
    REQUIRE(c.cluster_count() == 2);
    const SilhouetteResult s = silhouette(pts, c);
    const std::string text = clustering_to_json_text(c, &s);
    const auto j = nlohmann::json::parse(text);
    CHECK(j["labels"].size() == 25);
    CHECK(j["clusters"].size() == 2);
    CHECK(j["clusters"][0]["size"].get<int>() + j["clusters"][1]["size"].get<int>() == 25);
    CHECK(j["silhouette_mean"].get<double>() == doctest::Approx(s.mean));
}

TEST_CASE("silhouette needs two populated clusters") {
    const std::vector<GeoPoint> pts{kCenter, kCenter};
    Clustering c;
    c.labels = {0, 0};
    c.clusters = {{0, 1}};
    c.centroids = {kCenter};
    try {
        silhouette(pts, c);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::undefined_metric);
    }
}
