#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "crowddyn/geo.hpp"
#include "crowddyn/timeutil.hpp"

namespace crowddyn {

inline constexpr std::int32_t kNoiseLabel = -1;

struct DbscanParams {
    double eps_m = 200.0;  // neighborhood radius
    int min_points = 10;   // minimum neighbors for a core point, self included

    bool valid() const { return eps_m > 0.0 && min_points >= 1; }
};

// Result of one clustering run. labels[i] is the cluster id of point i or
// kNoiseLabel. clusters[c] lists the member indices of cluster c and
// centroids[c] is the geographic midpoint of those members (for k-means,
// the final centers). DBSCAN numbers clusters canonically by their smallest
// core coordinate (lat, lon) so labels do not depend on input order;
// k-means keeps the seed order.
struct Clustering {
    std::vector<std::int32_t> labels;
    std::vector<std::vector<std::int32_t>> clusters;
    std::vector<GeoPoint> centroids;

    std::size_t cluster_count() const { return clusters.size(); }
};

/// Density clustering with the standard reachability semantics under the
/// haversine metric: a core point has >= min_points neighbors within eps_m
/// (counting itself); clusters are maximal sets of density-connected core
/// points plus their border points. Border points reachable from several
/// clusters join the one whose nearest core point is closest (exact ties go
/// to the core with the smaller (lat, lon)), which makes the result
/// independent of input order. Neighbor queries run over a uniform lat/lon
/// grid sized so that the 3x3 block around a cell provably covers every
/// candidate within eps_m.
Clustering dbscan(std::span<const GeoPoint> points, const DbscanParams& params);

/// Same semantics with O(n^2) full-scan neighbor queries. Reference and
/// benchmark baseline only.
Clustering dbscan_naive(std::span<const GeoPoint> points, const DbscanParams& params);

/// Lloyd iterations under the haversine metric. Assignment goes to the
/// nearest center (ties to the lowest center index); centers update to the
/// geographic midpoint of their members; a center that loses all members is
/// reseeded at the point farthest from its nearest center. Stops when every
/// center moves less than tol_m or after max_iter rounds.
Clustering kmeans(std::span<const GeoPoint> points,
                  std::span<const GeoPoint> initial_centers,
                  int max_iter = 100, double tol_m = 1.0);

/// Sum over clusters of squared haversine distances to the cluster center:
/// the within-cluster variation the iterations drive down.
double kmeans_objective(std::span<const GeoPoint> points, const Clustering& clustering);

struct SlotKey {
    int weekday = 0;       // Monday = 0
    int slot_index = 0;    // [0, slots_per_day)
    int slot_minutes = 15; // divisor of 1440

    auto operator<=>(const SlotKey&) const = default;
};

// The k centroid locations summarizing one (date, slot). reps are ordered by
// descending support, ties by (lat, lon).
struct RepresentativeSet {
    Date date;
    SlotKey slot;
    std::vector<GeoPoint> reps;
    std::vector<std::int64_t> support;
};

/// Representative selection for one slot's points. k = 1 takes the
/// geographic midpoint of everything. k in {2, 3} runs the hybrid scheme:
/// DBSCAN first, the k most-populated clusters' centroids seed a k-means
/// over all points, and the final centers are the representatives. Throws
/// errc::empty_slot on no points and errc::degenerate_slot when DBSCAN finds
/// fewer than k clusters (callers map that to the missing symbol).
RepresentativeSet select_representatives(std::span<const GeoPoint> points,
                                         Date date, SlotKey slot, int k,
                                         const DbscanParams& params);

struct SilhouetteResult {
    std::vector<double> per_point; // s(i) for non-noise points, point order
    std::vector<std::int32_t> point_index;
    double mean = 0.0;
};

/// Silhouette quality over the non-noise points of a clustering:
///   s(i) = 1 - a/b   if a < b
///        = 0         if a == b
///        = b/a - 1   if a > b
/// with a(i) the mean haversine distance to the rest of i's cluster (0 for
/// singleton clusters) and b(i) the smallest mean distance to another
/// cluster. Needs >= 2 non-noise clusters, else errc::undefined_metric.
SilhouetteResult silhouette(std::span<const GeoPoint> points, const Clustering& clustering);

/// Same scores over a caller-provided row-major n*n distance matrix, for
/// callers that rate several clusterings of one point set.
SilhouetteResult silhouette(const std::vector<double>& dist_matrix, std::size_t n,
                            const Clustering& clustering);

std::vector<double> pairwise_distance_matrix(std::span<const GeoPoint> points);

} // namespace crowddyn
