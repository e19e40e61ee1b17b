#include "crowddyn/clustering.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <unordered_map>

#include "crowddyn/errors.hpp"

namespace crowddyn {

namespace {

constexpr double kDegToRad = M_PI / 180.0;

bool coord_less(const GeoPoint& a, const GeoPoint& b) {
    if (a.lat != b.lat) return a.lat < b.lat;
    return a.lon < b.lon;
}

// Uniform lat/lon bucket index for eps-neighbor queries. Cell sizes are
// chosen so that any pair closer than eps_m (great-circle) always lands in
// the same or an adjacent row/column:
//   rows:    |dlat| <= eps/R, so the row pitch is eps/R;
//   columns: sin(dlon/2) <= sin(eps/2R)/cos(lat_max) over the data's
//            latitude band, so the column pitch is 2*asin of that bound.
// Columns wrap modulo the full circle (longitudes are taken relative to the
// first point). Candidates are a superset; callers re-check the exact chord
// predicate.
class GeoGridIndex {
public:
    GeoGridIndex(std::span<const GeoPoint> pts, double eps_m) {
        const std::size_t n = pts.size();
        lon_ref_ = pts.empty() ? 0.0 : pts[0].lon;

        double min_cos = 1.0;
        for (const GeoPoint& p : pts)
            min_cos = std::min(min_cos, std::cos(p.lat * kDegToRad));

        const double pad = 1.0 + 1e-9; // float-rounding guard, superset-safe
        row_pitch_ = (eps_m / kEarthRadiusM) * pad + 1e-15;

        const double half_sin = std::sin(std::min(M_PI / 2.0, eps_m / (2.0 * kEarthRadiusM)));
        if (min_cos <= 1e-12 || half_sin * pad >= min_cos) {
            n_cols_ = 1;
            col_pitch_ = 2.0 * M_PI;
        } else {
            const double pitch = 2.0 * std::asin(std::min(1.0, half_sin * pad / min_cos));
            n_cols_ = std::max(1, static_cast<int>(std::floor(2.0 * M_PI / pitch)));
            col_pitch_ = 2.0 * M_PI / n_cols_;
        }

        rows_.resize(n);
        cols_.resize(n);
        cells_.reserve(n * 2);
        for (std::size_t i = 0; i < n; ++i) {
            rows_[i] = static_cast<std::int32_t>(
                std::floor((pts[i].lat * kDegToRad + M_PI / 2.0) / row_pitch_));
            cols_[i] = col_of(pts[i]);
            cells_[key(rows_[i], cols_[i])].push_back(static_cast<std::int32_t>(i));
        }
    }

    template <typename Fn>
    void for_candidates(std::size_t i, Fn&& fn) const {
        const std::int32_t row = rows_[i];
        const std::int32_t col = cols_[i];
        for (std::int32_t dr = -1; dr <= 1; ++dr) {
            if (n_cols_ <= 3) {
                for (std::int32_t c = 0; c < n_cols_; ++c) visit_cell(row + dr, c, fn);
            } else {
                for (std::int32_t dc = -1; dc <= 1; ++dc) {
                    std::int32_t c = (col + dc) % n_cols_;
                    if (c < 0) c += n_cols_;
                    visit_cell(row + dr, c, fn);
                }
            }
        }
    }

private:
    static std::uint64_t key(std::int32_t row, std::int32_t col) {
        return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(row)) << 32) |
               static_cast<std::uint32_t>(col);
    }

    std::int32_t col_of(const GeoPoint& p) const {
        double rel = (p.lon - lon_ref_) * kDegToRad;
        while (rel <= -M_PI) rel += 2.0 * M_PI;
        while (rel > M_PI) rel -= 2.0 * M_PI;
        std::int32_t c = static_cast<std::int32_t>(std::floor((rel + M_PI) / col_pitch_));
        if (c >= n_cols_) c = n_cols_ - 1;
        if (c < 0) c = 0;
        return c;
    }

    template <typename Fn>
    void visit_cell(std::int32_t row, std::int32_t col, Fn&& fn) const {
        auto it = cells_.find(key(row, col));
        if (it == cells_.end()) return;
        for (const std::int32_t j : it->second) fn(j);
    }

    double lon_ref_ = 0.0;
    double row_pitch_ = 1.0;
    double col_pitch_ = 2.0 * M_PI;
    std::int32_t n_cols_ = 1;
    std::vector<std::int32_t> rows_;
    std::vector<std::int32_t> cols_;
    std::unordered_map<std::uint64_t, std::vector<std::int32_t>> cells_;
};

struct DsuForest {
    std::vector<std::int32_t> parent;

    explicit DsuForest(std::size_t n) : parent(n) {
        std::iota(parent.begin(), parent.end(), 0);
    }
    std::int32_t find(std::int32_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }
    void unite(std::int32_t a, std::int32_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

// Shared final phase: cores already grouped (core_group[i] = group id for
// core i), borders assigned to the nearest core. Produces canonical cluster
// numbering ordered by each cluster's smallest core coordinate.
Clustering assemble_clustering(std::span<const GeoPoint> points,
                               const std::vector<bool>& is_core,
                               const std::vector<std::int32_t>& core_group,
                               const std::vector<std::int32_t>& border_core) {
    const std::size_t n = points.size();

    // group id -> canonical rank by smallest core (lat, lon)
    std::unordered_map<std::int32_t, std::int32_t> group_best; // group -> core index
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_core[i]) continue;
        auto [it, inserted] = group_best.try_emplace(core_group[i], static_cast<std::int32_t>(i));
        if (!inserted && coord_less(points[i], points[it->second]))
            it->second = static_cast<std::int32_t>(i);
    }
    std::vector<std::pair<std::int32_t, std::int32_t>> order; // (best core, group)
    order.reserve(group_best.size());
    for (const auto& [group, best] : group_best) order.emplace_back(best, group);
    std::sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        if (coord_less(points[a.first], points[b.first])) return true;
        if (coord_less(points[b.first], points[a.first])) return false;
        return a.first < b.first; // exact duplicate coordinates
    });
    std::unordered_map<std::int32_t, std::int32_t> group_label;
    for (std::size_t c = 0; c < order.size(); ++c)
        group_label[order[c].second] = static_cast<std::int32_t>(c);

    Clustering out;
    out.labels.assign(n, kNoiseLabel);
    out.clusters.resize(order.size());
    for (std::size_t i = 0; i < n; ++i) {
        std::int32_t label = kNoiseLabel;
        if (is_core[i])
            label = group_label.at(core_group[i]);
        else if (border_core[i] >= 0)
            label = group_label.at(core_group[border_core[i]]);
        out.labels[i] = label;
        if (label >= 0) out.clusters[label].push_back(static_cast<std::int32_t>(i));
    }

    out.centroids.reserve(out.clusters.size());
    std::vector<GeoPoint> members;
    for (const auto& cluster : out.clusters) {
        members.clear();
        for (const std::int32_t idx : cluster) members.push_back(points[idx]);
        out.centroids.push_back(geographic_midpoint(members));
    }
    return out;
}

// Border tie rule: nearest core wins; exact distance ties go to the core
// with the smaller (lat, lon). Equal-coordinate cores are always in the same
// cluster (distance zero connects them), so the rule is total.
bool better_border_core(std::span<const GeoPoint> points, double d2, std::int32_t core,
                        double best_d2, std::int32_t best_core) {
    if (best_core < 0) return true;
    if (d2 != best_d2) return d2 < best_d2;
    return coord_less(points[core], points[best_core]);
}

} // namespace

Clustering dbscan(std::span<const GeoPoint> points, const DbscanParams& params) {
    if (points.empty()) fail(errc::empty_input, "dbscan: no points");
    if (!params.valid()) fail(errc::bad_config, "dbscan: invalid parameters");

    const std::size_t n = points.size();
    const double threshold = chord_sq_for_distance(params.eps_m);

    std::vector<UnitVec3> vecs(n);
    for (std::size_t i = 0; i < n; ++i) vecs[i] = to_unit_vector(points[i]);

    const GeoGridIndex index(points, params.eps_m);

    std::vector<std::vector<std::int32_t>> neighbors(n); // excluding self
    for (std::size_t i = 0; i < n; ++i) {
        auto& list = neighbors[i];
        index.for_candidates(i, [&](std::int32_t j) {
            if (static_cast<std::size_t>(j) == i) return;
            if (chord_sq(vecs[i], vecs[j]) <= threshold) list.push_back(j);
        });
    }

    std::vector<bool> is_core(n, false);
    for (std::size_t i = 0; i < n; ++i)
        is_core[i] = neighbors[i].size() + 1 >= static_cast<std::size_t>(params.min_points);

    DsuForest dsu(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!is_core[i]) continue;
        for (const std::int32_t j : neighbors[i])
            if (is_core[j]) dsu.unite(static_cast<std::int32_t>(i), j);
    }
    std::vector<std::int32_t> core_group(n, -1);
    for (std::size_t i = 0; i < n; ++i)
        if (is_core[i]) core_group[i] = dsu.find(static_cast<std::int32_t>(i));

    std::vector<std::int32_t> border_core(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (is_core[i]) continue;
        double best_d2 = std::numeric_limits<double>::infinity();
        std::int32_t best = -1;
        for (const std::int32_t j : neighbors[i]) {
            if (!is_core[j]) continue;
            const double d2 = chord_sq(vecs[i], vecs[j]);
            if (better_border_core(points, d2, j, best_d2, best)) {
                best_d2 = d2;
                best = j;
            }
        }
        border_core[i] = best;
    }

    return assemble_clustering(points, is_core, core_group, border_core);
}

Clustering dbscan_naive(std::span<const GeoPoint> points, const DbscanParams& params) {
    if (points.empty()) fail(errc::empty_input, "dbscan: no points");
    if (!params.valid()) fail(errc::bad_config, "dbscan: invalid parameters");

    const std::size_t n = points.size();
    const double threshold = chord_sq_for_distance(params.eps_m);

    std::vector<UnitVec3> vecs(n);
    for (std::size_t i = 0; i < n; ++i) vecs[i] = to_unit_vector(points[i]);

    std::vector<bool> is_core(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t count = 0; // self included
        for (std::size_t j = 0; j < n; ++j)
            if (chord_sq(vecs[i], vecs[j]) <= threshold) ++count;
        is_core[i] = count >= static_cast<std::size_t>(params.min_points);
    }

    // Flood fill over core-core eps edges.
    std::vector<std::int32_t> core_group(n, -1);
    for (std::size_t seed = 0; seed < n; ++seed) {
        if (!is_core[seed] || core_group[seed] >= 0) continue;
        std::queue<std::int32_t> frontier;
        frontier.push(static_cast<std::int32_t>(seed));
        core_group[seed] = static_cast<std::int32_t>(seed);
        while (!frontier.empty()) {
            const std::int32_t u = frontier.front();
            frontier.pop();
            for (std::size_t v = 0; v < n; ++v) {
                if (!is_core[v] || core_group[v] >= 0) continue;
                if (chord_sq(vecs[u], vecs[v]) <= threshold) {
                    core_group[v] = static_cast<std::int32_t>(seed);
                    frontier.push(static_cast<std::int32_t>(v));
                }
            }
        }
    }

    std::vector<std::int32_t> border_core(n, -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (is_core[i]) continue;
        double best_d2 = std::numeric_limits<double>::infinity();
        std::int32_t best = -1;
        for (std::size_t j = 0; j < n; ++j) {
            if (!is_core[j]) continue;
            const double d2 = chord_sq(vecs[i], vecs[j]);
            if (d2 > threshold) continue;
            if (better_border_core(points, d2, static_cast<std::int32_t>(j), best_d2, best)) {
                best_d2 = d2;
                best = static_cast<std::int32_t>(j);
            }
        }
        border_core[i] = best;
    }

    return assemble_clustering(points, is_core, core_group, border_core);
}

Clustering kmeans(std::span<const GeoPoint> points, std::span<const GeoPoint> initial_centers,
                  int max_iter, double tol_m) {
    if (points.empty()) fail(errc::empty_input, "kmeans: no points");
    if (initial_centers.empty()) fail(errc::bad_config, "kmeans: no initial centers");

    const std::size_t n = points.size();
    const std::size_t k = initial_centers.size();
    std::vector<GeoPoint> centers(initial_centers.begin(), initial_centers.end());
    std::vector<std::int32_t> labels(n, 0);

    auto assign_all = [&]() {
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::infinity();
            std::int32_t best_c = 0;
            for (std::size_t c = 0; c < k; ++c) {
                const double d = haversine_distance(points[i], centers[c]);
                if (d < best) { // ties keep the lowest center index
                    best = d;
                    best_c = static_cast<std::int32_t>(c);
                }
            }
            labels[i] = best_c;
        }
    };

    for (int iter = 0; iter < max_iter; ++iter) {
        assign_all();

        std::vector<std::int64_t> sizes(k, 0);
        for (const std::int32_t l : labels) ++sizes[l];

        // A center with no members restarts at the point farthest from its
        // nearest center; ties go to the lowest point index.
        for (std::size_t c = 0; c < k; ++c) {
            if (sizes[c] != 0) continue;
            double worst = -1.0;
            std::size_t pick = 0;
            for (std::size_t i = 0; i < n; ++i) {
                double nearest = std::numeric_limits<double>::infinity();
                for (std::size_t c2 = 0; c2 < k; ++c2)
                    nearest = std::min(nearest, haversine_distance(points[i], centers[c2]));
                if (nearest > worst) {
                    worst = nearest;
                    pick = i;
                }
            }
            centers[c] = points[pick];
            --sizes[labels[pick]];
            labels[pick] = static_cast<std::int32_t>(c);
            ++sizes[c];
        }

        std::vector<GeoPoint> updated(k);
        std::vector<std::vector<GeoPoint>> members(k);
        for (std::size_t i = 0; i < n; ++i) members[labels[i]].push_back(points[i]);
        double max_move = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            updated[c] = members[c].empty() ? centers[c] : geographic_midpoint(members[c]);
            max_move = std::max(max_move, haversine_distance(centers[c], updated[c]));
        }
        centers = std::move(updated);
        if (max_move < tol_m) break;
    }

    assign_all();

    Clustering out;
    out.labels = std::move(labels);
    out.clusters.resize(k);
    for (std::size_t i = 0; i < n; ++i)
        out.clusters[out.labels[i]].push_back(static_cast<std::int32_t>(i));
    out.centroids = std::move(centers);
    return out;
}

double kmeans_objective(std::span<const GeoPoint> points, const Clustering& clustering) {
    double sum = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        const std::int32_t l = clustering.labels[i];
        if (l < 0) continue;
        const double d = haversine_distance(points[i], clustering.centroids[l]);
        sum += d * d;
    }
    return sum;
}

RepresentativeSet select_representatives(std::span<const GeoPoint> points, Date date,
                                         SlotKey slot, int k, const DbscanParams& params) {
    if (k < 1 || k > 3) fail(errc::bad_config, "select_representatives: k must be 1..3");
    if (points.empty()) fail(errc::empty_slot, "select_representatives: empty slot");

    RepresentativeSet out;
    out.date = date;
    out.slot = slot;

    if (k == 1) {
        out.reps.push_back(geographic_midpoint(points));
        out.support.push_back(static_cast<std::int64_t>(points.size()));
        return out;
    }

    const Clustering db = dbscan(points, params);
    if (db.cluster_count() < static_cast<std::size_t>(k))
        fail(errc::degenerate_slot, "select_representatives: DBSCAN found " +
                                        std::to_string(db.cluster_count()) + " clusters, need " +
                                        std::to_string(k));

    // Seeds: centroids of the k most populated DBSCAN clusters (ties by
    // canonical cluster id).
    std::vector<std::size_t> cluster_order(db.cluster_count());
    std::iota(cluster_order.begin(), cluster_order.end(), 0);
    std::sort(cluster_order.begin(), cluster_order.end(), [&](std::size_t a, std::size_t b) {
        if (db.clusters[a].size() != db.clusters[b].size())
            return db.clusters[a].size() > db.clusters[b].size();
        return a < b;
    });
    std::vector<GeoPoint> seeds;
    for (int c = 0; c < k; ++c) seeds.push_back(db.centroids[cluster_order[c]]);

    const Clustering km = kmeans(points, seeds);

    std::vector<std::size_t> rep_order(km.centroids.size());
    std::iota(rep_order.begin(), rep_order.end(), 0);
    std::sort(rep_order.begin(), rep_order.end(), [&](std::size_t a, std::size_t b) {
        if (km.clusters[a].size() != km.clusters[b].size())
            return km.clusters[a].size() > km.clusters[b].size();
        return coord_less(km.centroids[a], km.centroids[b]);
    });
    for (const std::size_t c : rep_order) {
        out.reps.push_back(km.centroids[c]);
        out.support.push_back(static_cast<std::int64_t>(km.clusters[c].size()));
    }
    return out;
}

std::vector<double> pairwise_distance_matrix(std::span<const GeoPoint> points) {
    const std::size_t n = points.size();
    std::vector<double> dist(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = haversine_distance(points[i], points[j]);
            dist[i * n + j] = d;
            dist[j * n + i] = d;
        }
    }
    return dist;
}

SilhouetteResult silhouette(const std::vector<double>& dist_matrix, std::size_t n,
                            const Clustering& clustering) {
    std::size_t populated = 0;
    for (const auto& c : clustering.clusters)
        if (!c.empty()) ++populated;
    if (populated < 2)
        fail(errc::undefined_metric, "silhouette: need at least 2 non-empty clusters");

    SilhouetteResult out;
    double sum = 0.0;

    for (std::size_t i = 0; i < n; ++i) {
        const std::int32_t own = clustering.labels[i];
        if (own < 0) continue; // noise excluded

        double a = 0.0;
        const std::size_t own_size = clustering.clusters[own].size();
        if (own_size > 1) {
            double acc = 0.0;
            for (const std::int32_t j : clustering.clusters[own]) {
                if (static_cast<std::size_t>(j) == i) continue;
                acc += dist_matrix[i * n + j];
            }
            a = acc / static_cast<double>(own_size - 1);
        } // singleton: a = 0 by convention

        double b = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
            if (static_cast<std::int32_t>(c) == own || clustering.clusters[c].empty()) continue;
            double acc = 0.0;
            for (const std::int32_t j : clustering.clusters[c]) acc += dist_matrix[i * n + j];
            b = std::min(b, acc / static_cast<double>(clustering.clusters[c].size()));
        }

        double s = 0.0;
        if (a < b)
            s = 1.0 - a / b;
        else if (a > b)
            s = b / a - 1.0;

        out.per_point.push_back(s);
        out.point_index.push_back(static_cast<std::int32_t>(i));
        sum += s;
    }

    out.mean = out.per_point.empty() ? 0.0 : sum / static_cast<double>(out.per_point.size());
    return out;
}

SilhouetteResult silhouette(std::span<const GeoPoint> points, const Clustering& clustering) {
    return silhouette(pairwise_distance_matrix(points), points.size(), clustering);
}

} // namespace crowddyn
