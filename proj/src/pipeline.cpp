#include "crowddyn/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "crowddyn/errors.hpp"

namespace crowddyn {

namespace {

using nlohmann::json;

void write_summary(const std::string& out_path, const json& j) {
    write_text_file(out_path + ".summary.json", j.dump(2) + "\n");
}

json config_to_json(const PipelineConfig& c) {
    json j;
    j["region"] = {{"center_lat", c.region.center.lat},
                   {"center_lon", c.region.center.lon},
                   {"radius_m", c.region.radius_m},
                   {"side_m", c.region.side_m}};
    j["slot_minutes"] = c.slot_minutes;
    j["k"] = c.k;
    j["grid_side"] = c.grid_side;
    j["eps_m"] = c.dbscan_params.eps_m;
    j["min_points"] = c.dbscan_params.min_points;
    j["estimator"] = estimator_name(c.estimator);
    j["window_weeks"] = c.window_weeks;
    j["score_method"] = score_method_name(c.score_method);
    j["warmup_days"] = c.warmup_days;
    j["tz_offset_minutes"] = c.tz_offset_minutes;
    j["joint_tuple"] = c.joint_tuple;
    j["input_format"] = c.input_format == PostFormat::csv ? "csv" : "jsonl";
    j["fields"] = {{"ts", c.fields.ts_field},
                   {"lat", c.fields.lat_field},
                   {"lon", c.fields.lon_field},
                   {"id", c.fields.id_field}};
    j["period_start"] = c.period_start ? json(format_date(*c.period_start)) : json(nullptr);
    j["period_end"] = c.period_end ? json(format_date(*c.period_end)) : json(nullptr);
    return j;
}

} // namespace

void PipelineConfig::validate() const {
    if (!region.valid()) fail(errc::bad_config, "config: invalid region");
    if (slot_minutes < 1 || 1440 % slot_minutes != 0)
        fail(errc::bad_config, "config: slot_minutes must divide 1440");
    if (k < 1 || k > 3) fail(errc::bad_config, "config: k must be 1, 2 or 3");
    if (grid_side < 2) fail(errc::bad_config, "config: grid side must be >= 2");
    if (!dbscan_params.valid()) fail(errc::bad_config, "config: invalid DBSCAN parameters");
    if (window_weeks < 0) fail(errc::bad_config, "config: window_weeks must be >= 0");
    if (warmup_days < 0) fail(errc::bad_config, "config: warmup_days must be >= 0");
    if (period_start && period_end && *period_start > *period_end)
        fail(errc::bad_config, "config: period start after end");
}

std::string config_to_json_text(const PipelineConfig& config) {
    return config_to_json(config).dump(2) + "\n";
}

PipelineConfig config_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(errc::format_error, std::string("config: bad JSON: ") + e.what());
    }
    PipelineConfig c;
    try {
        if (j.contains("region")) {
            const json& r = j["region"];
            c.region.center.lat = r.value("center_lat", c.region.center.lat);
            c.region.center.lon = r.value("center_lon", c.region.center.lon);
            c.region.radius_m = r.value("radius_m", c.region.radius_m);
            c.region.side_m = r.value("side_m", c.region.side_m);
        }
        c.slot_minutes = j.value("slot_minutes", c.slot_minutes);
        c.k = j.value("k", c.k);
        c.grid_side = j.value("grid_side", c.grid_side);
        c.dbscan_params.eps_m = j.value("eps_m", c.dbscan_params.eps_m);
        c.dbscan_params.min_points = j.value("min_points", c.dbscan_params.min_points);
        if (j.contains("estimator")) c.estimator = estimator_from_name(j["estimator"]);
        c.window_weeks = j.value("window_weeks", c.window_weeks);
        if (j.contains("score_method")) c.score_method = score_method_from_name(j["score_method"]);
        c.warmup_days = j.value("warmup_days", c.warmup_days);
        c.tz_offset_minutes = j.value("tz_offset_minutes", c.tz_offset_minutes);
        c.joint_tuple = j.value("joint_tuple", c.joint_tuple);
        if (j.contains("input_format"))
            c.input_format = post_format_from_name(j["input_format"]);
        if (j.contains("fields")) {
            const json& f = j["fields"];
            c.fields.ts_field = f.value("ts", c.fields.ts_field);
            c.fields.lat_field = f.value("lat", c.fields.lat_field);
            c.fields.lon_field = f.value("lon", c.fields.lon_field);
            c.fields.id_field = f.value("id", c.fields.id_field);
        }
        if (j.contains("period_start") && !j["period_start"].is_null())
            c.period_start = parse_date(j["period_start"].get<std::string>());
        if (j.contains("period_end") && !j["period_end"].is_null())
            c.period_end = parse_date(j["period_end"].get<std::string>());
    } catch (const json::exception& e) {
        fail(errc::format_error, std::string("config: bad field: ") + e.what());
    }
    c.validate();
    return c;
}

std::string stage_synth(const Scenario& scenario, const std::string& posts_out,
                        const std::string& specials_out, const std::string& scenario_out) {
    std::ofstream out(posts_out, std::ios::binary);
    if (!out) fail(errc::io_error, "cannot write " + posts_out);
    out << "timestamp,lat,lon,id\n";
    std::int64_t count = 0;
    char buf[96];
    const SpecialDaySet truth = generate(scenario, [&](PostRecord&& rec) {
        std::snprintf(buf, sizeof(buf), "%lld,%.9f,%.9f,\n",
                      static_cast<long long>(rec.ts), rec.loc.lat, rec.loc.lon);
        out << buf;
        ++count;
    });
    out.close();

    write_specials_csv(specials_out, truth);
    if (!scenario_out.empty()) write_text_file(scenario_out, scenario_to_json_text(scenario));

    json summary{{"stage", "synth"},
                 {"posts", count},
                 {"special_days", truth.days.size()},
                 {"seed", scenario.seed},
                 {"period_days", scenario.period_days},
                 {"posts_out", posts_out}};
    write_summary(posts_out, summary);
    return summary.dump(2) + "\n";
}

std::string stage_ingest(const PipelineConfig& config, const std::string& posts_in,
                         const std::string& buckets_out) {
    config.validate();
    LoadStats load_stats;
    std::vector<PostRecord> posts =
        load_posts_vector(posts_in, config.input_format, config.fields, &load_stats);

    BucketOptions opts;
    opts.region = config.region;
    opts.slot_minutes = config.slot_minutes;
    opts.tz_offset_minutes = config.tz_offset_minutes;
    if (config.period_start && config.period_end) {
        opts.period_start = *config.period_start;
        opts.period_end = *config.period_end;
    } else {
        // Derive the period from the data's local dates.
        if (posts.empty()) fail(errc::empty_input, "ingest: no valid posts in " + posts_in);
        Date lo{INT32_MAX}, hi{INT32_MIN};
        for (const PostRecord& p : posts) {
            const Date d = to_local(p.ts, config.tz_offset_minutes).date;
            lo = std::min(lo, d);
            hi = std::max(hi, d);
        }
        opts.period_start = config.period_start.value_or(lo);
        opts.period_end = config.period_end.value_or(hi);
    }

    BucketStats bucket_stats;
    const BucketMap buckets = bucket_posts(posts, opts, &bucket_stats);
    write_buckets_csv(buckets_out, buckets, config.slot_minutes);

    json summary{{"stage", "ingest"},
                 {"parsed", load_stats.parsed},
                 {"skipped_malformed", load_stats.skipped},
                 {"retained", bucket_stats.retained},
                 {"dropped_outside_region", bucket_stats.dropped_outside_region},
                 {"dropped_outside_period", bucket_stats.dropped_outside_period},
                 {"buckets", buckets.size()},
                 {"period_start", format_date(opts.period_start)},
                 {"period_end", format_date(opts.period_end)},
                 {"slot_minutes", config.slot_minutes}};
    summary["config"] = config_to_json(config);
    write_summary(buckets_out, summary);
    return summary.dump(2) + "\n";
}

std::string stage_represent(const PipelineConfig& config, const std::string& buckets_in,
                            const std::string& reps_out) {
    config.validate();
    int slot_minutes = config.slot_minutes;
    const BucketMap buckets = read_buckets_csv(buckets_in, &slot_minutes);

    RepsMap reps;
    std::int64_t degenerate = 0;
    std::vector<GeoPoint> points;
    for (const auto& [key, bucket] : buckets) {
        points.clear();
        for (const PostRecord& p : bucket.posts) points.push_back(p.loc);
        try {
            RepresentativeSet set = select_representatives(
                points, bucket.date, SlotKey{bucket.key.weekday, key.second, slot_minutes},
                config.k, config.dbscan_params);
            reps.emplace(key, std::move(set));
        } catch (const Error& e) {
            if (e.code() == errc::degenerate_slot || e.code() == errc::empty_slot) {
                ++degenerate; // downstream fills the missing symbol
            } else {
                throw;
            }
        }
    }
    write_reps_csv(reps_out, reps);

    json summary{{"stage", "represent"}, {"slots_total", buckets.size()},
                 {"slots_represented", reps.size()}, {"slots_degenerate", degenerate},
                 {"k", config.k}, {"eps_m", config.dbscan_params.eps_m},
                 {"min_points", config.dbscan_params.min_points},
                 {"slot_minutes", slot_minutes}};
    summary["config"] = config_to_json(config);
    write_summary(reps_out, summary);
    return summary.dump(2) + "\n";
}

std::string stage_symbolize(const PipelineConfig& config, const std::string& reps_in,
                            const std::string& sequences_out) {
    config.validate();
    int slot_minutes = config.slot_minutes;
    const RepsMap reps = read_reps_csv(reps_in, &slot_minutes);
    if (reps.empty()) fail(errc::empty_input, "symbolize: no representatives in " + reps_in);

    const Date first = config.period_start.value_or(reps.begin()->first.first);
    const Date last = config.period_end.value_or(reps.rbegin()->first.first);
    const int slots_per_day = 1440 / slot_minutes;

    GridSpec grid{config.region, config.grid_side};
    SymbolizeOptions opts;
    opts.joint_tuple = config.joint_tuple;
    const SymbolizeResult result =
        build_sequences(reps, grid, config.k, first, last, slots_per_day, opts);
    write_sequences_csv(sequences_out, result.sequences);

    json summary{{"stage", "symbolize"},
                 {"sequences", result.sequences.size()},
                 {"missing_slots", result.missing_slots},
                 {"clamped_points", result.clamped_points},
                 {"grid_side", config.grid_side},
                 {"alphabet", grid.alphabet_size()},
                 {"first_date", format_date(first)},
                 {"last_date", format_date(last)},
                 {"slots_per_day", slots_per_day}};
    summary["config"] = config_to_json(config);
    write_summary(sequences_out, summary);
    return summary.dump(2) + "\n";
}

std::string stage_entropy(const PipelineConfig& config, const std::string& sequences_in,
                          const std::string& traces_out) {
    config.validate();
    const std::vector<SymbolSequence> sequences = read_sequences_csv(sequences_in);
    if (sequences.empty()) fail(errc::empty_input, "entropy: no sequences in " + sequences_in);

    std::vector<EntropyTrace> traces;
    traces.reserve(sequences.size());
    for (const SymbolSequence& seq : sequences)
        traces.push_back(windowed_trace(seq, config.window_weeks, config.estimator));
    write_traces_csv(traces_out, traces);

    json summary{{"stage", "entropy"},
                 {"traces", traces.size()},
                 {"estimator", estimator_name(config.estimator)},
                 {"window_weeks", config.window_weeks}};
    summary["config"] = config_to_json(config);
    write_summary(traces_out, summary);
    return summary.dump(2) + "\n";
}

std::string stage_detect(const PipelineConfig& config, const std::string& traces_in,
                         const std::string& ranking_out, const std::string& specials_in) {
    config.validate();
    const std::vector<EntropyTrace> traces = read_traces_csv(traces_in);
    if (traces.empty()) fail(errc::empty_input, "detect: no traces in " + traces_in);

    const std::vector<DayScore> scores =
        score_days(traces, config.score_method, config.warmup_days);
    AnomalyRanking ranking = rank_days(scores);

    if (!specials_in.empty()) {
        const SpecialDaySet specials = read_specials_csv(specials_in);
        for (RankedDay& r : ranking.entries) r.is_special = specials.contains(r.date);
    }
    write_ranking_json(ranking_out, ranking);

    json summary{{"stage", "detect"},
                 {"days_scored", ranking.entries.size()},
                 {"method", score_method_name(config.score_method)},
                 {"warmup_days", config.warmup_days},
                 {"top_date", ranking.entries.empty() ? ""
                                                      : format_date(ranking.entries[0].date)},
                 {"top_score", ranking.entries.empty() ? 0.0 : ranking.entries[0].score}};
    summary["config"] = config_to_json(config);
    write_summary(ranking_out, summary);
    return summary.dump(2) + "\n";
}

namespace {

double curve_value_at(const EvalCurves& curves, double fraction, bool detection) {
    double value = 0.0;
    for (const CurvePoint& p : curves.points) {
        if (p.fraction_processed > fraction + 1e-12) break;
        value = detection ? p.detection_rate : p.false_positive_rate;
    }
    return value;
}

} // namespace

std::string stage_evaluate(const PipelineConfig& config, const std::string& ranking_in,
                           const std::string& specials_in, const std::string& curves_out) {
    config.validate();
    AnomalyRanking ranking = read_ranking_json(ranking_in);
    const SpecialDaySet specials = read_specials_csv(specials_in);
    const EvalCurves curves = evaluate_ranking(ranking, specials);
    write_curves_csv(curves_out, curves);

    json summary{{"stage", "evaluate"},
                 {"days", ranking.entries.size()},
                 {"specials", specials.days.size()},
                 {"detection_at_10pct", curve_value_at(curves, 0.10, true)},
                 {"detection_at_20pct", curve_value_at(curves, 0.20, true)},
                 {"detection_at_50pct", curve_value_at(curves, 0.50, true)},
                 {"fpr_at_20pct", curve_value_at(curves, 0.20, false)}};
    summary["config"] = config_to_json(config);
    write_summary(curves_out, summary);
    return summary.dump(2) + "\n";
}

std::string run_all(const PipelineConfig& config, const Scenario* scenario,
                    const std::string& posts_in, const std::string& specials_in,
                    const std::string& out_dir) {
    config.validate();
    std::filesystem::create_directories(out_dir);
    const auto path = [&](const char* name) { return out_dir + "/" + name; };

    write_text_file(path("config.json"), config_to_json_text(config));

    std::string posts = posts_in;
    std::string specials = specials_in;
    if (scenario) {
        stage_synth(*scenario, path("posts.csv"), path("specials.csv"), path("scenario.json"));
        posts = path("posts.csv");
        specials = path("specials.csv");
    }
    if (posts.empty()) fail(errc::bad_config, "run_all: no posts input and no scenario");

    stage_ingest(config, posts, path("buckets.csv"));
    stage_represent(config, path("buckets.csv"), path("reps.csv"));
    stage_symbolize(config, path("reps.csv"), path("sequences.csv"));
    stage_entropy(config, path("sequences.csv"), path("traces.csv"));
    stage_detect(config, path("traces.csv"), path("ranking.json"), specials);
    if (!specials.empty())
        stage_evaluate(config, path("ranking.json"), specials, path("curves.csv"));
    return path("ranking.json");
}

std::vector<SweepRow> run_param_sweep(const PipelineConfig& base, const SweepOptions& options,
                                      const std::string& posts_in, const std::string& specials_in,
                                      const std::string& out_dir) {
    base.validate();
    if (specials_in.empty()) fail(errc::bad_config, "sweep: needs a specials file to evaluate");
    std::filesystem::create_directories(out_dir);

    std::vector<SweepRow> rows;
    for (const int slot_minutes : options.slot_minutes) {
        PipelineConfig cfg = base;
        cfg.slot_minutes = slot_minutes;
        const std::string tag_slot = "slot" + std::to_string(slot_minutes);
        const std::string buckets = out_dir + "/buckets_" + tag_slot + ".csv";
        const std::string reps = out_dir + "/reps_" + tag_slot + ".csv";
        stage_ingest(cfg, posts_in, buckets);
        stage_represent(cfg, buckets, reps); // the expensive stage, reused below

        for (const int grid_side : options.grid_sides) {
            cfg.grid_side = grid_side;
            const std::string tag_grid = tag_slot + "_L" + std::to_string(grid_side);
            const std::string sequences = out_dir + "/sequences_" + tag_grid + ".csv";
            stage_symbolize(cfg, reps, sequences);

            for (const int window : options.window_weeks) {
                cfg.window_weeks = window;
                for (const Estimator est : options.estimators) {
                    cfg.estimator = est;
                    const std::string tag = tag_grid + "_W" + std::to_string(window) + "_" +
                                            estimator_name(est);
                    const std::string traces = out_dir + "/traces_" + tag + ".csv";
                    const std::string ranking = out_dir + "/ranking_" + tag + ".json";
                    const std::string curves = out_dir + "/curves_" + tag + ".csv";
                    stage_entropy(cfg, sequences, traces);
                    stage_detect(cfg, traces, ranking, specials_in);
                    stage_evaluate(cfg, ranking, specials_in, curves);

                    const EvalCurves c = read_curves_csv(curves);
                    rows.push_back({slot_minutes, grid_side, window, est,
                                    curve_value_at(c, 0.20, true), curve_value_at(c, 0.50, true),
                                    curve_value_at(c, 0.20, false), curves});
                }
            }
        }
    }

    std::ofstream out(out_dir + "/sweep_summary.csv", std::ios::binary);
    if (!out) fail(errc::io_error, "cannot write sweep summary");
    out << "slot_minutes,grid,window_weeks,estimator,detection_at_20pct,detection_at_50pct,"
           "fpr_at_20pct,curves\n";
    char buf[64];
    for (const SweepRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f", r.detection_at_20pct,
                      r.detection_at_50pct, r.fpr_at_20pct);
        out << r.slot_minutes << ',' << r.grid_side << ',' << r.window_weeks << ','
            << estimator_name(r.estimator) << ',' << buf << ',' << r.curves_path << '\n';
    }
    return rows;
}

namespace {

// Bounded integer draw on mt19937_64; modulo bias is irrelevant here.
std::size_t draw_index(std::mt19937_64& eng, std::size_t n) {
    return static_cast<std::size_t>(eng() % n);
}

// Forgy initialization: k distinct point indices.
std::vector<GeoPoint> random_seeds(std::mt19937_64& eng, std::span<const GeoPoint> points,
                                   int k) {
    std::set<std::size_t> chosen;
    while (chosen.size() < static_cast<std::size_t>(k) && chosen.size() < points.size())
        chosen.insert(draw_index(eng, points.size()));
    std::vector<GeoPoint> seeds;
    for (const std::size_t i : chosen) seeds.push_back(points[i]);
    return seeds;
}

std::vector<GeoPoint> hybrid_seeds(const Clustering& db, int k) {
    std::vector<std::size_t> order(db.cluster_count());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (db.clusters[a].size() != db.clusters[b].size())
            return db.clusters[a].size() > db.clusters[b].size();
        return a < b;
    });
    std::vector<GeoPoint> seeds;
    for (int c = 0; c < k; ++c) seeds.push_back(db.centroids[order[c]]);
    return seeds;
}

bool same_centers(const Clustering& a, const Clustering& b) {
    if (a.centroids.size() != b.centroids.size()) return false;
    for (std::size_t i = 0; i < a.centroids.size(); ++i)
        if (a.centroids[i].lat != b.centroids[i].lat || a.centroids[i].lon != b.centroids[i].lon)
            return false;
    return true;
}

} // namespace

OptionsStudyResult run_options_study(const PipelineConfig& config, const BucketMap& buckets,
                                     int weekday, int n_runs, std::uint64_t seed) {
    config.validate();
    if (n_runs < 1) fail(errc::bad_config, "options study: n_runs must be >= 1");

    OptionsStudyResult result;

    struct SlotCase {
        Date date;
        std::int32_t slot;
        std::vector<GeoPoint> points;
        Clustering opt1, opt3;
    };
    std::vector<SlotCase> cases;

    // Run 0 computes the silhouettes; later runs only probe reproducibility.
    std::mt19937_64 rng_run0(seed);
    std::size_t dbscan_worst = 0;
    for (const auto& [key, bucket] : buckets) {
        if (bucket.key.weekday != weekday) continue;
        ++result.slots_considered;
        if (bucket.posts.size() < static_cast<std::size_t>(config.k)) continue;

        SlotCase c;
        c.date = key.first;
        c.slot = key.second;
        for (const PostRecord& p : bucket.posts) c.points.push_back(p.loc);

        const Clustering db = dbscan(c.points, config.dbscan_params);
        if (db.cluster_count() < static_cast<std::size_t>(std::max(config.k, 2)))
            continue; // Opt. 2/3 undefined on this slot

        c.opt1 = kmeans(c.points, random_seeds(rng_run0, c.points, config.k));
        c.opt3 = kmeans(c.points, hybrid_seeds(db, config.k));

        const std::vector<double> dist = pairwise_distance_matrix(c.points);
        double s1, s2, s3;
        try {
            s1 = silhouette(dist, c.points.size(), c.opt1).mean;
            s2 = silhouette(dist, c.points.size(), db).mean;
            s3 = silhouette(dist, c.points.size(), c.opt3).mean;
        } catch (const Error& e) {
            if (e.code() == errc::undefined_metric) continue; // degenerate k-means split
            throw;
        }

        result.rows.push_back({c.date, c.slot, c.points.size(), s1, s2, s3});
        if (s2 < s1 && s2 < s3) ++dbscan_worst;
        cases.push_back(std::move(c));
    }

    result.slots_compared = result.rows.size();
    result.frac_dbscan_worst =
        result.rows.empty() ? 0.0
                            : static_cast<double>(dbscan_worst) /
                                  static_cast<double>(result.rows.size());

    for (int run = 1; run < n_runs; ++run) {
        std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ull * static_cast<std::uint64_t>(run));
        for (const SlotCase& c : cases) {
            const Clustering opt1 = kmeans(c.points, random_seeds(rng, c.points, config.k));
            if (!same_centers(opt1, c.opt1)) result.kmeans_varies_across_runs = true;
            const Clustering db = dbscan(c.points, config.dbscan_params);
            const Clustering opt3 = kmeans(c.points, hybrid_seeds(db, config.k));
            if (!same_centers(opt3, c.opt3)) result.hybrid_deterministic = false;
        }
    }
    return result;
}

std::string stage_options_study(const PipelineConfig& config, const std::string& buckets_in,
                                int weekday, int n_runs, std::uint64_t seed,
                                const std::string& csv_out) {
    const BucketMap buckets = read_buckets_csv(buckets_in);
    const OptionsStudyResult result = run_options_study(config, buckets, weekday, n_runs, seed);

    std::ofstream out(csv_out, std::ios::binary);
    if (!out) fail(errc::io_error, "cannot write " + csv_out);
    out << "date,slot_index,n_points,sil_kmeans,sil_dbscan,sil_hybrid\n";
    char buf[64];
    for (const OptionsStudyRow& r : result.rows) {
        std::snprintf(buf, sizeof(buf), "%.6f,%.6f,%.6f", r.sil_kmeans, r.sil_dbscan,
                      r.sil_hybrid);
        out << format_date(r.date) << ',' << r.slot_index << ',' << r.n_points << ',' << buf
            << '\n';
    }
    out.close();

    json summary{{"stage", "options_study"},
                 {"weekday", weekday_name(weekday)},
                 {"runs", n_runs},
                 {"slots_considered", result.slots_considered},
                 {"slots_compared", result.slots_compared},
                 {"frac_dbscan_worst", result.frac_dbscan_worst},
                 {"kmeans_varies_across_runs", result.kmeans_varies_across_runs},
                 {"hybrid_deterministic", result.hybrid_deterministic}};
    summary["config"] = config_to_json(config);
    write_summary(csv_out, summary);
    return summary.dump(2) + "\n";
}

int exit_code_for(errc code) {
    switch (code) {
    case errc::bad_config: return 2;
    case errc::io_error: return 3;
    case errc::format_error: return 4;
    default: return 5;
    }
}

} // namespace crowddyn
