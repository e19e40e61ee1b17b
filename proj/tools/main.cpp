// crowddyn: crowd-dynamics anomaly detection over geo-located post streams.
//
// Subcommand pipeline, file-based between stages:
//   synth -> ingest -> represent -> symbolize -> entropy -> detect -> evaluate
// plus `all` (everything in order) and `sweep` (parameter studies).
// Exit codes: 0 ok, 2 config, 3 io, 4 format, 5 degenerate data.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "crowddyn/pipeline.hpp"

using namespace crowddyn;

namespace {

struct CommonFlags {
    std::string region_center = "40.756667,-73.986389";
    double radius_km = 5.0;
    double side_km = 5.0;
    std::string estimator = "shannon";
    std::string score_method = "endpoints";
    std::string input_format = "csv";
    std::string period_start, period_end;
};

void add_config_flags(CLI::App* cmd, PipelineConfig& config, CommonFlags& flags) {
    cmd->add_option("--region-center", flags.region_center, "Region center as lat,lon");
    cmd->add_option("--radius-km", flags.radius_km, "Harvest radius in km (default 5)");
    cmd->add_option("--side-km", flags.side_km, "Grid square side in km (default 5)");
    cmd->add_option("--slot-min", config.slot_minutes, "Slot minutes, a divisor of 1440");
    cmd->add_option("--k", config.k, "Representatives per slot (1..3)");
    cmd->add_option("--grid", config.grid_side, "Grid cells per side (L)");
    cmd->add_option("--eps-m", config.dbscan_params.eps_m, "DBSCAN eps in meters");
    cmd->add_option("--min-points", config.dbscan_params.min_points, "DBSCAN minPoints");
    cmd->add_option("--estimator", flags.estimator, "shannon|hartley|grassberger");
    cmd->add_option("--window-weeks", config.window_weeks, "Entropy window W (0 = cumulative)");
    cmd->add_option("--score-method", flags.score_method, "endpoints|consecutive");
    cmd->add_option("--warmup-days", config.warmup_days, "Days excluded from scoring");
    cmd->add_option("--tz-offset-min", config.tz_offset_minutes, "Fixed UTC offset, minutes");
    cmd->add_flag("--joint-tuple", config.joint_tuple, "Fold the k cells into one symbol");
    cmd->add_option("--format", flags.input_format, "Posts input format: csv|jsonl");
    cmd->add_option("--ts-field", config.fields.ts_field, "Timestamp column/key");
    cmd->add_option("--lat-field", config.fields.lat_field, "Latitude column/key");
    cmd->add_option("--lon-field", config.fields.lon_field, "Longitude column/key");
    cmd->add_option("--id-field", config.fields.id_field, "Optional id column/key");
    cmd->add_option("--period-start", flags.period_start, "YYYY-MM-DD (else from data)");
    cmd->add_option("--period-end", flags.period_end, "YYYY-MM-DD (else from data)");
}

void finalize_config(PipelineConfig& config, const CommonFlags& flags) {
    double lat = 0, lon = 0;
    if (std::sscanf(flags.region_center.c_str(), "%lf,%lf", &lat, &lon) != 2)
        fail(errc::bad_config, "--region-center must be lat,lon");
    config.region.center = {lat, lon};
    config.region.radius_m = flags.radius_km * 1000.0;
    config.region.side_m = flags.side_km * 1000.0;
    config.estimator = estimator_from_name(flags.estimator);
    config.score_method = score_method_from_name(flags.score_method);
    config.input_format = post_format_from_name(flags.input_format);
    if (!flags.period_start.empty()) {
        config.period_start = parse_date(flags.period_start);
        if (!config.period_start) fail(errc::bad_config, "bad --period-start");
    }
    if (!flags.period_end.empty()) {
        config.period_end = parse_date(flags.period_end);
        if (!config.period_end) fail(errc::bad_config, "bad --period-end");
    }
    config.validate();
}

void print_summary(const std::string& summary_json) {
    const auto j = nlohmann::json::parse(summary_json);
    std::cerr << j.dump() << "\n";
}

Scenario build_scenario(const std::string& scenario_path, std::uint64_t seed, int period_days,
                        std::int64_t posts_per_day, const std::string& start_date,
                        bool seed_set) {
    Scenario s = scenario_path.empty() ? default_scenario() : load_scenario(scenario_path);
    if (seed_set) s.seed = seed;
    if (period_days > 0) {
        s.period_days = period_days;
        // Planted days beyond a shortened period would be invalid.
        std::erase_if(s.anomalies, [&](const AnomalySpec& a) {
            return a.date > s.start_date + s.period_days - 1;
        });
    }
    if (posts_per_day > 0) s.posts_per_day = posts_per_day;
    if (!start_date.empty()) {
        const auto d = parse_date(start_date);
        if (!d) fail(errc::bad_config, "bad --start-date");
        const int shift = *d - s.start_date;
        s.start_date = *d;
        for (AnomalySpec& a : s.anomalies) a.date = a.date + shift;
    }
    return s;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"crowd-dynamics anomaly detection from geo-located posts"};
    app.require_subcommand(1);

    PipelineConfig config;
    CommonFlags flags;

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic labeled trace");
    std::string scenario_path, out_dir = "out", start_date;
    std::uint64_t seed = 0;
    int period_days = 0;
    std::int64_t posts_per_day = 0;
    synth->add_option("--scenario", scenario_path, "Scenario JSON (default built-in)");
    auto* seed_opt = synth->add_option("--seed", seed, "Generator seed");
    synth->add_option("--period-days", period_days, "Override period length");
    synth->add_option("--posts-per-day", posts_per_day, "Override posts per day");
    synth->add_option("--start-date", start_date, "Override start date (YYYY-MM-DD)");
    synth->add_option("--out", out_dir, "Output directory");

    // ingest / represent / symbolize / entropy / detect / evaluate
    std::string in_path, out_path, specials_path, ranking_path;
    auto* ingest = app.add_subcommand("ingest", "Parse, filter and bucket posts");
    ingest->add_option("--in", in_path, "Posts file")->required();
    ingest->add_option("--out", out_path, "Bucketed posts CSV")->required();
    add_config_flags(ingest, config, flags);

    auto* represent = app.add_subcommand("represent", "Cluster buckets into representatives");
    represent->add_option("--in", in_path, "Bucketed posts CSV")->required();
    represent->add_option("--out", out_path, "Representatives CSV")->required();
    add_config_flags(represent, config, flags);

    auto* symbolize = app.add_subcommand("symbolize", "Map representatives to grid symbols");
    symbolize->add_option("--in", in_path, "Representatives CSV")->required();
    symbolize->add_option("--out", out_path, "Symbol sequences CSV")->required();
    add_config_flags(symbolize, config, flags);

    auto* entropy = app.add_subcommand("entropy", "Windowed entropy traces per stream");
    entropy->add_option("--in", in_path, "Symbol sequences CSV")->required();
    entropy->add_option("--out", out_path, "Entropy traces CSV")->required();
    add_config_flags(entropy, config, flags);

    auto* detect = app.add_subcommand("detect", "Score and rank days by entropy variation");
    detect->add_option("--in", in_path, "Entropy traces CSV")->required();
    detect->add_option("--out", out_path, "Ranking JSON")->required();
    detect->add_option("--specials", specials_path, "Optional labels to mark the ranking");
    add_config_flags(detect, config, flags);

    auto* evaluate = app.add_subcommand("evaluate", "Detection and false-positive curves");
    evaluate->add_option("--ranking", ranking_path, "Ranking JSON")->required();
    evaluate->add_option("--specials", specials_path, "Special-day CSV")->required();
    evaluate->add_option("--out", out_path, "Curves CSV")->required();
    add_config_flags(evaluate, config, flags);

    // all
    auto* all = app.add_subcommand("all", "Run the whole pipeline");
    std::string posts_path;
    all->add_option("--scenario", scenario_path, "Scenario JSON; omit with --posts");
    all->add_option("--posts", posts_path, "Existing posts file (skips synth)");
    all->add_option("--specials", specials_path, "Labels for evaluation");
    all->add_option("--out", out_dir, "Output directory")->required();
    auto* all_seed_opt = all->add_option("--seed", seed, "Scenario seed override");
    all->add_option("--period-days", period_days, "Scenario period override");
    all->add_option("--posts-per-day", posts_per_day, "Scenario volume override");
    add_config_flags(all, config, flags);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Parameter sweep or selection study");
    std::string study = "params";
    int weekday = 5, runs = 5;
    std::uint64_t study_seed = 777;
    std::vector<int> sweep_slots{15, 30}, sweep_grids{5, 7}, sweep_windows{2, 4, 6, 8};
    std::vector<std::string> sweep_estimators{"shannon", "hartley", "grassberger"};
    sweep->add_option("--posts", posts_path, "Posts file")->required();
    sweep->add_option("--specials", specials_path, "Special-day CSV (params mode)");
    sweep->add_option("--out", out_dir, "Output directory")->required();
    sweep->add_option("--study", study, "params|options");
    sweep->add_option("--weekday", weekday, "Weekday for the options study (Mon=0)");
    sweep->add_option("--runs", runs, "Re-runs for the options study");
    sweep->add_option("--study-seed", study_seed, "Seed for the options study");
    sweep->add_option("--slots", sweep_slots, "Slot minutes to sweep");
    sweep->add_option("--grids", sweep_grids, "Grid sides to sweep");
    sweep->add_option("--windows", sweep_windows, "Window weeks to sweep");
    sweep->add_option("--estimators", sweep_estimators, "Estimators to sweep");
    add_config_flags(sweep, config, flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        namespace fs = std::filesystem;
        if (synth->parsed()) {
            const Scenario s = build_scenario(scenario_path, seed, period_days, posts_per_day,
                                              start_date, seed_opt->count() > 0);
            fs::create_directories(out_dir);
            print_summary(stage_synth(s, out_dir + "/posts.csv", out_dir + "/specials.csv",
                                      out_dir + "/scenario.json"));
        } else if (ingest->parsed()) {
            finalize_config(config, flags);
            print_summary(stage_ingest(config, in_path, out_path));
        } else if (represent->parsed()) {
            finalize_config(config, flags);
            print_summary(stage_represent(config, in_path, out_path));
        } else if (symbolize->parsed()) {
            finalize_config(config, flags);
            print_summary(stage_symbolize(config, in_path, out_path));
        } else if (entropy->parsed()) {
            finalize_config(config, flags);
            print_summary(stage_entropy(config, in_path, out_path));
        } else if (detect->parsed()) {
            finalize_config(config, flags);
            print_summary(stage_detect(config, in_path, out_path, specials_path));
        } else if (evaluate->parsed()) {
            finalize_config(config, flags);
            print_summary(stage_evaluate(config, ranking_path, specials_path, out_path));
        } else if (all->parsed()) {
            finalize_config(config, flags);
            if (!scenario_path.empty() || posts_path.empty()) {
                const Scenario s =
                    build_scenario(scenario_path, seed, period_days, posts_per_day, "",
                                   all_seed_opt->count() > 0);
                run_all(config, &s, "", specials_path, out_dir);
            } else {
                run_all(config, nullptr, posts_path, specials_path, out_dir);
            }
            std::cerr << "pipeline complete: " << out_dir << "/ranking.json\n";
        } else if (sweep->parsed()) {
            finalize_config(config, flags);
            if (study == "options") {
                fs::create_directories(out_dir);
                const std::string buckets = out_dir + "/buckets_study.csv";
                stage_ingest(config, posts_path, buckets);
                print_summary(stage_options_study(config, buckets, weekday, runs, study_seed,
                                                  out_dir + "/options_study.csv"));
            } else if (study == "params") {
                SweepOptions options;
                options.slot_minutes = sweep_slots;
                options.grid_sides = sweep_grids;
                options.window_weeks = sweep_windows;
                options.estimators.clear();
                for (const auto& name : sweep_estimators)
                    options.estimators.push_back(estimator_from_name(name));
                const auto rows =
                    run_param_sweep(config, options, posts_path, specials_path, out_dir);
                std::cerr << "sweep complete: " << rows.size() << " combinations -> " << out_dir
                          << "/sweep_summary.csv\n";
            } else {
                fail(errc::bad_config, "--study must be params or options");
            }
        }
    } catch (const Error& e) {
        std::cerr << "error (" << errc_name(e.code()) << "): " << e.what() << "\n";
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
