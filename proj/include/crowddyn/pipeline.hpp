#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crowddyn/clustering.hpp"
#include "crowddyn/detect.hpp"
#include "crowddyn/entropy.hpp"
#include "crowddyn/errors.hpp"
#include "crowddyn/ingest.hpp"
#include "crowddyn/io.hpp"
#include "crowddyn/symbolize.hpp"
#include "crowddyn/synthgen.hpp"

// File-based pipeline stages: each reads its predecessor's format, writes
// its own plus a <output>.summary.json, and is deterministic, so re-running
// a stage with identical inputs and config reproduces its outputs byte for
// byte. Stage boundaries are files on purpose: parameter sweeps rerun only
// the stages whose knobs changed (clustering dominates the cost).

namespace crowddyn {

struct PipelineConfig {
    Region region{{40.756667, -73.986389}, 5000.0, 5000.0};
    int slot_minutes = 15;
    int k = 2;
    int grid_side = 7;
    DbscanParams dbscan_params{200.0, 10};
    Estimator estimator = Estimator::shannon;
    int window_weeks = 4; // 0 = cumulative
    ScoreMethod score_method = ScoreMethod::endpoints;
    int warmup_days = 28;
    int tz_offset_minutes = -300;
    bool joint_tuple = false;
    PostFormat input_format = PostFormat::csv;
    FieldMap fields;
    std::optional<Date> period_start; // derived from the data when unset
    std::optional<Date> period_end;

    int slots_per_day() const { return 1440 / slot_minutes; }
    void validate() const; // throws errc::bad_config
};

std::string config_to_json_text(const PipelineConfig& config);
PipelineConfig config_from_json_text(const std::string& text);

// Each stage returns a deterministic one-object JSON summary (also written
// to "<out_path>.summary.json") and prints nothing.
std::string stage_synth(const Scenario& scenario, const std::string& posts_out,
                        const std::string& specials_out, const std::string& scenario_out);
std::string stage_ingest(const PipelineConfig& config, const std::string& posts_in,
                         const std::string& buckets_out);
std::string stage_represent(const PipelineConfig& config, const std::string& buckets_in,
                            const std::string& reps_out);
std::string stage_symbolize(const PipelineConfig& config, const std::string& reps_in,
                            const std::string& sequences_out);
std::string stage_entropy(const PipelineConfig& config, const std::string& sequences_in,
                          const std::string& traces_out);
std::string stage_detect(const PipelineConfig& config, const std::string& traces_in,
                         const std::string& ranking_out, const std::string& specials_in = "");
std::string stage_evaluate(const PipelineConfig& config, const std::string& ranking_in,
                           const std::string& specials_in, const std::string& curves_out);

/// synth (optional) + every stage in order, under out_dir with the standard
/// file names. Returns the ranking path.
std::string run_all(const PipelineConfig& config, const Scenario* scenario,
                    const std::string& posts_in, const std::string& specials_in,
                    const std::string& out_dir);

// Parameter sweep: slot_minutes x grid x window x estimator, reusing the
// ingest/represent outputs per slot granularity and the symbolize outputs
// per grid. Emits one curves CSV per combination plus sweep_summary.csv.
struct SweepOptions {
    std::vector<int> slot_minutes{15, 30};
    std::vector<int> grid_sides{5, 7};
    std::vector<int> window_weeks{2, 4, 6, 8};
    std::vector<Estimator> estimators{Estimator::shannon, Estimator::hartley,
                                      Estimator::grassberger};
};

struct SweepRow {
    int slot_minutes;
    int grid_side;
    int window_weeks;
    Estimator estimator;
    double detection_at_20pct;
    double detection_at_50pct;
    double fpr_at_20pct;
    std::string curves_path;
};

std::vector<SweepRow> run_param_sweep(const PipelineConfig& base, const SweepOptions& options,
                                      const std::string& posts_in, const std::string& specials_in,
                                      const std::string& out_dir);

// Representative-selection study: per slot of one weekday, the three
// selection schemes side by side -- seeded-random k-means, DBSCAN alone,
// and the hybrid -- rated by mean silhouette, with re-runs probing
// reproducibility. Slots where any scheme cannot produce k rateable
// clusters are skipped.
struct OptionsStudyRow {
    Date date;
    std::int32_t slot_index;
    std::size_t n_points;
    double sil_kmeans;  // Opt. 1
    double sil_dbscan;  // Opt. 2
    double sil_hybrid;  // Opt. 3
};

struct OptionsStudyResult {
    std::vector<OptionsStudyRow> rows;
    std::size_t slots_considered = 0; // weekday slots with any data
    std::size_t slots_compared = 0;   // rows
    double frac_dbscan_worst = 0.0;   // fraction of rows where Opt. 2 < both
    bool kmeans_varies_across_runs = false;
    bool hybrid_deterministic = true;
};

OptionsStudyResult run_options_study(const PipelineConfig& config, const BucketMap& buckets,
                                     int weekday, int n_runs, std::uint64_t seed);

std::string stage_options_study(const PipelineConfig& config, const std::string& buckets_in,
                                int weekday, int n_runs, std::uint64_t seed,
                                const std::string& csv_out);

/// CLI exit code for an error category: 2 config, 3 io, 4 format,
/// 5 degenerate data.
int exit_code_for(errc code);

} // namespace crowddyn
