#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "crowddyn/clustering.hpp"
#include "crowddyn/detect.hpp"
#include "crowddyn/entropy.hpp"
#include "crowddyn/ingest.hpp"
#include "crowddyn/symbolize.hpp"

// File formats exchanged between the pipeline stages. Every writer emits
// rows in a deterministic order with fixed float formatting, so re-running a
// stage on identical inputs reproduces its outputs byte for byte.

namespace crowddyn {

void write_posts_csv(const std::string& path, std::span<const PostRecord> posts);
void write_posts_jsonl(const std::string& path, std::span<const PostRecord> posts);

// date,slot_index,slot_minutes,timestamp,lat,lon — ingest output, ordered by
// (date, slot), posts in input order inside a bucket.
void write_buckets_csv(const std::string& path, const BucketMap& buckets, int slot_minutes);
BucketMap read_buckets_csv(const std::string& path, int* slot_minutes_out = nullptr);

// date,slot_index,slot_minutes,rep_index,lat,lon,support
using RepsMap = std::map<std::pair<Date, std::int32_t>, RepresentativeSet>;
void write_reps_csv(const std::string& path, const RepsMap& reps);
RepsMap read_reps_csv(const std::string& path, int* slot_minutes_out = nullptr);

// date,slot_index,rep_index,symbol — the clustering/entropy contract
// boundary; missing slots carry symbol -1.
void write_sequences_csv(const std::string& path, std::span<const SymbolSequence> sequences);
std::vector<SymbolSequence> read_sequences_csv(const std::string& path);

// date,slot_index,rep_index,h_bits
void write_traces_csv(const std::string& path, std::span<const EntropyTrace> traces);
std::vector<EntropyTrace> read_traces_csv(const std::string& path);

// date,label
void write_specials_csv(const std::string& path, const SpecialDaySet& specials);
SpecialDaySet read_specials_csv(const std::string& path);

// JSON array of {date, score, rank, is_special}
void write_ranking_json(const std::string& path, const AnomalyRanking& ranking);
AnomalyRanking read_ranking_json(const std::string& path);

// fraction_processed,detection_rate,false_positive_rate
void write_curves_csv(const std::string& path, const EvalCurves& curves);
EvalCurves read_curves_csv(const std::string& path);

// One clustering as an inspectable JSON object: labels, centers with
// support, and (when supplied) the silhouette values.
std::string clustering_to_json_text(const Clustering& clustering,
                                    const SilhouetteResult* sil = nullptr);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

} // namespace crowddyn
