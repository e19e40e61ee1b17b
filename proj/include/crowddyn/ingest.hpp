#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "crowddyn/clustering.hpp"
#include "crowddyn/geo.hpp"
#include "crowddyn/timeutil.hpp"

namespace crowddyn {

// One geo-located post. Only location and time are processed; id is an
// opaque pass-through for debugging, never interpreted.
struct PostRecord {
    std::int64_t ts = 0; // UTC epoch seconds
    GeoPoint loc;
    std::string id;
};

enum class PostFormat { csv, jsonl };

PostFormat post_format_from_name(const std::string& name);

// Column names (CSV header) or object keys (JSONL) for the required fields;
// id_field may be empty.
struct FieldMap {
    std::string ts_field = "timestamp";
    std::string lat_field = "lat";
    std::string lon_field = "lon";
    std::string id_field;
};

struct LoadStats {
    std::int64_t parsed = 0;
    std::int64_t skipped = 0; // malformed rows: counted, never fatal
};

/// Streams records out of a CSV (header row required) or JSONL file in file
/// order. Timestamps may be epoch seconds or ISO-8601; rows that fail to
/// parse or carry out-of-range coordinates are skipped and counted. Throws
/// errc::io_error if the file cannot be read, errc::format_error when more
/// than half of the data rows were malformed (wrong field map, most likely).
LoadStats load_posts(const std::string& path, PostFormat format, const FieldMap& fields,
                     const std::function<void(PostRecord&&)>& sink);

std::vector<PostRecord> load_posts_vector(const std::string& path, PostFormat format,
                                          const FieldMap& fields, LoadStats* stats = nullptr);

struct SlotBucket {
    SlotKey key;
    Date date;
    std::vector<PostRecord> posts;
};

struct BucketOptions {
    Region region;
    Date period_start;
    Date period_end;              // inclusive
    int slot_minutes = 15;        // any divisor of 1440
    int tz_offset_minutes = -300; // fixed UTC offset for local day boundaries

    int slots_per_day() const { return 1440 / slot_minutes; }
};

struct BucketStats {
    std::int64_t retained = 0;
    std::int64_t dropped_outside_region = 0;
    std::int64_t dropped_outside_period = 0;
};

using BucketMap = std::map<std::pair<Date, std::int32_t>, SlotBucket>;

/// Drops posts outside the circular region (distance > radius_m) or outside
/// the inclusive date period, and groups the rest into (date, slot) buckets.
/// Slots are half-open [start, end) in fixed-offset local time. The result
/// does not depend on input order except for the order of posts inside one
/// bucket (which downstream consumers treat as a multiset).
BucketMap bucket_posts(std::span<const PostRecord> posts, const BucketOptions& options,
                       BucketStats* stats = nullptr);

} // namespace crowddyn
