#include "crowddyn/ingest.hpp"

#include <charconv>
#include <fstream>

#include <json.hpp>

#include "crowddyn/errors.hpp"
#include "csv.hpp"

namespace crowddyn {

namespace {

bool parse_double(const std::string& s, double& out) {
    const char* begin = s.data();
    const char* end = begin + s.size();
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc() && ptr == end;
}

struct RowCounters {
    std::int64_t parsed = 0;
    std::int64_t skipped = 0;
};

void finish_load(const RowCounters& counters, LoadStats& stats) {
    stats.parsed = counters.parsed;
    stats.skipped = counters.skipped;
    const std::int64_t total = counters.parsed + counters.skipped;
    if (total > 0 && counters.skipped * 2 > total)
        fail(errc::format_error,
             "load_posts: " + std::to_string(counters.skipped) + " of " + std::to_string(total) +
                 " rows malformed; wrong field map?");
}

LoadStats load_csv(std::ifstream& in, const FieldMap& fields,
                   const std::function<void(PostRecord&&)>& sink) {
    std::string line;
    if (!std::getline(in, line))
        fail(errc::format_error, "load_posts: missing CSV header row");
    const auto header = detail::split_csv_line(line);
    const int ts_col = detail::find_column(header, fields.ts_field);
    const int lat_col = detail::find_column(header, fields.lat_field);
    const int lon_col = detail::find_column(header, fields.lon_field);
    const int id_col = fields.id_field.empty() ? -1 : detail::find_column(header, fields.id_field);
    if (ts_col < 0 || lat_col < 0 || lon_col < 0)
        fail(errc::format_error, "load_posts: header lacks mapped columns '" + fields.ts_field +
                                     "', '" + fields.lat_field + "', '" + fields.lon_field + "'");

    RowCounters counters;
    const std::size_t need = static_cast<std::size_t>(
        std::max({ts_col, lat_col, lon_col, id_col}) + 1);
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        const auto row = detail::split_csv_line(line);
        PostRecord rec;
        bool ok = row.size() >= need;
        if (ok) {
            const auto ts = parse_timestamp(row[ts_col]);
            ok = ts.has_value() && parse_double(row[lat_col], rec.loc.lat) &&
                 parse_double(row[lon_col], rec.loc.lon) && rec.loc.valid();
            if (ok) {
                rec.ts = *ts;
                if (id_col >= 0) rec.id = row[id_col];
            }
        }
        if (!ok) {
            ++counters.skipped;
            continue;
        }
        ++counters.parsed;
        sink(std::move(rec));
    }

    LoadStats stats;
    finish_load(counters, stats);
    return stats;
}

LoadStats load_jsonl(std::ifstream& in, const FieldMap& fields,
                     const std::function<void(PostRecord&&)>& sink) {
    RowCounters counters;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r") continue;
        PostRecord rec;
        bool ok = false;
        try {
            const nlohmann::json obj = nlohmann::json::parse(line);
            if (obj.is_object() && obj.contains(fields.ts_field) &&
                obj.contains(fields.lat_field) && obj.contains(fields.lon_field)) {
                const auto& ts_val = obj.at(fields.ts_field);
                std::optional<std::int64_t> ts;
                if (ts_val.is_number_integer())
                    ts = ts_val.get<std::int64_t>();
                else if (ts_val.is_string())
                    ts = parse_timestamp(ts_val.get<std::string>());
                if (ts && obj.at(fields.lat_field).is_number() &&
                    obj.at(fields.lon_field).is_number()) {
                    rec.ts = *ts;
                    rec.loc.lat = obj.at(fields.lat_field).get<double>();
                    rec.loc.lon = obj.at(fields.lon_field).get<double>();
                    if (!fields.id_field.empty() && obj.contains(fields.id_field) &&
                        obj.at(fields.id_field).is_string())
                        rec.id = obj.at(fields.id_field).get<std::string>();
                    ok = rec.loc.valid();
                }
            }
        } catch (const nlohmann::json::exception&) {
            ok = false;
        }
        if (!ok) {
            ++counters.skipped;
            continue;
        }
        ++counters.parsed;
        sink(std::move(rec));
    }

    LoadStats stats;
    finish_load(counters, stats);
    return stats;
}

} // namespace

PostFormat post_format_from_name(const std::string& name) {
    if (name == "csv") return PostFormat::csv;
    if (name == "jsonl") return PostFormat::jsonl;
    fail(errc::bad_config, "unknown post format: " + name);
}

LoadStats load_posts(const std::string& path, PostFormat format, const FieldMap& fields,
                     const std::function<void(PostRecord&&)>& sink) {
    std::ifstream in(path);
    if (!in) fail(errc::io_error, "load_posts: cannot open " + path);
    return format == PostFormat::csv ? load_csv(in, fields, sink) : load_jsonl(in, fields, sink);
}

std::vector<PostRecord> load_posts_vector(const std::string& path, PostFormat format,
                                          const FieldMap& fields, LoadStats* stats) {
    std::vector<PostRecord> out;
    const LoadStats s =
        load_posts(path, format, fields, [&](PostRecord&& rec) { out.push_back(std::move(rec)); });
    if (stats) *stats = s;
    return out;
}

BucketMap bucket_posts(std::span<const PostRecord> posts, const BucketOptions& options,
                       BucketStats* stats) {
    if (options.period_start > options.period_end)
        fail(errc::bad_config, "bucket_posts: period start after end");
    if (options.slot_minutes < 1 || 1440 % options.slot_minutes != 0)
        fail(errc::bad_config, "bucket_posts: slot_minutes must divide 1440");
    if (!options.region.valid()) fail(errc::bad_config, "bucket_posts: invalid region");

    BucketMap buckets;
    BucketStats local;
    for (const PostRecord& post : posts) {
        if (haversine_distance(post.loc, options.region.center) > options.region.radius_m) {
            ++local.dropped_outside_region;
            continue;
        }
        const LocalStamp stamp = to_local(post.ts, options.tz_offset_minutes);
        if (stamp.date < options.period_start || stamp.date > options.period_end) {
            ++local.dropped_outside_period;
            continue;
        }
        const std::int32_t slot = stamp.minute_of_day / options.slot_minutes;
        auto [it, inserted] = buckets.try_emplace({stamp.date, slot});
        if (inserted) {
            it->second.date = stamp.date;
            it->second.key = SlotKey{weekday_monday0(stamp.date), slot, options.slot_minutes};
        }
        it->second.posts.push_back(post);
        ++local.retained;
    }
    if (stats) *stats = local;
    return buckets;
}

} // namespace crowddyn
