#include "crowddyn/io.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "crowddyn/errors.hpp"
#include "csv.hpp"

namespace crowddyn {

namespace {

using nlohmann::json;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary); // no platform newline games
    if (!out) fail(errc::io_error, "cannot write " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io_error, "cannot open " + path);
    return in;
}

std::string fmt_coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9f", v);
    return buf;
}

std::string fmt_value(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.12g", v);
    return buf;
}

double parse_double_or_fail(const std::string& s, const std::string& path) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(errc::format_error, path + ": bad number '" + s + "'");
    return v;
}

long parse_long_or_fail(const std::string& s, const std::string& path) {
    long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
        fail(errc::format_error, path + ": bad integer '" + s + "'");
    return v;
}

Date parse_date_or_fail(const std::string& s, const std::string& path) {
    const auto d = parse_date(s);
    if (!d) fail(errc::format_error, path + ": bad date '" + s + "'");
    return *d;
}

} // namespace

void write_posts_csv(const std::string& path, std::span<const PostRecord> posts) {
    auto out = open_out(path);
    out << "timestamp,lat,lon,id\n";
    for (const PostRecord& p : posts)
        out << p.ts << ',' << fmt_coord(p.loc.lat) << ',' << fmt_coord(p.loc.lon) << ',' << p.id
            << '\n';
}

void write_posts_jsonl(const std::string& path, std::span<const PostRecord> posts) {
    auto out = open_out(path);
    for (const PostRecord& p : posts) {
        json j{{"timestamp", p.ts}, {"lat", p.loc.lat}, {"lon", p.loc.lon}};
        if (!p.id.empty()) j["id"] = p.id;
        out << j.dump() << '\n';
    }
}

void write_buckets_csv(const std::string& path, const BucketMap& buckets, int slot_minutes) {
    auto out = open_out(path);
    out << "date,slot_index,slot_minutes,timestamp,lat,lon\n";
    for (const auto& [key, bucket] : buckets) {
        const std::string date = format_date(key.first);
        for (const PostRecord& p : bucket.posts)
            out << date << ',' << key.second << ',' << slot_minutes << ',' << p.ts << ','
                << fmt_coord(p.loc.lat) << ',' << fmt_coord(p.loc.lon) << '\n';
    }
}

BucketMap read_buckets_csv(const std::string& path, int* slot_minutes_out) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(errc::format_error, path + ": empty file");

    BucketMap buckets;
    int slot_minutes = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = detail::split_csv_line(line);
        if (row.size() < 6) fail(errc::format_error, path + ": short row");
        const Date date = parse_date_or_fail(row[0], path);
        const std::int32_t slot = static_cast<std::int32_t>(parse_long_or_fail(row[1], path));
        slot_minutes = static_cast<int>(parse_long_or_fail(row[2], path));
        PostRecord rec;
        rec.ts = parse_long_or_fail(row[3], path);
        rec.loc.lat = parse_double_or_fail(row[4], path);
        rec.loc.lon = parse_double_or_fail(row[5], path);
        auto [it, inserted] = buckets.try_emplace({date, slot});
        if (inserted) {
            it->second.date = date;
            it->second.key = SlotKey{weekday_monday0(date), slot, slot_minutes};
        }
        it->second.posts.push_back(std::move(rec));
    }
    if (slot_minutes_out) *slot_minutes_out = slot_minutes;
    return buckets;
}

void write_reps_csv(const std::string& path, const RepsMap& reps) {
    auto out = open_out(path);
    out << "date,slot_index,slot_minutes,rep_index,lat,lon,support\n";
    for (const auto& [key, set] : reps) {
        const std::string date = format_date(key.first);
        for (std::size_t r = 0; r < set.reps.size(); ++r)
            out << date << ',' << key.second << ',' << set.slot.slot_minutes << ',' << r << ','
                << fmt_coord(set.reps[r].lat) << ',' << fmt_coord(set.reps[r].lon) << ','
                << set.support[r] << '\n';
    }
}

RepsMap read_reps_csv(const std::string& path, int* slot_minutes_out) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(errc::format_error, path + ": empty file");

    RepsMap reps;
    int slot_minutes = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = detail::split_csv_line(line);
        if (row.size() < 7) fail(errc::format_error, path + ": short row");
        const Date date = parse_date_or_fail(row[0], path);
        const std::int32_t slot = static_cast<std::int32_t>(parse_long_or_fail(row[1], path));
        slot_minutes = static_cast<int>(parse_long_or_fail(row[2], path));
        const std::size_t rep_index = static_cast<std::size_t>(parse_long_or_fail(row[3], path));
        auto [it, inserted] = reps.try_emplace({date, slot});
        RepresentativeSet& set = it->second;
        if (inserted) {
            set.date = date;
            set.slot = SlotKey{weekday_monday0(date), slot, slot_minutes};
        }
        if (set.reps.size() != rep_index)
            fail(errc::format_error, path + ": rep_index out of order at " + row[0]);
        GeoPoint p{parse_double_or_fail(row[4], path), parse_double_or_fail(row[5], path)};
        set.reps.push_back(p);
        set.support.push_back(parse_long_or_fail(row[6], path));
    }
    if (slot_minutes_out) *slot_minutes_out = slot_minutes;
    return reps;
}

void write_sequences_csv(const std::string& path, std::span<const SymbolSequence> sequences) {
    auto out = open_out(path);
    out << "date,slot_index,rep_index,symbol\n";
    // Row order: by date, slot, then rep. Collect row views and sort.
    struct Row {
        Date date;
        std::int32_t slot;
        std::int32_t rep;
        std::int32_t symbol;
    };
    std::vector<Row> rows;
    for (const SymbolSequence& seq : sequences)
        for (const SymbolEntry& e : seq.entries)
            rows.push_back({e.date, e.slot_index, e.rep_index, e.symbol});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.date != b.date) return a.date < b.date;
        if (a.slot != b.slot) return a.slot < b.slot;
        return a.rep < b.rep;
    });
    for (const Row& r : rows)
        out << format_date(r.date) << ',' << r.slot << ',' << r.rep << ',' << r.symbol << '\n';
}

namespace {

const std::vector<SymbolEntry>& seq_entries(const SymbolSequence& s) { return s.entries; }
const std::vector<TraceSample>& seq_entries(const EntropyTrace& t) { return t.values; }

// Shared grouping for sequences and traces: rows keyed by (weekday, rep),
// each stream ordered by (date, slot).
template <typename RowT, typename SeqT, typename MakeEntry>
std::vector<SeqT> group_streams(std::vector<RowT>& rows, MakeEntry&& make_entry) {
    std::sort(rows.begin(), rows.end(), [](const RowT& a, const RowT& b) {
        const int wa = weekday_monday0(a.date), wb = weekday_monday0(b.date);
        if (wa != wb) return wa < wb;
        if (a.rep != b.rep) return a.rep < b.rep;
        if (a.date != b.date) return a.date < b.date;
        return a.slot < b.slot;
    });

    std::vector<SeqT> out;
    for (const RowT& r : rows) {
        const int wd = weekday_monday0(r.date);
        if (out.empty() || out.back().weekday != wd || out.back().rep_index != r.rep) {
            SeqT seq;
            seq.weekday = wd;
            seq.rep_index = r.rep;
            out.push_back(std::move(seq));
        }
        make_entry(out.back(), r);
    }

    for (SeqT& seq : out) {
        // slots_per_day from the densest day (full coverage expected).
        std::int32_t max_slot = 0;
        for (const auto& e : seq_entries(seq)) max_slot = std::max(max_slot, e.slot_index);
        seq.slots_per_day = max_slot + 1;
    }
    return out;
}

} // namespace

std::vector<SymbolSequence> read_sequences_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(errc::format_error, path + ": empty file");

    struct Row {
        Date date;
        std::int32_t slot;
        std::int32_t rep;
        std::int32_t symbol;
    };
    std::vector<Row> rows;
    std::int32_t max_symbol = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = detail::split_csv_line(line);
        if (row.size() < 4) fail(errc::format_error, path + ": short row");
        Row r;
        r.date = parse_date_or_fail(row[0], path);
        r.slot = static_cast<std::int32_t>(parse_long_or_fail(row[1], path));
        r.rep = static_cast<std::int32_t>(parse_long_or_fail(row[2], path));
        r.symbol = static_cast<std::int32_t>(parse_long_or_fail(row[3], path));
        max_symbol = std::max(max_symbol, r.symbol);
        rows.push_back(r);
    }

    auto out = group_streams<Row, SymbolSequence>(rows, [](SymbolSequence& seq, const Row& r) {
        seq.entries.push_back({r.date, r.slot, r.rep, r.symbol});
    });
    for (SymbolSequence& seq : out) seq.alphabet_size = max_symbol + 2; // cells + missing
    return out;
}

void write_traces_csv(const std::string& path, std::span<const EntropyTrace> traces) {
    auto out = open_out(path);
    out << "date,slot_index,rep_index,h_bits\n";
    struct Row {
        Date date;
        std::int32_t slot;
        std::int32_t rep;
        double h;
    };
    std::vector<Row> rows;
    for (const EntropyTrace& t : traces)
        for (const TraceSample& v : t.values)
            rows.push_back({v.date, v.slot_index, t.rep_index, v.h_bits});
    std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
        if (a.date != b.date) return a.date < b.date;
        if (a.slot != b.slot) return a.slot < b.slot;
        return a.rep < b.rep;
    });
    for (const Row& r : rows)
        out << format_date(r.date) << ',' << r.slot << ',' << r.rep << ',' << fmt_value(r.h)
            << '\n';
}

std::vector<EntropyTrace> read_traces_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(errc::format_error, path + ": empty file");

    struct Row {
        Date date;
        std::int32_t slot;
        std::int32_t rep;
        double h;
    };
    std::vector<Row> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = detail::split_csv_line(line);
        if (row.size() < 4) fail(errc::format_error, path + ": short row");
        Row r;
        r.date = parse_date_or_fail(row[0], path);
        r.slot = static_cast<std::int32_t>(parse_long_or_fail(row[1], path));
        r.rep = static_cast<std::int32_t>(parse_long_or_fail(row[2], path));
        r.h = parse_double_or_fail(row[3], path);
        rows.push_back(r);
    }

    return group_streams<Row, EntropyTrace>(rows, [](EntropyTrace& t, const Row& r) {
        t.values.push_back({r.date, r.slot, r.h});
    });
}

void write_specials_csv(const std::string& path, const SpecialDaySet& specials) {
    auto out = open_out(path);
    out << "date,label\n";
    for (const SpecialDay& s : specials.days) out << format_date(s.date) << ',' << s.label << '\n';
}

SpecialDaySet read_specials_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(errc::format_error, path + ": empty file");

    SpecialDaySet out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = detail::split_csv_line(line);
        if (row.empty()) continue;
        SpecialDay day;
        day.date = parse_date_or_fail(row[0], path);
        if (row.size() > 1) day.label = row[1];
        out.days.push_back(std::move(day));
    }
    return out;
}

void write_ranking_json(const std::string& path, const AnomalyRanking& ranking) {
    auto out = open_out(path);
    out << "[\n";
    for (std::size_t i = 0; i < ranking.entries.size(); ++i) {
        const RankedDay& r = ranking.entries[i];
        out << "  {\"date\": \"" << format_date(r.date) << "\", \"score\": " << fmt_value(r.score)
            << ", \"rank\": " << r.rank << ", \"is_special\": "
            << (r.is_special ? "true" : "false") << '}'
            << (i + 1 < ranking.entries.size() ? "," : "") << '\n';
    }
    out << "]\n";
}

AnomalyRanking read_ranking_json(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        fail(errc::format_error, path + ": bad JSON: " + e.what());
    }
    AnomalyRanking out;
    try {
        for (const json& e : j) {
            RankedDay r;
            r.date = parse_date_or_fail(e.at("date").get<std::string>(), path);
            r.score = e.at("score").get<double>();
            r.rank = e.at("rank").get<int>();
            r.is_special = e.value("is_special", false);
            out.entries.push_back(r);
        }
    } catch (const json::exception& e) {
        fail(errc::format_error, path + ": bad ranking entry: " + e.what());
    }
    return out;
}

void write_curves_csv(const std::string& path, const EvalCurves& curves) {
    auto out = open_out(path);
    out << "fraction_processed,detection_rate,false_positive_rate\n";
    for (const CurvePoint& p : curves.points)
        out << fmt_value(p.fraction_processed) << ',' << fmt_value(p.detection_rate) << ','
            << fmt_value(p.false_positive_rate) << '\n';
}

EvalCurves read_curves_csv(const std::string& path) {
    auto in = open_in(path);
    std::string line;
    if (!std::getline(in, line)) fail(errc::format_error, path + ": empty file");
    EvalCurves out;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto row = detail::split_csv_line(line);
        if (row.size() < 3) fail(errc::format_error, path + ": short row");
        out.points.push_back({parse_double_or_fail(row[0], path),
                              parse_double_or_fail(row[1], path),
                              parse_double_or_fail(row[2], path)});
    }
    return out;
}

std::string clustering_to_json_text(const Clustering& clustering, const SilhouetteResult* sil) {
    json j;
    j["labels"] = clustering.labels;
    j["clusters"] = json::array();
    for (std::size_t c = 0; c < clustering.clusters.size(); ++c) {
        json cj;
        cj["id"] = c;
        cj["size"] = clustering.clusters[c].size();
        cj["center_lat"] = clustering.centroids[c].lat;
        cj["center_lon"] = clustering.centroids[c].lon;
        j["clusters"].push_back(cj);
    }
    if (sil) {
        j["silhouette_mean"] = sil->mean;
        j["silhouette"] = json::array();
        for (std::size_t i = 0; i < sil->per_point.size(); ++i)
            j["silhouette"].push_back(
                json{{"point", sil->point_index[i]}, {"s", sil->per_point[i]}});
    }
    return j.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
    auto out = open_out(path);
    out << text;
}

std::string read_text_file(const std::string& path) {
    auto in = open_in(path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace crowddyn
