#include "crowddyn/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "crowddyn/errors.hpp"

namespace crowddyn {

namespace {

using nlohmann::json;

// Explicit transforms on top of mt19937_64 so traces are reproducible
// independent of the standard library's distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform01() {
        return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1 = uniform01();
        while (u1 <= 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(2.0 * M_PI * u2);
        have_spare_ = true;
        return r * std::cos(2.0 * M_PI * u2);
    }

    std::int64_t poisson(double lambda) {
        if (lambda <= 0.0) return 0;
        if (lambda < 30.0) {
            const double limit = std::exp(-lambda);
            std::int64_t k = 0;
            double p = 1.0;
            do {
                ++k;
                p *= uniform01();
            } while (p > limit);
            return k - 1;
        }
        const double v = lambda + std::sqrt(lambda) * normal();
        return v <= 0.0 ? 0 : static_cast<std::int64_t>(std::llround(v));
    }

private:
    std::mt19937_64 eng_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

constexpr int kGenSlotMinutes = 15; // generation granularity
constexpr int kGenSlotsPerDay = 1440 / kGenSlotMinutes;

std::array<double, 24> default_hourly() {
    // Quiet nights, busy afternoons and evenings.
    std::array<double, 24> h{};
    for (int hour = 0; hour < 24; ++hour) {
        if (hour < 7)
            h[hour] = 0.12;
        else if (hour < 10)
            h[hour] = 0.85;
        else if (hour < 16)
            h[hour] = 1.0;
        else if (hour < 20)
            h[hour] = 1.15;
        else
            h[hour] = 0.9;
    }
    return h;
}

GeoPoint hotspot_at(const Region& region, double east_m, double north_m) {
    return from_local_enu({east_m, north_m}, region.center);
}

} // namespace

const char* anomaly_type_name(AnomalyType t) {
    switch (t) {
    case AnomalyType::crowd_surge: return "crowd_surge";
    case AnomalyType::crowd_absence: return "crowd_absence";
    case AnomalyType::hotspot_shift: return "hotspot_shift";
    }
    return "unknown";
}

AnomalyType anomaly_type_from_name(const std::string& name) {
    if (name == "crowd_surge") return AnomalyType::crowd_surge;
    if (name == "crowd_absence") return AnomalyType::crowd_absence;
    if (name == "hotspot_shift") return AnomalyType::hotspot_shift;
    fail(errc::bad_config, "unknown anomaly type: " + name);
}

Scenario default_scenario() {
    Scenario s;
    s.seed = 424242;
    s.start_date = date_from_ymd(2025, 1, 6); // a Monday
    s.period_days = 26 * 7;
    s.posts_per_day = 12000;
    s.region.center = {40.756667, -73.986389};
    s.region.radius_m = 5000.0;
    s.region.side_m = 5000.0;
    s.tz_offset_minutes = -300;
    s.day_noise_sigma = 0.03;

    const std::array<double, 7> wd{1.0, 1.0, 1.0, 1.0, 1.1, 1.25, 1.2};
    const auto hourly = default_hourly();

    // Two dominant hotspots whose densities bridge into one mass at
    // street-level eps in busy slots, plus two satellites near each end.
    HotspotSpec a{"midtown-west", hotspot_at(s.region, -500, 100), 280.0, 0.44, hourly, wd};
    HotspotSpec b{"midtown-east", hotspot_at(s.region, 500, -100), 280.0, 0.34, hourly, wd};
    HotspotSpec c{"park-corner", hotspot_at(s.region, -1200, 814), 160.0, 0.13, hourly, wd};
    HotspotSpec d{"market-square", hotspot_at(s.region, 1200, -814), 160.0, 0.09, hourly, wd};
    s.hotspots = {a, b, c, d};

    struct Plant {
        int offset;
        AnomalyType type;
    };
    const Plant plants[] = {
        {41, AnomalyType::hotspot_shift}, {55, AnomalyType::crowd_surge},
        {68, AnomalyType::crowd_absence}, {82, AnomalyType::hotspot_shift},
        {95, AnomalyType::crowd_surge},   {109, AnomalyType::crowd_absence},
        {123, AnomalyType::hotspot_shift}, {150, AnomalyType::crowd_surge},
    };
    int idx = 0;
    for (const Plant& plant : plants) {
        AnomalySpec an;
        an.date = s.start_date + plant.offset;
        an.type = plant.type;
        switch (plant.type) {
        case AnomalyType::hotspot_shift:
            an.hotspot = 0; // dominant hotspot drifts east
            an.magnitude = 800.0;
            an.bearing_deg = 90.0;
            break;
        case AnomalyType::crowd_surge:
            an.hotspot = 3; // the small market explodes
            an.magnitude = 6.0;
            break;
        case AnomalyType::crowd_absence:
            an.hotspot = 0; // the busiest area goes quiet
            an.magnitude = 0.07;
            break;
        }
        an.label = std::string(anomaly_type_name(an.type)) + "-" + std::to_string(idx++);
        s.anomalies.push_back(an);
    }
    return s;
}

namespace {

json region_to_json(const Region& r) {
    return json{{"center_lat", r.center.lat},
                {"center_lon", r.center.lon},
                {"radius_m", r.radius_m},
                {"side_m", r.side_m}};
}

Region region_from_json(const json& j) {
    Region r;
    r.center.lat = j.at("center_lat").get<double>();
    r.center.lon = j.at("center_lon").get<double>();
    r.radius_m = j.at("radius_m").get<double>();
    r.side_m = j.at("side_m").get<double>();
    return r;
}

} // namespace

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["seed"] = s.seed;
    j["start_date"] = format_date(s.start_date);
    j["period_days"] = s.period_days;
    j["posts_per_day"] = s.posts_per_day;
    j["region"] = region_to_json(s.region);
    j["tz_offset_minutes"] = s.tz_offset_minutes;
    j["day_noise_sigma"] = s.day_noise_sigma;
    j["hotspots"] = json::array();
    for (const HotspotSpec& h : s.hotspots) {
        json hj;
        hj["name"] = h.name;
        hj["lat"] = h.center.lat;
        hj["lon"] = h.center.lon;
        hj["spread_m"] = h.spread_m;
        hj["share"] = h.share;
        hj["hourly"] = h.hourly;
        hj["weekday_mult"] = h.weekday_mult;
        j["hotspots"].push_back(hj);
    }
    j["anomalies"] = json::array();
    for (const AnomalySpec& a : s.anomalies) {
        json aj;
        aj["date"] = format_date(a.date);
        aj["type"] = anomaly_type_name(a.type);
        aj["magnitude"] = a.magnitude;
        aj["hotspot"] = a.hotspot;
        aj["bearing_deg"] = a.bearing_deg;
        aj["minute_begin"] = a.minute_begin;
        aj["minute_end"] = a.minute_end;
        aj["label"] = a.label;
        j["anomalies"].push_back(aj);
    }
    return j.dump(2) + "\n";
}

Scenario scenario_from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(errc::format_error, std::string("scenario: bad JSON: ") + e.what());
    }
    try {
        Scenario s;
        s.seed = j.at("seed").get<std::uint64_t>();
        const auto date = parse_date(j.at("start_date").get<std::string>());
        if (!date) fail(errc::format_error, "scenario: bad start_date");
        s.start_date = *date;
        s.period_days = j.at("period_days").get<int>();
        s.posts_per_day = j.at("posts_per_day").get<std::int64_t>();
        s.region = region_from_json(j.at("region"));
        s.tz_offset_minutes = j.value("tz_offset_minutes", -300);
        s.day_noise_sigma = j.value("day_noise_sigma", 0.03);
        for (const json& hj : j.at("hotspots")) {
            HotspotSpec h;
            h.name = hj.value("name", "");
            h.center.lat = hj.at("lat").get<double>();
            h.center.lon = hj.at("lon").get<double>();
            h.spread_m = hj.at("spread_m").get<double>();
            h.share = hj.at("share").get<double>();
            h.hourly = hj.at("hourly").get<std::array<double, 24>>();
            if (hj.contains("weekday_mult"))
                h.weekday_mult = hj.at("weekday_mult").get<std::array<double, 7>>();
            s.hotspots.push_back(h);
        }
        for (const json& aj : j.value("anomalies", json::array())) {
            AnomalySpec a;
            const auto ad = parse_date(aj.at("date").get<std::string>());
            if (!ad) fail(errc::format_error, "scenario: bad anomaly date");
            a.date = *ad;
            a.type = anomaly_type_from_name(aj.at("type").get<std::string>());
            a.magnitude = aj.at("magnitude").get<double>();
            a.hotspot = aj.value("hotspot", -1);
            a.bearing_deg = aj.value("bearing_deg", 90.0);
            a.minute_begin = aj.value("minute_begin", 0);
            a.minute_end = aj.value("minute_end", 1440);
            a.label = aj.value("label", std::string(anomaly_type_name(a.type)));
            s.anomalies.push_back(a);
        }
        return s;
    } catch (const json::exception& e) {
        fail(errc::format_error, std::string("scenario: missing or bad field: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(errc::io_error, "scenario: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return scenario_from_json_text(buf.str());
}

SpecialDaySet generate(const Scenario& scenario,
                       const std::function<void(PostRecord&&)>& sink) {
    if (scenario.period_days < 1) fail(errc::bad_config, "generate: period_days must be >= 1");
    if (scenario.hotspots.empty()) fail(errc::bad_config, "generate: no hotspots");
    if (!scenario.region.valid()) fail(errc::bad_config, "generate: invalid region");
    for (const AnomalySpec& a : scenario.anomalies) {
        if (a.date < scenario.start_date ||
            a.date > scenario.start_date + (scenario.period_days - 1))
            fail(errc::bad_config, "generate: anomaly date " + format_date(a.date) +
                                       " outside the period");
    }

    const std::size_t n_hotspots = scenario.hotspots.size();

    // Per-weekday normalization so the average day hits posts_per_day while
    // the weekday multipliers keep their relative effect.
    std::array<double, 7> weekday_weight{};
    for (int wd = 0; wd < 7; ++wd) {
        double sum = 0.0;
        for (const HotspotSpec& h : scenario.hotspots)
            for (int slot = 0; slot < kGenSlotsPerDay; ++slot)
                sum += h.share * h.hourly[(slot * kGenSlotMinutes) / 60] * h.weekday_mult[wd];
        weekday_weight[wd] = sum;
    }
    const double mean_weight =
        (weekday_weight[0] + weekday_weight[1] + weekday_weight[2] + weekday_weight[3] +
         weekday_weight[4] + weekday_weight[5] + weekday_weight[6]) /
        7.0;
    if (mean_weight <= 0.0) fail(errc::bad_config, "generate: zero total intensity");
    const double norm = static_cast<double>(scenario.posts_per_day) / mean_weight;

    Rng rng(scenario.seed);
    const double sigma = scenario.day_noise_sigma;

    for (int day = 0; day < scenario.period_days; ++day) {
        const Date date = scenario.start_date + day;
        const int wd = weekday_monday0(date);
        const double day_factor =
            sigma > 0.0 ? std::exp(sigma * rng.normal() - sigma * sigma / 2.0) : 1.0;

        for (int slot = 0; slot < kGenSlotsPerDay; ++slot) {
            const int minute = slot * kGenSlotMinutes;
            const int hour = minute / 60;
            for (std::size_t hi = 0; hi < n_hotspots; ++hi) {
                const HotspotSpec& h = scenario.hotspots[hi];
                double lambda = norm * h.share * h.hourly[hour] * h.weekday_mult[wd] * day_factor;
                GeoPoint center = h.center;

                for (const AnomalySpec& a : scenario.anomalies) {
                    if (a.date != date) continue;
                    if (minute < a.minute_begin || minute >= a.minute_end) continue;
                    if (a.hotspot >= 0 && a.hotspot != static_cast<int>(hi)) continue;
                    switch (a.type) {
                    case AnomalyType::crowd_surge:
                    case AnomalyType::crowd_absence:
                        lambda *= a.magnitude;
                        break;
                    case AnomalyType::hotspot_shift: {
                        const double rad = a.bearing_deg * M_PI / 180.0;
                        const EnuPoint off{a.magnitude * std::sin(rad),
                                           a.magnitude * std::cos(rad)};
                        const EnuPoint at = to_local_enu(center, scenario.region.center);
                        center = from_local_enu(
                            {at.east_m + off.east_m, at.north_m + off.north_m},
                            scenario.region.center);
                        break;
                    }
                    }
                }

                const std::int64_t count = rng.poisson(lambda);
                const EnuPoint at = to_local_enu(center, scenario.region.center);
                for (std::int64_t p = 0; p < count; ++p) {
                    const double east = at.east_m + h.spread_m * rng.normal();
                    const double north = at.north_m + h.spread_m * rng.normal();
                    const int sec = static_cast<int>(rng.uniform01() * (kGenSlotMinutes * 60));
                    PostRecord rec;
                    rec.loc = from_local_enu({east, north}, scenario.region.center);
                    rec.ts = static_cast<std::int64_t>(date.days) * 86400 + minute * 60 + sec -
                             static_cast<std::int64_t>(scenario.tz_offset_minutes) * 60;
                    sink(std::move(rec));
                }
            }
        }
    }

    SpecialDaySet truth;
    for (const AnomalySpec& a : scenario.anomalies) truth.days.push_back({a.date, a.label});
    std::sort(truth.days.begin(), truth.days.end(),
              [](const SpecialDay& x, const SpecialDay& y) { return x.date < y.date; });
    return truth;
}

GeneratedTrace generate_vector(const Scenario& scenario) {
    GeneratedTrace out;
    out.ground_truth =
        generate(scenario, [&](PostRecord&& rec) { out.posts.push_back(std::move(rec)); });
    return out;
}

} // namespace crowddyn
