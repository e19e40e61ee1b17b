#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "crowddyn/detect.hpp"
#include "crowddyn/geo.hpp"
#include "crowddyn/ingest.hpp"
#include "crowddyn/timeutil.hpp"

namespace crowddyn {

// One activity hotspot: posts scatter isotropically (Gaussian, spread_m)
// around the center, with an intensity that follows the hourly curve and a
// per-weekday multiplier.
struct HotspotSpec {
    std::string name;
    GeoPoint center;
    double spread_m = 200.0;
    double share = 1.0; // relative weight against the other hotspots
    std::array<double, 24> hourly{};
    std::array<double, 7> weekday_mult{1, 1, 1, 1, 1, 1, 1};
};

enum class AnomalyType { crowd_surge, crowd_absence, hotspot_shift };

const char* anomaly_type_name(AnomalyType t);
AnomalyType anomaly_type_from_name(const std::string& name);

struct AnomalySpec {
    Date date;
    AnomalyType type = AnomalyType::crowd_surge;
    double magnitude = 1.0;   // intensity factor, or meters for hotspot_shift
    int hotspot = -1;         // index, -1 = every hotspot
    double bearing_deg = 90.0; // shift direction, 90 = east
    int minute_begin = 0;     // affected local minutes [begin, end)
    int minute_end = 1440;
    std::string label;
};

struct Scenario {
    std::uint64_t seed = 424242;
    Date start_date;
    int period_days = 182;
    std::int64_t posts_per_day = 12000;
    Region region;
    int tz_offset_minutes = -300;
    double day_noise_sigma = 0.03; // lognormal day-to-day intensity factor
    std::vector<HotspotSpec> hotspots;
    std::vector<AnomalySpec> anomalies;
};

/// The built-in scenario: four hotspots inside the 5 km disc around Times
/// Square, two dominant ones close enough to form one density-connected
/// mass, day/night intensity profile, 26 weeks, 8 planted anomaly days of
/// mixed types.
Scenario default_scenario();

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& scenario);
Scenario load_scenario(const std::string& path);

// Deterministic, seed-driven generator. The RNG is a Mersenne Twister
// (mt19937_64) with explicit transforms (53-bit uniforms, Box-Muller
// normals, Knuth/rounded-normal Poisson), so one seed gives one trace.
// Generation order is date -> 15-minute slot -> hotspot -> posts.

/// Streams the synthetic posts into sink and returns the planted ground
/// truth labels.
SpecialDaySet generate(const Scenario& scenario,
                       const std::function<void(PostRecord&&)>& sink);

struct GeneratedTrace {
    std::vector<PostRecord> posts;
    SpecialDaySet ground_truth;
};

GeneratedTrace generate_vector(const Scenario& scenario);

} // namespace crowddyn
