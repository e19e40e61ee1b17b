#pragma once

#include <span>
#include <string>
#include <vector>

#include "crowddyn/entropy.hpp"
#include "crowddyn/timeutil.hpp"

namespace crowddyn {

enum class ScoreMethod {
    endpoints,   // |H(last slot of day) - H(first slot of day)|
    consecutive, // |H(end of day) - H(end of previous same-weekday day)|
};

const char* score_method_name(ScoreMethod m);
ScoreMethod score_method_from_name(const std::string& name);

struct DayScore {
    Date date;
    double score = 0.0; // bits, >= 0
    ScoreMethod method = ScoreMethod::endpoints;
    int weekday = 0;
    int rep_index = 0; // stream that produced the maximum
};

struct SpecialDay {
    Date date;
    std::string label;
};

struct SpecialDaySet {
    std::vector<SpecialDay> days;

    bool contains(Date d) const;
};

struct RankedDay {
    Date date;
    double score = 0.0;
    int rank = 0; // 1-based, descending score
    bool is_special = false;
};

struct AnomalyRanking {
    std::vector<RankedDay> entries;
};

struct CurvePoint {
    double fraction_processed = 0.0;
    double detection_rate = 0.0;
    double false_positive_rate = 0.0;
};

struct EvalCurves {
    std::vector<CurvePoint> points; // one per ranking prefix length
};

/// Per-day anomaly scores from the entropy traces. The day score aggregates
/// the per-stream scores by maximum, so a change visible to any
/// representative surfaces. Days inside the first warmup_days of the traced
/// period are excluded (early estimates are noise). The absolute change is
/// scored: a collapse to high predictability is as anomalous as a jump.
/// Throws errc::too_short when the traces span fewer than warmup_days + 1
/// days.
std::vector<DayScore> score_days(std::span<const EntropyTrace> traces, ScoreMethod method,
                                 int warmup_days);

/// Descending by score; equal scores rank the earlier date first.
AnomalyRanking rank_days(std::span<const DayScore> scores);

/// Detection and false-positive curves over every ranking prefix m:
/// detection = |top-m intersect specials| / |specials|,
/// false-positive rate = |top-m minus specials| / m.
/// Also marks is_special on the ranking entries. Specials must all fall on
/// scored dates, else errc::label_mismatch naming the offenders.
EvalCurves evaluate_ranking(AnomalyRanking& ranking, const SpecialDaySet& specials);

} // namespace crowddyn
