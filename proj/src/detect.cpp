#include "crowddyn/detect.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "crowddyn/errors.hpp"

namespace crowddyn {

const char* score_method_name(ScoreMethod m) {
    return m == ScoreMethod::endpoints ? "endpoints" : "consecutive";
}

ScoreMethod score_method_from_name(const std::string& name) {
    if (name == "endpoints") return ScoreMethod::endpoints;
    if (name == "consecutive") return ScoreMethod::consecutive;
    fail(errc::bad_config, "unknown score method: " + name);
}

bool SpecialDaySet::contains(Date d) const {
    for (const SpecialDay& s : days)
        if (s.date == d) return true;
    return false;
}

std::vector<DayScore> score_days(std::span<const EntropyTrace> traces, ScoreMethod method,
                                 int warmup_days) {
    if (traces.empty()) fail(errc::empty_input, "score_days: no traces");
    if (warmup_days < 0) fail(errc::bad_config, "score_days: negative warmup");

    Date first{INT32_MAX}, last{INT32_MIN};
    for (const EntropyTrace& trace : traces) {
        for (const TraceSample& v : trace.values) {
            first = std::min(first, v.date);
            last = std::max(last, v.date);
        }
    }
    if (first > last) fail(errc::empty_input, "score_days: traces carry no samples");
    if (last - first + 1 < warmup_days + 1)
        fail(errc::too_short, "score_days: traces span " + std::to_string(last - first + 1) +
                                  " days, need more than the " + std::to_string(warmup_days) +
                                  "-day warm-up");

    const Date cutoff = first + warmup_days;

    struct Best {
        double score = -1.0;
        int weekday = 0;
        int rep = 0;
    };
    std::map<Date, Best> per_date;

    for (const EntropyTrace& trace : traces) {
        // Trace samples are ordered by (date, slot); walk date groups.
        std::size_t i = 0;
        bool have_prev_day_end = false;
        double prev_day_end = 0.0;
        while (i < trace.values.size()) {
            std::size_t j = i;
            while (j + 1 < trace.values.size() && trace.values[j + 1].date == trace.values[i].date)
                ++j;
            const Date day = trace.values[i].date;
            const double day_first = trace.values[i].h_bits;
            const double day_last = trace.values[j].h_bits;

            double score = -1.0;
            if (method == ScoreMethod::endpoints) {
                score = std::abs(day_last - day_first);
            } else if (have_prev_day_end) {
                score = std::abs(day_last - prev_day_end);
            }
            have_prev_day_end = true;
            prev_day_end = day_last;

            if (score >= 0.0 && day >= cutoff) {
                Best& best = per_date[day];
                if (score > best.score) {
                    best.score = score;
                    best.weekday = trace.weekday;
                    best.rep = trace.rep_index;
                }
            }
            i = j + 1;
        }
    }

    std::vector<DayScore> out;
    out.reserve(per_date.size());
    for (const auto& [date, best] : per_date)
        out.push_back({date, best.score, method, best.weekday, best.rep});
    return out;
}

AnomalyRanking rank_days(std::span<const DayScore> scores) {
    if (scores.empty()) fail(errc::empty_input, "rank_days: no scores");

    std::vector<DayScore> sorted(scores.begin(), scores.end());
    std::sort(sorted.begin(), sorted.end(), [](const DayScore& a, const DayScore& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.date < b.date;
    });

    AnomalyRanking out;
    out.entries.reserve(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i)
        out.entries.push_back(
            {sorted[i].date, sorted[i].score, static_cast<int>(i) + 1, false});
    return out;
}

EvalCurves evaluate_ranking(AnomalyRanking& ranking, const SpecialDaySet& specials) {
    if (specials.days.empty()) fail(errc::empty_input, "evaluate_ranking: no special days");
    if (ranking.entries.empty()) fail(errc::empty_input, "evaluate_ranking: empty ranking");

    std::set<Date> scored;
    for (const RankedDay& r : ranking.entries) scored.insert(r.date);

    std::set<Date> special_dates;
    std::string offenders;
    for (const SpecialDay& s : specials.days) {
        special_dates.insert(s.date);
        if (!scored.count(s.date)) {
            if (!offenders.empty()) offenders += ", ";
            offenders += format_date(s.date);
        }
    }
    if (!offenders.empty())
        fail(errc::label_mismatch,
             "evaluate_ranking: special days outside the scored range: " + offenders);

    const double n_special = static_cast<double>(special_dates.size());
    const double n_total = static_cast<double>(ranking.entries.size());

    EvalCurves curves;
    curves.points.reserve(ranking.entries.size());
    std::size_t hits = 0;
    for (std::size_t m = 0; m < ranking.entries.size(); ++m) {
        RankedDay& entry = ranking.entries[m];
        entry.is_special = special_dates.count(entry.date) > 0;
        if (entry.is_special) ++hits;
        CurvePoint p;
        p.fraction_processed = static_cast<double>(m + 1) / n_total;
        p.detection_rate = static_cast<double>(hits) / n_special;
        p.false_positive_rate =
            static_cast<double>(m + 1 - hits) / static_cast<double>(m + 1);
        curves.points.push_back(p);
    }
    return curves;
}

} // namespace crowddyn
