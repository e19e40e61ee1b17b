#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "crowddyn/detect.hpp"
#include "crowddyn/errors.hpp"

using namespace crowddyn;

namespace {

// A trace over consecutive same-weekday dates with the given per-slot H
// values; h(day, slot) supplies the values.
template <typename Fn>
EntropyTrace make_trace(Date first_date, int n_days, int slots_per_day, Fn&& h, int rep = 0) {
    EntropyTrace t;
    t.weekday = weekday_monday0(first_date);
    t.rep_index = rep;
    t.slots_per_day = slots_per_day;
    for (int day = 0; day < n_days; ++day)
        for (int slot = 0; slot < slots_per_day; ++slot)
            t.values.push_back({first_date + day * 7, slot, h(day, slot)});
    return t;
}

const Date kMonday = date_from_ymd(2025, 1, 6);

} // namespace

TEST_CASE("constant traces score zero") {
    const auto trace = make_trace(kMonday, 8, 4, [](int, int) { return 1.5; });
    const std::vector<EntropyTrace> traces{trace};
    const auto scores = score_days(traces, ScoreMethod::endpoints, 0);
    REQUIRE(scores.size() == 8);
    for (const DayScore& s : scores) CHECK(s.score == 0.0);

    const auto consecutive = score_days(traces, ScoreMethod::consecutive, 0);
    REQUIRE(consecutive.size() == 7); // first same-weekday day has no predecessor
    for (const DayScore& s : consecutive) CHECK(s.score == 0.0);
}

TEST_CASE("a step inside one day is that day's endpoints score") {
    const auto trace = make_trace(kMonday, 6, 8, [](int day, int slot) {
        if (day == 3) return slot < 4 ? 1.0 : 2.0; // +1 bit mid-day
        return 1.0;
    });
    const std::vector<EntropyTrace> traces{trace};
    const auto scores = score_days(traces, ScoreMethod::endpoints, 0);
    REQUIRE(scores.size() == 6);
    for (const DayScore& s : scores) {
        if (s.date == kMonday + 21)
            CHECK(s.score == doctest::Approx(1.0));
        else
            CHECK(s.score == 0.0);
    }
}

TEST_CASE("consecutive scoring compares same-weekday day ends") {
    const auto trace = make_trace(kMonday, 4, 4, [](int day, int) {
        return day == 2 ? 2.5 : 1.0; // day 2 ends 1.5 bits higher, day 3 drops back
    });
    const std::vector<EntropyTrace> traces{trace};
    const auto scores = score_days(traces, ScoreMethod::consecutive, 0);
    REQUIRE(scores.size() == 3);
    CHECK(scores[0].score == 0.0);                      // day 1 vs day 0
    CHECK(scores[1].score == doctest::Approx(1.5));     // day 2 vs day 1
    CHECK(scores[2].score == doctest::Approx(1.5));     // day 3 vs day 2 (drop, absolute)
}

TEST_CASE("warm-up days are excluded; too-short traces are an error") {
    const auto trace = make_trace(kMonday, 5, 4, [](int, int) { return 1.0; });
    const std::vector<EntropyTrace> traces{trace};
    // Trace spans 4*7+1 = 29 days; warm-up 14 removes the first two Mondays.
    const auto scores = score_days(traces, ScoreMethod::endpoints, 14);
    REQUIRE(scores.size() == 3);
    CHECK(scores[0].date == kMonday + 14);

    try {
        score_days(traces, ScoreMethod::endpoints, 40);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::too_short);
    }
}

TEST_CASE("aggregation takes the maximum over streams and never loses score") {
    const auto rep0 = make_trace(kMonday, 4, 4, [](int day, int slot) {
        return day == 1 && slot == 3 ? 1.4 : 1.0;
    }, 0);
    const auto rep1 = make_trace(kMonday, 4, 4, [](int day, int slot) {
        return day == 1 && slot == 3 ? 2.0 : 1.0;
    }, 1);

    const std::vector<EntropyTrace> one{rep0};
    const std::vector<EntropyTrace> both{rep0, rep1};
    const auto scores_one = score_days(one, ScoreMethod::endpoints, 0);
    const auto scores_both = score_days(both, ScoreMethod::endpoints, 0);
    REQUIRE(scores_one.size() == scores_both.size());
    for (std::size_t i = 0; i < scores_one.size(); ++i)
        CHECK(scores_both[i].score >= scores_one[i].score);
    CHECK(scores_both[1].score == doctest::Approx(1.0)); // max(0.4, 1.0)
    CHECK(scores_both[1].rep_index == 1);
}

TEST_CASE("ranking is descending with earlier-date tie break") {
    std::vector<DayScore> scores{
        {kMonday, 0.5, ScoreMethod::endpoints, 0, 0}, {kMonday + 1, 0.9, ScoreMethod::endpoints, 1, 0}, {kMonday + 2, 0.1, ScoreMethod::endpoints, 2, 0}};
    const AnomalyRanking r = rank_days(scores);
    REQUIRE(r.entries.size() == 3);
    CHECK(r.entries[0].date == kMonday + 1);
    CHECK(r.entries[1].date == kMonday);
    CHECK(r.entries[2].date == kMonday + 2);
    CHECK(r.entries[0].rank == 1);

    // Ties: earlier date first; input order irrelevant.
    std::vector<DayScore> ties{{kMonday + 3, 0.7, ScoreMethod::endpoints, 0, 0}, {kMonday, 0.7, ScoreMethod::endpoints, 0, 0}};
    const AnomalyRanking rt = rank_days(ties);
    CHECK(rt.entries[0].date == kMonday);
    std::swap(ties[0], ties[1]);
    const AnomalyRanking rt2 = rank_days(ties);
    CHECK(rt2.entries[0].date == kMonday);
}

TEST_CASE("evaluation curves: ideal case and uniform spread") {
    // 100 days, specials are the top 10 scores.
    std::vector<DayScore> scores;
    for (int i = 0; i < 100; ++i)
        scores.push_back({kMonday + i, i < 10 ? 10.0 - i : 1.0 / (i + 1), ScoreMethod::endpoints, 0, 0});
    AnomalyRanking ranking = rank_days(scores);
    SpecialDaySet specials;
    for (int i = 0; i < 10; ++i) specials.days.push_back({kMonday + i, "ev"});

    const EvalCurves curves = evaluate_ranking(ranking, specials);
    REQUIRE(curves.points.size() == 100);
    CHECK(curves.points[9].detection_rate == doctest::Approx(1.0));
    CHECK(curves.points[9].fraction_processed == doctest::Approx(0.1));
    CHECK(curves.points[9].false_positive_rate == doctest::Approx(0.0));
    CHECK(curves.points[99].detection_rate == doctest::Approx(1.0));
    CHECK(curves.points[99].fraction_processed == doctest::Approx(1.0));
    // Detection never decreases.
    for (std::size_t i = 1; i < curves.points.size(); ++i)
        CHECK(curves.points[i].detection_rate >= curves.points[i - 1].detection_rate);
    // Ranking entries got their is_special flags.
    CHECK(ranking.entries[0].is_special);
    CHECK(!ranking.entries[50].is_special);

    // Specials planted at every 10th rank: the detection curve is the
    // diagonal sampled at those ranks.
    std::vector<DayScore> spread;
    for (int i = 0; i < 100; ++i) spread.push_back({kMonday + i, 100.0 - i, ScoreMethod::endpoints, 0, 0});
    AnomalyRanking ranking2 = rank_days(spread);
    SpecialDaySet every10;
    for (int i = 9; i < 100; i += 10)
        every10.days.push_back({ranking2.entries[i].date, "ev"});
    const EvalCurves diag = evaluate_ranking(ranking2, every10);
    for (std::size_t m = 0; m < diag.points.size(); ++m) {
        const double expect = std::floor((m + 1) / 10.0) / 10.0;
        CHECK(diag.points[m].detection_rate == doctest::Approx(expect));
    }
}

TEST_CASE("evaluation is invariant to score scaling") {
    std::mt19937_64 eng(61);
    std::vector<DayScore> scores;
    for (int i = 0; i < 50; ++i)
        scores.push_back({kMonday + i, static_cast<double>(eng() % 1000) / 7.0, ScoreMethod::endpoints, 0, 0});
    SpecialDaySet specials;
    for (int i = 0; i < 50; i += 11) specials.days.push_back({kMonday + i, "ev"});

    AnomalyRanking r1 = rank_days(scores);
    for (DayScore& s : scores) s.score *= 2.0;
    AnomalyRanking r2 = rank_days(scores);
    const EvalCurves c1 = evaluate_ranking(r1, specials);
    const EvalCurves c2 = evaluate_ranking(r2, specials);
    REQUIRE(c1.points.size() == c2.points.size());
    for (std::size_t i = 0; i < c1.points.size(); ++i) {
        CHECK(c1.points[i].detection_rate == c2.points[i].detection_rate);
        CHECK(c1.points[i].false_positive_rate == c2.points[i].false_positive_rate);
    }
}

TEST_CASE("specials outside the scored range are a label mismatch") {
    std::vector<DayScore> scores{{kMonday, 1.0, ScoreMethod::endpoints, 0, 0}, {kMonday + 1, 0.5, ScoreMethod::endpoints, 0, 0}};
    AnomalyRanking ranking = rank_days(scores);
    SpecialDaySet specials;
    specials.days.push_back({kMonday + 100, "out of range"});
    try {
        evaluate_ranking(ranking, specials);
        CHECK(false);
    } catch (const Error& e) {
        CHECK(e.code() == errc::label_mismatch);
        CHECK(std::string(e.what()).find(format_date(kMonday + 100)) != std::string::npos);
    }
}
