#pragma once

#include <cstdint>
#include <span>
#include <unordered_map>
#include <vector>

#include "crowddyn/symbolize.hpp"
#include "crowddyn/timeutil.hpp"

namespace crowddyn {

// Occurrence counts N(s) and total N for one symbol population. Entries are
// erased when their count returns to zero, so every stored count is >= 1.
struct CountTable {
    std::unordered_map<std::int32_t, std::int64_t> counts;
    std::int64_t total = 0;

    void add(std::int32_t symbol);
    void remove(std::int32_t symbol);
};

enum class Estimator { shannon, hartley, grassberger };

const char* estimator_name(Estimator e);
Estimator estimator_from_name(const std::string& name);

/// Shannon entropy of the empirical distribution, in bits:
/// H = -sum_s (N(s)/N) log2(N(s)/N). Zero for a single-symbol population.
double shannon_bits(const CountTable& table);
double shannon_bits(std::span<const std::int32_t> seq);

/// Hartley entropy: log2 of the number of distinct observed symbols.
double hartley_bits(const CountTable& table);
double hartley_bits(std::span<const std::int32_t> seq);

/// Match lengths for the Grassberger entropy-rate estimator. lambdas()[i-2]
/// is the length of the shortest substring starting at position i (1-based,
/// i = 2..N) that does not occur anywhere inside the prefix [1, i-1]. When
/// even the full remaining suffix occurs in the prefix there is no unseen
/// substring before the sequence ends and the value is (N - i + 1) + 1.
std::vector<std::int32_t> grassberger_lambdas(std::span<const std::int32_t> seq);

/// Grassberger entropy-rate estimate in bits:
/// H = ( (1/N) * sum_{i=2..N} lambda_i / log2(i) )^-1. Needs N >= 2.
double grassberger_bits(std::span<const std::int32_t> seq);

// Streaming Shannon entropy over a sliding window of fixed capacity.
// Integer counts are exact; the sum of N(s)*log2(N(s)) terms is maintained
// incrementally (two terms change per add or evict) and recomputed from the
// counts every renormalize_every pushes to keep float drift bounded.
class WindowedEntropy {
public:
    // window_symbols == 0 means unbounded (cumulative mode, nothing evicts).
    explicit WindowedEntropy(std::size_t window_symbols,
                             std::size_t renormalize_every = 10000);

    // Feeds one symbol, evicting the oldest if the window is full.
    // Returns the Shannon entropy of the current window in bits.
    double push(std::int32_t symbol);

    double value_bits() const;
    double hartley_value_bits() const; // log2(distinct symbols in window)
    std::size_t size() const { return window_.size(); }

    // Window contents, oldest first (for batch re-checks in tests).
    std::vector<std::int32_t> window_contents() const;

private:
    void add_count(std::int32_t symbol, std::int64_t delta);
    void renormalize();

    std::size_t capacity_;
    std::size_t renorm_every_;
    std::size_t pushes_since_renorm_ = 0;
    std::vector<std::int32_t> window_; // ring buffer
    std::size_t head_ = 0;
    std::unordered_map<std::int32_t, std::int64_t> counts_;
    std::int64_t total_ = 0;
    double sum_n_log_n_ = 0.0; // sum over symbols of N(s) * log2(N(s))
};

struct EntropyConfig {
    Estimator estimator = Estimator::shannon;
    int window_weeks = 4; // 0 = cumulative (no window)
    int slot_minutes = 15;
    int grid_side = 7;
};

struct TraceSample {
    Date date;
    std::int32_t slot_index = 0;
    double h_bits = 0.0;
};

// Entropy evolution of one per-weekday, per-representative symbol stream.
struct EntropyTrace {
    int weekday = 0;
    int rep_index = 0;
    int slots_per_day = 96;
    EntropyConfig config;
    std::vector<TraceSample> values;
};

/// H(i) over every prefix of the sequence: the empirical-frequency entropy
/// estimate recomputed at each new sample, p(l,i) = N_{l,i} / i.
EntropyTrace cumulative_trace(const SymbolSequence& seq,
                              Estimator estimator = Estimator::shannon);

/// Windowed evolution: at each slot the estimate over the most recent
/// min(available, window_weeks * slots_per_day) symbols. Shannon and Hartley
/// are updated in O(1) amortized per symbol; Grassberger is recomputed per
/// window (it is an offline comparison estimator here).
EntropyTrace windowed_trace(const SymbolSequence& seq, int window_weeks,
                            Estimator estimator = Estimator::shannon);

} // namespace crowddyn
