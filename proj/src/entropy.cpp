#include "crowddyn/entropy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <string>

#include "crowddyn/errors.hpp"

namespace crowddyn {

namespace {

double log2_int(std::int64_t n) {
    return std::log2(static_cast<double>(n));
}

// H = log2(N) - (1/N) * sum N(s) log2 N(s); the 0 log 0 convention is
// automatic because absent symbols carry no term.
double shannon_from_counts(const std::unordered_map<std::int32_t, std::int64_t>& counts,
                           std::int64_t total) {
    if (total <= 0) fail(errc::empty_input, "shannon: empty sequence");
    double sum = 0.0;
    for (const auto& [sym, n] : counts) sum += static_cast<double>(n) * log2_int(n);
    const double h = log2_int(total) - sum / static_cast<double>(total);
    return h < 0.0 ? 0.0 : h;
}

} // namespace

const char* estimator_name(Estimator e) {
    switch (e) {
    case Estimator::shannon: return "shannon";
    case Estimator::hartley: return "hartley";
    case Estimator::grassberger: return "grassberger";
    }
    return "unknown";
}

Estimator estimator_from_name(const std::string& name) {
    if (name == "shannon") return Estimator::shannon;
    if (name == "hartley") return Estimator::hartley;
    if (name == "grassberger") return Estimator::grassberger;
    fail(errc::bad_config, "unknown estimator: " + name);
}

void CountTable::add(std::int32_t symbol) {
    ++counts[symbol];
    ++total;
}

void CountTable::remove(std::int32_t symbol) {
    auto it = counts.find(symbol);
    if (it == counts.end() || it->second <= 0)
        fail(errc::empty_input, "CountTable::remove: symbol not present");
    if (--it->second == 0) counts.erase(it);
    --total;
}

double shannon_bits(const CountTable& table) {
    return shannon_from_counts(table.counts, table.total);
}

double shannon_bits(std::span<const std::int32_t> seq) {
    if (seq.empty()) fail(errc::empty_input, "shannon: empty sequence");
    CountTable t;
    for (const std::int32_t s : seq) t.add(s);
    return shannon_bits(t);
}

double hartley_bits(const CountTable& table) {
    if (table.total <= 0) fail(errc::empty_input, "hartley: empty sequence");
    return log2_int(static_cast<std::int64_t>(table.counts.size()));
}

double hartley_bits(std::span<const std::int32_t> seq) {
    if (seq.empty()) fail(errc::empty_input, "hartley: empty sequence");
    CountTable t;
    for (const std::int32_t s : seq) t.add(s);
    return hartley_bits(t);
}

namespace {

// Longest m such that seq[i..i+m-1] occurs fully inside seq[0..i-1]. An
// occurrence starting at j contributes at most i-j symbols (it must end
// before i), and m never exceeds the remaining suffix length. Scans the
// occurrence list of seq[i] with the usual best-so-far pruning.
std::int32_t longest_match(std::span<const std::int32_t> seq, std::size_t i,
                           const std::unordered_map<std::int32_t, std::vector<std::int32_t>>& positions) {
    const std::size_t n = seq.size();
    const std::size_t avail = n - i;
    auto it = positions.find(seq[i]);
    if (it == positions.end()) return 0;

    std::size_t best = 0;
    for (const std::int32_t j_signed : it->second) {
        const std::size_t j = static_cast<std::size_t>(j_signed);
        if (j >= i) break; // lists are ascending
        const std::size_t cap = std::min(i - j, avail);
        if (cap <= best) continue;
        std::size_t m = 1;
        while (m < cap && seq[j + m] == seq[i + m]) ++m;
        if (m > best) {
            best = m;
            if (best == avail) break; // cannot grow further
        }
    }
    return static_cast<std::int32_t>(best);
}

} // namespace

std::vector<std::int32_t> grassberger_lambdas(std::span<const std::int32_t> seq) {
    const std::size_t n = seq.size();
    if (n < 2) fail(errc::too_short, "grassberger: need at least 2 symbols");

    std::unordered_map<std::int32_t, std::vector<std::int32_t>> positions;
    positions.reserve(64);
    positions[seq[0]].push_back(0);

    // The shortest unseen substring is one longer than the longest seen one;
    // if the entire remaining suffix has been seen that lands exactly on the
    // (N - i + 1) + 1 end-of-sequence convention.
    std::vector<std::int32_t> lambdas;
    lambdas.reserve(n - 1);
    for (std::size_t i = 1; i < n; ++i) {
        lambdas.push_back(longest_match(seq, i, positions) + 1);
        positions[seq[i]].push_back(static_cast<std::int32_t>(i));
    }
    return lambdas;
}

double grassberger_bits(std::span<const std::int32_t> seq) {
    const std::vector<std::int32_t> lambdas = grassberger_lambdas(seq);
    const double n = static_cast<double>(seq.size());
    double sum = 0.0;
    for (std::size_t k = 0; k < lambdas.size(); ++k) {
        const double i = static_cast<double>(k + 2); // lambda index runs 2..N
        sum += static_cast<double>(lambdas[k]) / std::log2(i);
    }
    if (sum <= 0.0) return 0.0;
    return n / sum;
}

WindowedEntropy::WindowedEntropy(std::size_t window_symbols, std::size_t renormalize_every)
    : capacity_(window_symbols), renorm_every_(std::max<std::size_t>(1, renormalize_every)) {
    if (capacity_ > 0) window_.reserve(capacity_);
}

void WindowedEntropy::add_count(std::int32_t symbol, std::int64_t delta) {
    auto& n = counts_[symbol];
    if (n > 0) sum_n_log_n_ -= static_cast<double>(n) * log2_int(n);
    n += delta;
    total_ += delta;
    if (n > 0)
        sum_n_log_n_ += static_cast<double>(n) * log2_int(n);
    else
        counts_.erase(symbol);
}

void WindowedEntropy::renormalize() {
    double sum = 0.0;
    for (const auto& [sym, n] : counts_) sum += static_cast<double>(n) * log2_int(n);
    sum_n_log_n_ = sum;
}

double WindowedEntropy::push(std::int32_t symbol) {
    if (capacity_ > 0 && window_.size() == capacity_) {
        add_count(window_[head_], -1);
        window_[head_] = symbol;
        head_ = (head_ + 1) % capacity_;
    } else {
        window_.push_back(symbol);
    }
    add_count(symbol, +1);

    if (++pushes_since_renorm_ >= renorm_every_) {
        renormalize();
        pushes_since_renorm_ = 0;
    }
    return value_bits();
}

double WindowedEntropy::value_bits() const {
    if (total_ <= 0) return 0.0;
    const double h = log2_int(total_) - sum_n_log_n_ / static_cast<double>(total_);
    return h < 0.0 ? 0.0 : h;
}

double WindowedEntropy::hartley_value_bits() const {
    if (counts_.empty()) return 0.0;
    return log2_int(static_cast<std::int64_t>(counts_.size()));
}

std::vector<std::int32_t> WindowedEntropy::window_contents() const {
    std::vector<std::int32_t> out;
    out.reserve(window_.size());
    if (capacity_ > 0 && window_.size() == capacity_) {
        for (std::size_t k = 0; k < capacity_; ++k)
            out.push_back(window_[(head_ + k) % capacity_]);
    } else {
        out = window_;
    }
    return out;
}

EntropyTrace cumulative_trace(const SymbolSequence& seq, Estimator estimator) {
    if (seq.entries.empty()) fail(errc::empty_input, "cumulative_trace: empty sequence");

    EntropyTrace trace;
    trace.weekday = seq.weekday;
    trace.rep_index = seq.rep_index;
    trace.slots_per_day = seq.slots_per_day;
    trace.config.estimator = estimator;
    trace.config.window_weeks = 0;
    trace.values.reserve(seq.entries.size());

    WindowedEntropy counting(0);
    std::vector<std::int32_t> consumed; // grassberger needs the prefix itself
    if (estimator == Estimator::grassberger) consumed.reserve(seq.entries.size());

    for (const SymbolEntry& e : seq.entries) {
        double h = 0.0;
        switch (estimator) {
        case Estimator::shannon:
            h = counting.push(e.symbol);
            break;
        case Estimator::hartley:
            counting.push(e.symbol);
            h = counting.hartley_value_bits();
            break;
        case Estimator::grassberger:
            consumed.push_back(e.symbol);
            if (consumed.size() >= 2) h = grassberger_bits(consumed);
            break;
        }
        trace.values.push_back({e.date, e.slot_index, h});
    }
    return trace;
}

EntropyTrace windowed_trace(const SymbolSequence& seq, int window_weeks, Estimator estimator) {
    if (window_weeks <= 0) return cumulative_trace(seq, estimator);
    if (seq.entries.empty()) fail(errc::empty_input, "windowed_trace: empty sequence");

    const std::size_t window = static_cast<std::size_t>(window_weeks) *
                               static_cast<std::size_t>(seq.slots_per_day);

    EntropyTrace trace;
    trace.weekday = seq.weekday;
    trace.rep_index = seq.rep_index;
    trace.slots_per_day = seq.slots_per_day;
    trace.config.estimator = estimator;
    trace.config.window_weeks = window_weeks;
    trace.values.reserve(seq.entries.size());

    if (estimator == Estimator::grassberger) {
        // Recomputed per window; this estimator is offline-only here.
        std::deque<std::int32_t> win;
        std::vector<std::int32_t> buf;
        for (const SymbolEntry& e : seq.entries) {
            win.push_back(e.symbol);
            if (win.size() > window) win.pop_front();
            double h = 0.0;
            if (win.size() >= 2) {
                buf.assign(win.begin(), win.end());
                h = grassberger_bits(buf);
            }
            trace.values.push_back({e.date, e.slot_index, h});
        }
        return trace;
    }

    WindowedEntropy updater(window);
    for (const SymbolEntry& e : seq.entries) {
        const double hs = updater.push(e.symbol);
        const double h = estimator == Estimator::shannon ? hs : updater.hartley_value_bits();
        trace.values.push_back({e.date, e.slot_index, h});
    }
    return trace;
}

} // namespace crowddyn
