#include "crowddyn/symbolize.hpp"

#include <algorithm>
#include <cmath>

#include "crowddyn/errors.hpp"

namespace crowddyn {

std::vector<std::int32_t> SymbolSequence::symbols() const {
    std::vector<std::int32_t> out;
    out.reserve(entries.size());
    for (const SymbolEntry& e : entries) out.push_back(e.symbol);
    return out;
}

CellId to_cell(const GeoPoint& p, const GridSpec& grid) {
    const double half = grid.region.side_m / 2.0;
    const double cell = grid.cell_size_m();
    const EnuPoint enu = to_local_enu(p, grid.region.center);

    CellId out;
    out.clamped = enu.east_m < -half || enu.east_m > half ||
                  enu.north_m < -half || enu.north_m > half;

    // Cells are half-open [lo, hi) except the last row/column, which also
    // takes its upper boundary.
    const int last = grid.side_cells - 1;
    int col = static_cast<int>(std::floor((enu.east_m + half) / cell));
    int row = static_cast<int>(std::floor((half - enu.north_m) / cell));
    col = std::clamp(col, 0, last);
    row = std::clamp(row, 0, last);

    out.symbol = static_cast<std::int32_t>(row) * grid.side_cells + col;
    return out;
}

SymbolizeResult build_sequences(
    const std::map<std::pair<Date, std::int32_t>, RepresentativeSet>& reps, const GridSpec& grid,
    int k, Date first_date, Date last_date, int slots_per_day, const SymbolizeOptions& options) {
    if (k < 1) fail(errc::bad_config, "build_sequences: k must be >= 1");
    if (first_date > last_date) fail(errc::bad_config, "build_sequences: empty date range");
    if (slots_per_day < 1 || 1440 % slots_per_day != 0)
        fail(errc::bad_config, "build_sequences: slots_per_day must divide 1440");

    const int streams_per_weekday = options.joint_tuple ? 1 : k;
    const std::int32_t per_rep_alphabet = grid.alphabet_size();
    std::int64_t joint_alphabet = 1;
    for (int r = 0; r < k; ++r) joint_alphabet *= per_rep_alphabet;
    if (options.joint_tuple && joint_alphabet > INT32_MAX)
        fail(errc::bad_config, "build_sequences: joint alphabet (L^2+1)^k overflows symbols");

    SymbolizeResult out;
    out.sequences.resize(static_cast<std::size_t>(7) * streams_per_weekday);
    for (int wd = 0; wd < 7; ++wd) {
        for (int r = 0; r < streams_per_weekday; ++r) {
            SymbolSequence& seq = out.sequences[static_cast<std::size_t>(wd) * streams_per_weekday + r];
            seq.weekday = wd;
            seq.rep_index = r;
            seq.slots_per_day = slots_per_day;
            seq.alphabet_size = options.joint_tuple ? static_cast<std::int32_t>(joint_alphabet)
                                                    : per_rep_alphabet;
        }
    }

    std::vector<std::int32_t> cells(static_cast<std::size_t>(k), kMissingSymbol);
    for (Date d = first_date; d <= last_date; d = d + 1) {
        const int wd = weekday_monday0(d);
        for (std::int32_t slot = 0; slot < slots_per_day; ++slot) {
            auto it = reps.find({d, slot});
            const bool have = it != reps.end() &&
                              it->second.reps.size() == static_cast<std::size_t>(k);
            if (have) {
                for (int r = 0; r < k; ++r) {
                    const CellId cell = to_cell(it->second.reps[r], grid);
                    cells[r] = cell.symbol;
                    if (cell.clamped) ++out.clamped_points;
                }
            } else {
                std::fill(cells.begin(), cells.end(), kMissingSymbol);
                ++out.missing_slots;
            }

            if (options.joint_tuple) {
                // Missing anywhere makes the whole tuple missing; otherwise
                // fold the k cells into one mixed-radix symbol.
                std::int64_t sym = kMissingSymbol;
                if (have) {
                    sym = 0;
                    for (int r = 0; r < k; ++r) sym = sym * per_rep_alphabet + cells[r];
                }
                out.sequences[static_cast<std::size_t>(wd)].entries.push_back(
                    {d, slot, 0, static_cast<std::int32_t>(sym)});
            } else {
                for (int r = 0; r < k; ++r)
                    out.sequences[static_cast<std::size_t>(wd) * k + r].entries.push_back(
                        {d, slot, r, cells[r]});
            }
        }
    }
    return out;
}

} // namespace crowddyn
