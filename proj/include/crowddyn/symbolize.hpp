#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "crowddyn/clustering.hpp"
#include "crowddyn/geo.hpp"
#include "crowddyn/timeutil.hpp"

namespace crowddyn {

// Symbol for a slot whose representative could not be computed (empty or
// degenerate slot). It is a real member of the alphabet: the absence of
// activity must perturb the entropy like any other observation.
inline constexpr std::int32_t kMissingSymbol = -1;

struct GridSpec {
    Region region;
    int side_cells = 7; // L; alphabet is L^2 cells plus the missing symbol

    double cell_size_m() const { return region.side_m / side_cells; }
    std::int32_t cell_count() const {
        return static_cast<std::int32_t>(side_cells) * side_cells;
    }
    // Alphabet cardinality including the missing symbol.
    std::int32_t alphabet_size() const { return cell_count() + 1; }
};

struct CellId {
    std::int32_t symbol = kMissingSymbol; // row * L + col, row 0 = north edge
    bool clamped = false;                 // point fell outside the square

    bool missing() const { return symbol == kMissingSymbol; }
};

/// Grid cell for a point: local east/north about the region center, then
/// floor division into L x L squares (row 0 is the northernmost row, col 0
/// the westernmost). Points outside the square are clamped to the nearest
/// edge cell and flagged.
CellId to_cell(const GeoPoint& p, const GridSpec& grid);

struct SymbolEntry {
    Date date;
    std::int32_t slot_index = 0;
    std::int32_t rep_index = 0;
    std::int32_t symbol = kMissingSymbol;
};

// Per-weekday stream of grid-cell symbols for one representative index,
// strictly ordered by (date, slot_index); every date of that weekday in the
// covered range contributes exactly slots_per_day entries.
struct SymbolSequence {
    int weekday = 0;
    int rep_index = 0;
    int slots_per_day = 96;
    std::int32_t alphabet_size = 50; // grid cells + missing
    std::vector<SymbolEntry> entries;

    std::vector<std::int32_t> symbols() const;
};

struct SymbolizeOptions {
    // Joint mode folds the k representative cells of a slot into a single
    // symbol over an alphabet of (L^2+1)^k, producing one stream per weekday
    // (rep_index 0). Off by default: the per-representative streams keep the
    // alphabet small enough for the estimators.
    bool joint_tuple = false;
};

struct SymbolizeResult {
    std::vector<SymbolSequence> sequences; // ordered by (weekday, rep_index)
    std::int64_t clamped_points = 0;
    std::int64_t missing_slots = 0;
};

/// Builds the per-weekday symbol streams from per-slot representatives over
/// the full [first_date, last_date] range. Slots without an entry in reps
/// (no data or degenerate clustering) become missing symbols, so every
/// sequence has exactly (dates with that weekday) * slots_per_day entries.
SymbolizeResult build_sequences(const std::map<std::pair<Date, std::int32_t>, RepresentativeSet>& reps,
                                const GridSpec& grid, int k, Date first_date, Date last_date,
                                int slots_per_day,
                                const SymbolizeOptions& options = {});

} // namespace crowddyn
