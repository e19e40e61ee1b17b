#include "crowddyn/errors.hpp"

namespace crowddyn {

const char* errc_name(errc c) {
    switch (c) {
    case errc::empty_input: return "empty_input";
    case errc::degenerate_weights: return "degenerate_weights";
    case errc::io_error: return "io_error";
    case errc::format_error: return "format_error";
    case errc::degenerate_slot: return "degenerate_slot";
    case errc::empty_slot: return "empty_slot";
    case errc::undefined_metric: return "undefined_metric";
    case errc::too_short: return "too_short";
    case errc::label_mismatch: return "label_mismatch";
    case errc::bad_config: return "bad_config";
    }
    return "unknown";
}

} // namespace crowddyn
