#pragma once

#include <stdexcept>
#include <string>

namespace crowddyn {

// Error categories used across the library. The CLI maps these onto exit
// codes; library code throws Error with the category that applies.
enum class errc {
    empty_input,
    degenerate_weights,
    io_error,
    format_error,
    degenerate_slot,
    empty_slot,
    undefined_metric,
    too_short,
    label_mismatch,
    bad_config,
};

const char* errc_name(errc c);

class Error : public std::runtime_error {
public:
    Error(errc code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) {
    throw Error(code, what);
}

} // namespace crowddyn
