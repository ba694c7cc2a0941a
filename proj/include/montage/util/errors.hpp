#pragma once

#include <stdexcept>
#include <string>

namespace montage {

// Error taxonomy shared by every module. Each category maps onto one of the
// failure modes named in the operation contracts.
enum class Errc {
    invalid_input,
    invalid_config,
    parse_error,
    io_error,
    script_exhausted,
    call_failed,
    evaluation_failed,
    production_failed,
    malformed_decomposition,
    undefined_metric,
    missing_run,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void raise(Errc code, const std::string& message) {
    throw Error(code, message);
}

} // namespace montage
