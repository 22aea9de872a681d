#pragma once

#include <stdexcept>
#include <string>

namespace declab {

// Error categories map onto CLI exit codes: usage=1, data=2, external_tool=3.
enum class ErrorKind {
    usage,
    data,
    external_tool,
    internal,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string message)
        : std::runtime_error(std::move(message)), kind_(kind) {}

    ErrorKind kind() const { return kind_; }

private:
    ErrorKind kind_;
};

inline Error data_error(std::string message) {
    return Error(ErrorKind::data, std::move(message));
}

inline Error tool_error(std::string message) {
    return Error(ErrorKind::external_tool, std::move(message));
}

inline Error usage_error(std::string message) {
    return Error(ErrorKind::usage, std::move(message));
}

} // namespace declab
