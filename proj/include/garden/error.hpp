#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace garden {

/// Error type thrown by every module on contract violations and bad input.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void format_into(std::ostringstream&) {}

template <typename T, typename... Rest>
void format_into(std::ostringstream& os, const T& head, const Rest&... rest) {
    os << head;
    format_into(os, rest...);
}

} // namespace detail

template <typename... Parts>
[[noreturn]] void fail(const Parts&... parts) {
    std::ostringstream os;
    detail::format_into(os, parts...);
    throw Error(os.str());
}

template <typename... Parts>
void require(bool condition, const Parts&... parts) {
    if (!condition) {
        fail(parts...);
    }
}

} // namespace garden
