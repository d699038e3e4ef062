#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace uot {

class Error : public std::runtime_error {
public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {
inline void format_into(std::ostringstream&) {}
template <typename T, typename... Rest>
void format_into(std::ostringstream& os, const T& head, const Rest&... rest) {
  os << head;
  format_into(os, rest...);
}
} // namespace detail

// Builds an Error from a sequence of streamable pieces.
template <typename... Parts>
Error make_error(const Parts&... parts) {
  std::ostringstream os;
  os.precision(17);
  detail::format_into(os, parts...);
  return Error(os.str());
}

} // namespace uot
