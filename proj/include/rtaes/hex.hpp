#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rtaes {

class HexError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Lower-case, no separators.
std::string to_hex(std::span<const std::uint8_t> bytes);

// Bracketed byte list, e.g. "[27 37 c1 82]".
std::string to_bracketed_hex(std::span<const std::uint8_t> bytes);

// Accepts either case; brackets, whitespace, ':' and ',' are ignored so the
// bracketed form round-trips. Throws HexError on odd digit count or junk.
std::vector<std::uint8_t> from_hex(std::string_view text);

}  // namespace rtaes
