#pragma once

// Framing for ciphertext on the serial link: a big-endian u16 plaintext
// length followed by ceil(length / 16) independently encrypted (ECB) blocks
// of the zero-padded plaintext. No MAC: a corrupted block decrypts to
// garbage unless the UART flagged the damage.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rtaes/aes.hpp"

namespace rtaes::link {

using Bytes = std::vector<Byte>;

inline constexpr std::size_t kLengthBytes = 2;
inline constexpr std::size_t kMaxMessageBytes = 0xffff;

class MessageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct LinkMessage {
  std::uint16_t length = 0;
  std::vector<Block> blocks;

  static std::size_t blocks_for(std::size_t length) {
    return (length + kBlockBytes - 1) / kBlockBytes;
  }
  Bytes serialize() const;
};

// Zero-pads to whole blocks and encrypts each. Throws MessageError when the
// plaintext is empty or longer than kMaxMessageBytes.
LinkMessage seal(std::span<const Byte> plaintext, const KeySchedule& schedule);
// Decrypts every block and strips the padding using the length field.
Bytes open(const LinkMessage& message, const KeySchedule& schedule);

// Incremental parser fed one wire byte at a time.
class MessageAssembler {
 public:
  // Returns a message once its last byte arrives. A zero length field is
  // rejected with MessageError.
  std::optional<LinkMessage> feed(Byte b);
  bool mid_message() const { return !header_.empty() || blocks_needed_ != 0; }
  void reset();

 private:
  Bytes header_;
  LinkMessage current_;
  std::size_t blocks_needed_ = 0;
  std::size_t fill_ = 0;
};

}  // namespace rtaes::link
