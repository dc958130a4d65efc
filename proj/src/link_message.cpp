#include "rtaes/link_message.hpp"

#include <algorithm>
#include <string>

namespace rtaes::link {

Bytes LinkMessage::serialize() const {
  Bytes out;
  out.reserve(kLengthBytes + blocks.size() * kBlockBytes);
  out.push_back(static_cast<Byte>(length >> 8));
  out.push_back(static_cast<Byte>(length));
  for (const auto& b : blocks) out.insert(out.end(), b.begin(), b.end());
  return out;
}

LinkMessage seal(std::span<const Byte> plaintext, const KeySchedule& schedule) {
  if (plaintext.empty()) throw MessageError("plaintext must not be empty");
  if (plaintext.size() > kMaxMessageBytes) {
    throw MessageError("plaintext of " + std::to_string(plaintext.size()) +
                       " bytes exceeds the 65535-byte frame limit");
  }
  LinkMessage m;
  m.length = static_cast<std::uint16_t>(plaintext.size());
  const std::size_t n = LinkMessage::blocks_for(plaintext.size());
  m.blocks.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    Block block{};
    const auto chunk = plaintext.subspan(i * kBlockBytes,
                                         std::min(kBlockBytes, plaintext.size() - i * kBlockBytes));
    std::copy(chunk.begin(), chunk.end(), block.begin());
    m.blocks.push_back(cipher(block, schedule));
  }
  return m;
}

Bytes open(const LinkMessage& message, const KeySchedule& schedule) {
  if (message.blocks.size() != LinkMessage::blocks_for(message.length)) {
    throw MessageError("block count does not match the length field");
  }
  Bytes out;
  out.reserve(message.blocks.size() * kBlockBytes);
  for (const auto& b : message.blocks) {
    const Block plain = inv_cipher(b, schedule);
    out.insert(out.end(), plain.begin(), plain.end());
  }
  out.resize(message.length);
  return out;
}

std::optional<LinkMessage> MessageAssembler::feed(Byte b) {
  if (blocks_needed_ == 0) {
    header_.push_back(b);
    if (header_.size() < kLengthBytes) return std::nullopt;
    const auto length = static_cast<std::uint16_t>((header_[0] << 8) | header_[1]);
    header_.clear();
    if (length == 0) throw MessageError("zero-length message on the wire");
    current_.length = length;
    blocks_needed_ = LinkMessage::blocks_for(length);
    fill_ = 0;
    return std::nullopt;
  }
  if (fill_ == 0) current_.blocks.emplace_back();
  current_.blocks.back()[fill_++] = b;
  if (fill_ == kBlockBytes) {
    fill_ = 0;
    if (current_.blocks.size() == blocks_needed_) {
      LinkMessage done = std::move(current_);
      reset();
      return done;
    }
  }
  return std::nullopt;
}

void MessageAssembler::reset() {
  header_.clear();
  current_ = {};
  blocks_needed_ = 0;
  fill_ = 0;
}

}  // namespace rtaes::link
