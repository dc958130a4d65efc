#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace rtaes {

using Byte = std::uint8_t;
using Word = std::uint32_t;

inline constexpr std::size_t kBlockBytes = 16;
using Block = std::array<Byte, kBlockBytes>;

// Raised when a key, block or schedule has the wrong size.
class SizeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Nb/Nk/Nr for one of the three supported key lengths.
struct CipherParams {
  int nb = 4;
  int nk = 4;
  int nr = 10;

  static CipherParams aes128() { return {4, 4, 10}; }
  static CipherParams aes192() { return {4, 6, 12}; }
  static CipherParams aes256() { return {4, 8, 14}; }

  // Throws SizeError unless key_bytes is 16, 24 or 32.
  static CipherParams for_key_bytes(std::size_t key_bytes);

  std::size_t key_bytes() const { return static_cast<std::size_t>(nk) * 4; }
  std::size_t schedule_words() const {
    return static_cast<std::size_t>(nb) * static_cast<std::size_t>(nr + 1);
  }

  friend bool operator==(const CipherParams&, const CipherParams&) = default;
};

// The 4x4 state. Byte i of the input block lands at row i % 4, column i / 4.
class State {
 public:
  State() = default;
  explicit State(const Block& block) : bytes_(block) {}

  Byte& at(int row, int col) { return bytes_[static_cast<std::size_t>(col * 4 + row)]; }
  Byte at(int row, int col) const { return bytes_[static_cast<std::size_t>(col * 4 + row)]; }

  const Block& bytes() const { return bytes_; }
  Block& bytes() { return bytes_; }

  friend bool operator==(const State&, const State&) = default;

 private:
  Block bytes_{};
};

// Expanded key: Nb * (Nr + 1) big-endian words, immutable once built.
class KeySchedule {
 public:
  KeySchedule(std::vector<Word> words, CipherParams params);

  const CipherParams& params() const { return params_; }
  std::span<const Word> words() const { return words_; }
  std::span<const Word, 4> round_key(int round) const;

 private:
  std::vector<Word> words_;
  CipherParams params_;
};

// Counts of round bodies executed by one cipher call.
struct RoundStats {
  int full_rounds = 0;
  int final_rounds = 0;

  int total() const { return full_rounds + final_rounds; }
};

// Round transformations, each returning a fresh state.
State sub_bytes(const State& s);
State inv_sub_bytes(const State& s);
State shift_rows(const State& s);
State inv_shift_rows(const State& s);
State mix_columns(const State& s);
State inv_mix_columns(const State& s);
State add_round_key(const State& s, std::span<const Word, 4> round_key);

// Round constant for schedule step i (1-based): x^(i-1) in GF(2^8), high byte.
Word round_constant(int i);

KeySchedule key_expansion(std::span<const Byte> key, const CipherParams& params);
// Infers the parameters from the key length.
KeySchedule key_expansion(std::span<const Byte> key);

Block cipher(const Block& in, const KeySchedule& schedule, RoundStats* stats = nullptr);
// Runs the forward steps inverted and in reverse order; uses the same schedule.
Block inv_cipher(const Block& in, const KeySchedule& schedule, RoundStats* stats = nullptr);

}  // namespace rtaes
