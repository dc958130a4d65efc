#include "rtaes/aes.hpp"

#include <string>

#include "rtaes/gf256.hpp"

namespace rtaes {

namespace {

using gf256::kSBox;
using gf256::mul;

Word sub_word(Word w) {
  return (Word{kSBox.forward[(w >> 24) & 0xff]} << 24) |
         (Word{kSBox.forward[(w >> 16) & 0xff]} << 16) |
         (Word{kSBox.forward[(w >> 8) & 0xff]} << 8) |
         Word{kSBox.forward[w & 0xff]};
}

Word rot_word(Word w) { return (w << 8) | (w >> 24); }

// Multiplies every column by the polynomial with coefficients c (c[0] is the
// constant term) modulo x^4 + 1.
State mix_with(const State& s, const std::array<Byte, 4>& c) {
  State out;
  for (int col = 0; col < 4; ++col) {
    for (int row = 0; row < 4; ++row) {
      Byte acc = 0;
      for (int k = 0; k < 4; ++k) {
        acc ^= mul(c[static_cast<std::size_t>((row - k + 4) % 4)], s.at(k, col));
      }
      out.at(row, col) = acc;
    }
  }
  return out;
}

}  // namespace

CipherParams CipherParams::for_key_bytes(std::size_t key_bytes) {
  switch (key_bytes) {
    case 16: return aes128();
    case 24: return aes192();
    case 32: return aes256();
    default:
      throw SizeError("key must be 16, 24 or 32 bytes, got " + std::to_string(key_bytes));
  }
}

KeySchedule::KeySchedule(std::vector<Word> words, CipherParams params)
    : words_(std::move(words)), params_(params) {
  if (words_.size() != params_.schedule_words()) {
    throw SizeError("key schedule needs " + std::to_string(params_.schedule_words()) +
                    " words, got " + std::to_string(words_.size()));
  }
}

std::span<const Word, 4> KeySchedule::round_key(int round) const {
  return std::span<const Word, 4>(words_.data() + static_cast<std::size_t>(round) * 4, 4);
}

State sub_bytes(const State& s) {
  State out;
  for (std::size_t i = 0; i < kBlockBytes; ++i) out.bytes()[i] = kSBox.forward[s.bytes()[i]];
  return out;
}

State inv_sub_bytes(const State& s) {
  State out;
  for (std::size_t i = 0; i < kBlockBytes; ++i) out.bytes()[i] = kSBox.inverse[s.bytes()[i]];
  return out;
}

State shift_rows(const State& s) {
  State out;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) out.at(row, col) = s.at(row, (col + row) % 4);
  }
  return out;
}

State inv_shift_rows(const State& s) {
  State out;
  for (int row = 0; row < 4; ++row) {
    for (int col = 0; col < 4; ++col) out.at(row, (col + row) % 4) = s.at(row, col);
  }
  return out;
}

// a(x) = {03}x^3 + {01}x^2 + {01}x + {02}
State mix_columns(const State& s) { return mix_with(s, {0x02, 0x01, 0x01, 0x03}); }

// a^-1(x) = {0b}x^3 + {0d}x^2 + {09}x + {0e}
State inv_mix_columns(const State& s) { return mix_with(s, {0x0e, 0x09, 0x0d, 0x0b}); }

State add_round_key(const State& s, std::span<const Word, 4> round_key) {
  State out = s;
  for (int col = 0; col < 4; ++col) {
    const Word w = round_key[static_cast<std::size_t>(col)];
    for (int row = 0; row < 4; ++row) {
      out.at(row, col) ^= static_cast<Byte>(w >> (24 - 8 * row));
    }
  }
  return out;
}

Word round_constant(int i) {
  Byte r = 1;
  for (int k = 1; k < i; ++k) r = gf256::xtime(r);
  return Word{r} << 24;
}

KeySchedule key_expansion(std::span<const Byte> key, const CipherParams& params) {
  if (key.size() != params.key_bytes()) {
    throw SizeError("key must be " + std::to_string(params.key_bytes()) + " bytes for Nk=" +
                    std::to_string(params.nk) + ", got " + std::to_string(key.size()));
  }
  const auto nk = static_cast<std::size_t>(params.nk);
  std::vector<Word> w(params.schedule_words());
  for (std::size_t i = 0; i < nk; ++i) {
    w[i] = (Word{key[4 * i]} << 24) | (Word{key[4 * i + 1]} << 16) |
           (Word{key[4 * i + 2]} << 8) | Word{key[4 * i + 3]};
  }
  for (std::size_t i = nk; i < w.size(); ++i) {
    Word temp = w[i - 1];
    if (i % nk == 0) {
      temp = sub_word(rot_word(temp)) ^ round_constant(static_cast<int>(i / nk));
    } else if (nk > 6 && i % nk == 4) {
      temp = sub_word(temp);
    }
    w[i] = w[i - nk] ^ temp;
  }
  return KeySchedule(std::move(w), params);
}

KeySchedule key_expansion(std::span<const Byte> key) {
  return key_expansion(key, CipherParams::for_key_bytes(key.size()));
}

Block cipher(const Block& in, const KeySchedule& schedule, RoundStats* stats) {
  const int nr = schedule.params().nr;
  State s = add_round_key(State(in), schedule.round_key(0));
  for (int round = 1; round < nr; ++round) {
    s = add_round_key(mix_columns(shift_rows(sub_bytes(s))), schedule.round_key(round));
    if (stats) ++stats->full_rounds;
  }
  s = add_round_key(shift_rows(sub_bytes(s)), schedule.round_key(nr));
  if (stats) ++stats->final_rounds;
  return s.bytes();
}

Block inv_cipher(const Block& in, const KeySchedule& schedule, RoundStats* stats) {
  const int nr = schedule.params().nr;
  State s = add_round_key(State(in), schedule.round_key(nr));
  for (int round = nr - 1; round >= 1; --round) {
    s = inv_mix_columns(add_round_key(inv_sub_bytes(inv_shift_rows(s)), schedule.round_key(round)));
    if (stats) ++stats->full_rounds;
  }
  s = add_round_key(inv_sub_bytes(inv_shift_rows(s)), schedule.round_key(0));
  if (stats) ++stats->final_rounds;
  return s.bytes();
}

}  // namespace rtaes
