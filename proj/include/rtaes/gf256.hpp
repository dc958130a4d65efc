#pragma once

#include <array>
#include <cstdint>

// Arithmetic in GF(2^8) with the Rijndael reduction polynomial
// m(x) = x^8 + x^4 + x^3 + x + 1, plus construction of the byte S-box.

namespace rtaes::gf256 {

using Byte = std::uint8_t;

// Low byte of m(x); the x^8 term is implicit.
inline constexpr Byte kReduction = 0x1b;

// Multiplication by x, i.e. by {02}.
constexpr Byte xtime(Byte a) {
  return static_cast<Byte>((a << 1) ^ ((a & 0x80) ? kReduction : 0x00));
}

// Russian-peasant multiply: accumulate a * x^i for every set bit i of b.
constexpr Byte mul(Byte a, Byte b) {
  Byte product = 0;
  while (b != 0) {
    if (b & 1) product ^= a;
    a = xtime(a);
    b >>= 1;
  }
  return product;
}

// a^254 = a^-1 for nonzero a (the multiplicative group has order 255).
// Zero maps to zero.
constexpr Byte inverse(Byte a) {
  Byte result = 1;
  Byte base = a;
  unsigned exponent = 254;
  while (exponent != 0) {
    if (exponent & 1) result = mul(result, base);
    base = mul(base, base);
    exponent >>= 1;
  }
  return a == 0 ? Byte{0} : result;
}

// The affine map over GF(2) applied after inversion:
// b'_i = b_i ^ b_{i+4} ^ b_{i+5} ^ b_{i+6} ^ b_{i+7} ^ c_i with c = {63}.
constexpr Byte affine(Byte b) {
  auto rotl = [](Byte v, int n) {
    return static_cast<Byte>((v << n) | (v >> (8 - n)));
  };
  return static_cast<Byte>(b ^ rotl(b, 1) ^ rotl(b, 2) ^ rotl(b, 3) ^
                           rotl(b, 4) ^ 0x63);
}

struct SBoxTables {
  std::array<Byte, 256> forward{};
  std::array<Byte, 256> inverse{};
};

constexpr SBoxTables build_sbox() {
  SBoxTables tables;
  for (unsigned x = 0; x < 256; ++x) {
    const Byte s = affine(gf256::inverse(static_cast<Byte>(x)));
    tables.forward[x] = s;
    tables.inverse[s] = static_cast<Byte>(x);
  }
  return tables;
}

// Built once at compile time; shared read-only by every cipher call.
inline constexpr SBoxTables kSBox = build_sbox();

}  // namespace rtaes::gf256
