#include "rtaes/gf256.hpp"

namespace rtaes::gf256 {

static_assert(mul(0x57, 0x13) == 0xfe);
static_assert(kSBox.forward[0x00] == 0x63);
static_assert(kSBox.inverse[0x63] == 0x00);

}  // namespace rtaes::gf256
