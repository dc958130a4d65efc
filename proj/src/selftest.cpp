#include "rtaes/selftest.hpp"

#include <functional>
#include <random>
#include <sstream>

#include "rtaes/aes.hpp"
#include "rtaes/gf256.hpp"
#include "rtaes/hex.hpp"
#include "rtaes/kernel.hpp"
#include "rtaes/node.hpp"
#include "rtaes/uart.hpp"

namespace rtaes::selftest {

namespace {

struct Failure {
  std::string what;
};

void check(bool ok, const std::string& what) {
  if (!ok) throw Failure{what};
}

Block block_from_hex(const std::string& hex) {
  const auto bytes = from_hex(hex);
  Block b{};
  std::copy(bytes.begin(), bytes.end(), b.begin());
  return b;
}

GroupResult run_group(const std::string& name, const std::function<std::string()>& body) {
  try {
    return {name, true, body()};
  } catch (const Failure& f) {
    return {name, false, f.what};
  } catch (const std::exception& e) {
    return {name, false, std::string("exception: ") + e.what()};
  }
}

std::string gf_group() {
  for (unsigned a = 0; a < 256; ++a) {
    check(gf256::mul(static_cast<Byte>(a), 2) == gf256::xtime(static_cast<Byte>(a)),
          "mul(a, 02) != xtime(a)");
    if (a != 0) {
      check(gf256::mul(static_cast<Byte>(a), gf256::inverse(static_cast<Byte>(a))) == 1,
            "a * a^-1 != 1 for a=" + std::to_string(a));
    }
  }
  check(gf256::inverse(0) == 0, "inverse(00) != 00");
  check(gf256::mul(0x57, 0x13) == 0xfe, "57 * 13 != fe");
  return "255 inverses, 256 xtime products";
}

std::string sbox_group() {
  const auto t = gf256::build_sbox();
  for (unsigned x = 0; x < 256; ++x) {
    check(t.inverse[t.forward[x]] == x, "inverse table does not invert forward");
  }
  check(t.forward[0x00] == 0x63, "S(00) != 63");
  check(t.forward[0x53] == 0xed, "S(53) != ed");
  return "bijection, S(00)=63, S(53)=ed";
}

std::string key_group() {
  std::ostringstream out;
  for (std::size_t bytes : {16u, 24u, 32u}) {
    const std::vector<Byte> key(bytes, 0);
    const auto ks = key_expansion(key);
    check(ks.words().size() == ks.params().schedule_words(), "schedule size");
    out << bytes * 8 << "->" << ks.words().size() << " ";
  }
  const auto ks = key_expansion(from_hex("2b7e151628aed2a6abf7158809cf4f3c"));
  check(ks.words()[4] == 0xa0fafe17, "w4 != a0fafe17");
  check(ks.words()[43] == 0xb6630ca6, "w43 != b6630ca6");
  out << "words";
  return out.str();
}

std::string kat_group() {
  struct Vector {
    const char* key;
    const char* plain;
    const char* cipher;
  };
  static const Vector kVectors[] = {
      {"2b7e151628aed2a6abf7158809cf4f3c", "3243f6a8885a308d313198a2e0370734",
       "3925841d02dc09fbdc118597196a0b32"},
      {"000102030405060708090a0b0c0d0e0f", "00112233445566778899aabbccddeeff",
       "69c4e0d86a7b0430d8cdb78070b4c55a"},
      {"000102030405060708090a0b0c0d0e0f1011121314151617", "00112233445566778899aabbccddeeff",
       "dda97ca4864cdfe06eaf70a0ec0d7191"},
      {"000102030405060708090a0b0c0d0e0f101112131415161718191a1b1c1d1e1f",
       "00112233445566778899aabbccddeeff", "8ea2b7ca516745bfeafc49904b496089"},
  };
  for (const auto& v : kVectors) {
    const auto ks = key_expansion(from_hex(v.key));
    const Block p = block_from_hex(v.plain);
    const Block c = block_from_hex(v.cipher);
    check(cipher(p, ks) == c, std::string("cipher mismatch for key ") + v.key);
    check(inv_cipher(c, ks) == p, std::string("inverse mismatch for key ") + v.key);
  }

  // The published demo vector is reported, not enforced.
  const auto ks = key_expansion(from_hex("2b7e151628aed2a6abf7158809cf4f3c"));
  const Block demo_plain = block_from_hex("3646e6a8885a308c283198a2e0370734");
  const Block demo_cipher = block_from_hex("2737c1828329a4f143939c5ea6b07ce1");
  const Block computed = cipher(demo_plain, ks);
  std::string note = "4 vectors; demo vector ";
  note += computed == demo_cipher ? "agrees" : "DISAGREES (computed " + to_hex(computed) + ")";
  return note;
}

std::string roundtrip_group(int trials) {
  std::mt19937_64 rng(0x5eed);
  std::uniform_int_distribution<int> byte(0, 255);
  for (std::size_t bytes : {16u, 24u, 32u}) {
    for (int t = 0; t < trials; ++t) {
      std::vector<Byte> key(bytes);
      for (auto& k : key) k = static_cast<Byte>(byte(rng));
      Block b{};
      for (auto& x : b) x = static_cast<Byte>(byte(rng));
      const auto ks = key_expansion(key);
      check(inv_cipher(cipher(b, ks), ks) == b, "round trip failed");
    }
  }
  return std::to_string(trials) + " random pairs per key size";
}

std::string rounds_group() {
  std::ostringstream out;
  for (std::size_t bytes : {16u, 24u, 32u}) {
    const auto ks = key_expansion(std::vector<Byte>(bytes, 0x11));
    RoundStats stats;
    cipher(Block{}, ks, &stats);
    const int total = stats.full_rounds + stats.final_rounds;
    check(total == ks.params().nr && stats.final_rounds == 1, "round count");
    out << "Nk=" << ks.params().nk << ":" << total << " ";
  }
  return out.str();
}

std::string kernel_group() {
  using namespace kernel;
  auto run = [](int slice) {
    Kernel k({Policy::kRoundRobin, slice});
    k.spawn(Task::idle_steps(1, 2));
    k.spawn(Task::idle_steps(2, 2));
    return k.run_until_idle().to_text();
  };
  check(run(1) == "0,1,1\n1,2,1\n2,1,2\n3,2,2\n", "slice 1 golden trace");
  check(run(2) == "0,1,1\n1,1,2\n2,2,1\n3,2,2\n", "slice 2 golden trace");
  return "golden traces for slice 1 and 2";
}

std::string uart_group() {
  auto matched = uart::connect({115200, 16}, {115200, 16});
  for (int i = 0; i < 16; ++i) check(matched->a().send(static_cast<Byte>(i)) == uart::SendResult::kOk, "send");
  matched->drain();
  for (int i = 0; i < 16; ++i) check(matched->b().recv() == static_cast<Byte>(i), "fifo order");

  auto mismatched = uart::connect({115200, 16}, {57600, 16});
  for (Byte b : {0x00, 0xff, 0x0f, 0xf0}) mismatched->a().send(b);
  mismatched->drain();
  check(mismatched->counters(uart::UartLink::Side::kA).framing > 0, "no framing error at 2:1");
  return "matched delivery, 2:1 mismatch detected";
}

std::string link_group() {
  const auto key = from_hex("2b7e151628aed2a6abf7158809cf4f3c");
  std::vector<node::Bytes> messages = {node::Bytes(1, 'x'), node::Bytes(16, 'y'),
                                       node::Bytes(17, 'z'), node::Bytes(100, 'w')};
  const auto r = node::run_loopback(key, messages);
  check(r.faults.empty(), "unexpected link fault");
  check(r.received == messages, "loopback mismatch");
  return std::to_string(messages.size()) + " messages end to end";
}

}  // namespace

std::vector<GroupResult> run_all(bool quick) {
  const int trials = quick ? 200 : 10000;
  return {
      run_group("gf256", gf_group),
      run_group("sbox", sbox_group),
      run_group("key-expansion", key_group),
      run_group("known-answer", kat_group),
      run_group("round-trip", [trials] { return roundtrip_group(trials); }),
      run_group("round-count", rounds_group),
      run_group("kernel", kernel_group),
      run_group("uart", uart_group),
      run_group("link", link_group),
  };
}

}  // namespace rtaes::selftest
