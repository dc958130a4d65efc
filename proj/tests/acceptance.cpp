// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure.

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "oracle.hpp"
#include "rtaes/aes.hpp"
#include "rtaes/bench.hpp"
#include "rtaes/gf256.hpp"
#include "rtaes/hex.hpp"
#include "rtaes/kernel.hpp"
#include "rtaes/socket_port.hpp"
#include "rtaes/uart.hpp"

extern char** environ;

namespace {

using rtaes::Block;
using rtaes::Byte;
using Bytes = std::vector<Byte>;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = true;
  std::ostringstream note;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) note << "failed: " << what << "; ";
    pass = pass && ok;
  }
};

Bytes random_bytes(std::mt19937_64& rng, std::size_t n) {
  Bytes b(n);
  for (auto& x : b) x = static_cast<Byte>(rng());
  return b;
}

Block block_of(std::string_view hex) {
  const auto v = rtaes::from_hex(std::string(hex));
  Block b{};
  std::copy(v.begin(), v.end(), b.begin());
  return b;
}

// ---------------------------------------------------------------------------

void ac1(Outcome& o) {
  namespace gf = rtaes::gf256;
  const auto t0 = std::chrono::steady_clock::now();
  int bad_mul = 0;
  for (int a = 0; a < 256; ++a) {
    for (int b = 0; b < 256; ++b) {
      if (gf::mul(static_cast<Byte>(a), static_cast<Byte>(b)) !=
          oracle::field_mul(static_cast<Byte>(a), static_cast<Byte>(b))) {
        ++bad_mul;
      }
    }
  }
  int bad_inv = 0;
  for (int a = 1; a < 256; ++a) {
    if (gf::mul(static_cast<Byte>(a), gf::inverse(static_cast<Byte>(a))) != 1) ++bad_inv;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(bad_mul == 0, "mul disagrees on " + std::to_string(bad_mul) + " pairs");
  o.require(bad_inv == 0, std::to_string(bad_inv) + " bad inverses");
  o.require(secs < 1.0, "took " + std::to_string(secs) + " s");
  o.note << "65536 products, 255 inverses in " << secs * 1e3 << " ms";
}

void ac2(Outcome& o) {
  const auto t = rtaes::gf256::build_sbox();
  std::array<bool, 256> seen{};
  bool inverts = true;
  for (int x = 0; x < 256; ++x) {
    seen[t.forward[x]] = true;
    inverts = inverts && t.inverse[t.forward[x]] == x;
  }
  o.require(std::all_of(seen.begin(), seen.end(), [](bool s) { return s; }), "forward not a bijection");
  o.require(inverts, "inverse table");
  o.require(t.forward[0x00] == 0x63 && oracle::sbox(0x00) == 0x63, "forward[00]");
  o.require(t.forward[0x53] == 0xed && oracle::sbox(0x53) == 0xed, "forward[53]");
  o.note << "bijective, forward[00]=63, forward[53]=ed";
}

void ac3(Outcome& o) {
  const std::size_t sizes[3][2] = {{16, 44}, {24, 52}, {32, 60}};
  for (const auto& [key, words] : sizes) {
    const auto ks = rtaes::key_expansion(Bytes(key, 0x5a));
    o.require(ks.words().size() == words, std::to_string(key * 8) + "-bit schedule size");
    o.note << key * 8 << "->" << ks.words().size() << " ";
  }
}

void ac4(Outcome& o) {
  std::mt19937_64 rng(0xac4);
  int failures = 0;
  int oracle_mismatch = 0;
  for (std::size_t n : {16u, 24u, 32u}) {
    for (int t = 0; t < 10'000; ++t) {
      const auto key = random_bytes(rng, n);
      Block p;
      for (auto& x : p) x = static_cast<Byte>(rng());
      const auto ks = rtaes::key_expansion(key);
      const Block c = rtaes::cipher(p, ks);
      if (rtaes::inv_cipher(c, ks) != p) ++failures;
      if (t % 10 == 0 && c != oracle::aes_block(key, p, true)) ++oracle_mismatch;
    }
  }
  o.require(failures == 0, std::to_string(failures) + " round-trip failures");
  o.require(oracle_mismatch == 0, std::to_string(oracle_mismatch) + " oracle mismatches");

  const auto key = rtaes::from_hex("2b7e151628aed2a6abf7158809cf4f3c");
  const auto ks = rtaes::key_expansion(key);
  const Block fips_p = block_of("3243f6a8885a308d313198a2e0370734");
  const Block fips_c = rtaes::cipher(fips_p, ks);
  o.require(fips_c == oracle::aes_block(key, fips_p, true), "standard vector vs reference");
  o.require(rtaes::inv_cipher(fips_c, ks) == fips_p, "standard vector round trip");

  // The demo vector is reported, not enforced.
  const Block demo_p = block_of("3646e6a8885a308c283198a2e0370734");
  const Block demo_printed = block_of("2737c1828329a4f143939c5ea6b07ce1");
  const Block demo_true = oracle::aes_block(key, demo_p, true);
  o.require(rtaes::inv_cipher(rtaes::cipher(demo_p, ks), ks) == demo_p, "demo vector round trip");
  o.note << "30000 round trips ok; standard vector " << rtaes::to_hex(fips_c) << " matches reference; "
         << "demo vector printed value " << (demo_true == demo_printed ? "agrees" : "DISAGREES")
         << " with reference (" << rtaes::to_hex(demo_true) << ")";
}

void ac5(Outcome& o) {
  for (std::size_t n : {16u, 24u, 32u}) {
    const auto ks = rtaes::key_expansion(Bytes(n, 1));
    rtaes::RoundStats enc, dec;
    rtaes::inv_cipher(rtaes::cipher(Block{}, ks, &enc), ks, &dec);
    const int expect = n == 16 ? 10 : n == 24 ? 12 : 14;
    o.require(enc.total() == expect && dec.total() == expect, "Nk=" + std::to_string(n / 4));
    o.note << "Nk=" << n / 4 << ":" << enc.total() << " ";
  }
}

void ac6(Outcome& o) {
  using namespace rtaes::kernel;
  auto golden = [](int slice) {
    Kernel k({Policy::kRoundRobin, slice});
    k.spawn(Task::idle_steps(1, 3));
    k.spawn(Task::idle_steps(2, 5));
    k.spawn(Task::from_steps(3, {[](TaskContext& ctx) { ctx.kernel().spawn(Task::idle_steps(4, 2)); },
                                 [](TaskContext&) {}}));
    return k.run_until_idle().to_text();
  };
  for (int slice : {1, 2}) {
    const std::string first = golden(slice);
    int differing = 0;
    for (int run = 1; run < 100; ++run) differing += golden(slice) != first;
    o.require(differing == 0, "slice " + std::to_string(slice) + " trace varies");
  }

  std::mt19937 rng(0xac6);
  int unfair = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int slice = 1 + static_cast<int>(rng() % 4);
    const int tasks = 2 + static_cast<int>(rng() % 5);
    Kernel k({Policy::kRoundRobin, slice});
    for (int i = 0; i < tasks; ++i) k.spawn(Task::idle_steps(i + 1, 3 * slice + static_cast<int>(rng() % 20)));
    const auto& e = k.run_until_idle().entries;
    // Until the first task finishes, every window of tasks*slice ticks
    // gives each task exactly `slice` steps.
    std::map<TaskId, int> total, seen;
    for (const auto& x : e) ++total[x.task];
    std::size_t first_finish = e.size();
    for (std::size_t i = 0; i < e.size(); ++i) {
      if (++seen[e[i].task] == total[e[i].task]) first_finish = std::min(first_finish, i);
    }
    const auto window = static_cast<std::size_t>(tasks * slice);
    for (std::size_t s = 0; s + window <= first_finish + 1; ++s) {
      std::map<TaskId, int> count;
      for (std::size_t t = s; t < s + window; ++t) ++count[e[t].task];
      bool ok = count.size() == static_cast<std::size_t>(tasks);
      for (const auto& [id, c] : count) ok = ok && c == slice;
      if (!ok) {
        ++unfair;
        break;
      }
    }
  }
  o.require(unfair == 0, std::to_string(unfair) + " unfair trials");
  o.note << "slice 1/2 traces identical over 100 runs; fairness held in 1000 trials";
}

void ac7(Outcome& o) {
  using namespace rtaes::uart;
  using Side = UartLink::Side;
  std::mt19937_64 rng(0xac7);

  {
    auto link = connect({115200, 16}, {115200, 16});
    Bytes sent, got;
    sent.reserve(100'000);
    while (sent.size() < 100'000) {
      const auto b = static_cast<Byte>(rng());
      while (link->a().send(b) != SendResult::kOk) {
        link->advance(link->frame_time(Side::kA));
        while (auto r = link->b().recv()) got.push_back(*r);
      }
      sent.push_back(b);
    }
    link->drain();
    while (auto r = link->b().recv()) got.push_back(*r);
    const auto c = link->counters(Side::kA);
    o.require(got == sent, "matched-baud stream differs");
    o.require(c.framing == 0 && c.overrun == 0, "errors on a matched link");
    o.note << "1e5 bytes lossless; ";
  }

  for (auto [tx, rx] : {std::pair<std::uint32_t, std::uint32_t>{115200, 57600}, {57600, 115200}}) {
    auto link = connect({tx, 16}, {rx, 16});
    for (int i = 0; i < 10; ++i) link->a().send(static_cast<Byte>(rng()));
    link->drain();
    const auto c = link->counters(Side::kA);
    o.require(c.framing > 0, "no framing error at " + std::to_string(tx) + "->" + std::to_string(rx));
    o.note << tx << "->" << rx << ": " << c.framing << "/10 framing; ";
  }

  const std::uint32_t bauds[] = {9600, 19200, 38400, 57600, 115200};
  int violations = 0;
  std::uint64_t dropped = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const auto tx = bauds[rng() % 5];
    const auto rx = rng() % 2 ? tx : bauds[rng() % 5];
    auto link = connect({tx, 1 + rng() % 32}, {rx, 1 + rng() % 32});
    std::uint64_t ok = 0, popped = 0;
    for (int burst = 0; burst < 20; ++burst) {
      for (auto n = rng() % 40; n > 0; --n) ok += link->a().send(static_cast<Byte>(rng())) == SendResult::kOk;
      link->advance(static_cast<SimTime>(rng() % static_cast<std::uint64_t>(link->frame_time(Side::kA) * 20)));
      if (rng() % 3 == 0) {
        while (link->b().recv()) ++popped;
      }
    }
    link->drain();
    while (link->b().recv()) ++popped;
    const auto c = link->counters(Side::kA);
    dropped += c.overrun + c.framing;
    violations += !(c.accepted == ok && c.accepted == c.received + c.overrun + c.framing && popped == c.received);
  }
  o.require(violations == 0, std::to_string(violations) + " conservation violations");
  o.note << "conservation held in 500 burst trials (" << dropped << " dropped or corrupted)";
}

// Runs both node processes over a real socket.
void ac8(Outcome& o) {
  const auto dir = fs::temp_directory_path() / ("rtaes-accept-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  const auto in_path = dir / "in.rec", out_path = dir / "out.rec", cap_path = dir / "wire.bin";

  std::mt19937_64 rng(0xac8);
  std::vector<Bytes> messages;
  Bytes records;
  for (int i = 0; i < 1000; ++i) {
    messages.push_back(random_bytes(rng, 1 + rng() % 1024));
    records.push_back(static_cast<Byte>(messages.back().size() >> 8));
    records.push_back(static_cast<Byte>(messages.back().size()));
    records.insert(records.end(), messages.back().begin(), messages.back().end());
  }
  std::ofstream(in_path, std::ios::binary)
      .write(reinterpret_cast<const char*>(records.data()), static_cast<std::streamsize>(records.size()));

  std::uint16_t port = 0;
  {
    rtaes::uart::Listener probe(rtaes::uart::Endpoint::parse("127.0.0.1:0"));
    port = probe.port();
  }
  const std::string address = "127.0.0.1:" + std::to_string(port);
  const std::string key = "000102030405060708090a0b0c0d0e0f";

  auto spawn = [](std::vector<std::string> args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);
    pid_t pid = -1;
    if (::posix_spawn(&pid, argv[0], nullptr, nullptr, argv.data(), environ) != 0) return pid_t{-1};
    return pid;
  };
  auto wait_for = [](pid_t pid) {
    int status = 0;
    ::waitpid(pid, &status, 0);
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };

  const auto t0 = std::chrono::steady_clock::now();
  const pid_t dec = spawn({RTAES_CLI_PATH, "node", "--role", "decrypt", "--key", key, "--address", address,
                           "--records", "--out", out_path.string(), "--capture", cap_path.string()});
  const pid_t enc = spawn({RTAES_CLI_PATH, "node", "--role", "encrypt", "--key", key, "--address", address,
                           "--records", "--in", in_path.string()});
  o.require(dec > 0 && enc > 0, "spawn");
  const int enc_rc = enc > 0 ? wait_for(enc) : -1;
  const int dec_rc = dec > 0 ? wait_for(dec) : -1;
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  o.require(enc_rc == 0, "encryptor exit " + std::to_string(enc_rc));
  o.require(dec_rc == 0, "decryptor exit " + std::to_string(dec_rc));

  auto slurp = [](const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    return Bytes(std::istreambuf_iterator<char>(f), {});
  };
  const Bytes out = slurp(out_path);
  const Bytes wire = slurp(cap_path);
  o.require(out == records, "decrypted records differ from input");

  std::size_t expected_wire = 0;
  for (const auto& m : messages) expected_wire += 2 + 16 * ((m.size() + 15) / 16);
  o.require(wire.size() == expected_wire, "capture size " + std::to_string(wire.size()));

  // Index every 16-byte window on the wire, then look up every plaintext
  // window.
  std::unordered_set<std::string_view> windows;
  const std::string_view wv(reinterpret_cast<const char*>(wire.data()), wire.size());
  for (std::size_t i = 0; i + 16 <= wv.size(); ++i) windows.insert(wv.substr(i, 16));
  std::size_t leaks = 0, checked = 0;
  for (const auto& m : messages) {
    const std::string_view mv(reinterpret_cast<const char*>(m.data()), m.size());
    for (std::size_t i = 0; i + 16 <= mv.size(); ++i, ++checked) leaks += windows.count(mv.substr(i, 16));
  }
  o.require(leaks == 0, std::to_string(leaks) + " plaintext windows on the wire");
  o.note << "1000 messages (" << records.size() << " record bytes) identical; " << checked
         << " plaintext windows absent from " << wire.size() << " wire bytes; " << secs << " s";
  fs::remove_all(dir);
}

void ac9(Outcome& o) {
  using namespace rtaes::bench;
  const auto synthetic = make_report(Operation::kEncrypt, 1000, 1.0);
  o.require(synthetic.bytes_per_sec == 16000.0 && synthetic.bits_per_sec == 128000.0, "formula");

  const Bytes key(16, 0x2b);
  const auto enc = run_bench(Operation::kEncrypt, 200'000, key);
  const auto dec = run_bench(Operation::kDecrypt, 200'000, key);
  const double floor = 100 * kSoftCoreReference[0].bytes_per_sec;
  o.require(enc.bytes_per_sec >= floor, "encrypt below 100x reference");
  o.require(dec.bytes_per_sec >= floor, "decrypt below 100x reference");
  const double ratio = std::max(enc.bytes_per_sec, dec.bytes_per_sec) /
                       std::min(enc.bytes_per_sec, dec.bytes_per_sec);
  o.require(ratio <= 3.0, "encrypt/decrypt ratio " + std::to_string(ratio));
  o.note << "formula exact; encrypt " << enc.bytes_per_sec / 1e6 << " MB/s, decrypt " << dec.bytes_per_sec / 1e6
         << " MB/s (" << enc.bytes_per_sec / kSoftCoreReference[0].bytes_per_sec << "x reference), ratio " << ratio;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<void(Outcome&)>>> criteria = {
      {"AC1 gf256 exhaustive", ac1},     {"AC2 s-box", ac2},
      {"AC3 key schedule sizes", ac3},   {"AC4 known answers", ac4},
      {"AC5 round counts", ac5},         {"AC6 kernel determinism", ac6},
      {"AC7 uart", ac7},                 {"AC8 two-process link", ac8},
      {"AC9 bench", ac9},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      check(o);
    } catch (const std::exception& e) {
      o.require(false, std::string("exception: ") + e.what());
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << " - " << o.note.str() << std::endl;
    failed += !o.pass;
  }
  std::cout << (failed == 0 ? "all criteria passed" : std::to_string(failed) + " criteria failed") << '\n';
  return failed == 0 ? 0 : 1;
}
