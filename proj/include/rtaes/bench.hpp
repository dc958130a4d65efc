#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rtaes/aes.hpp"

namespace rtaes::bench {

enum class Operation { kEncrypt, kDecrypt };

const char* to_string(Operation op);

struct BenchReport {
  Operation operation = Operation::kEncrypt;
  std::uint64_t block_count = 0;
  double elapsed_s = 0.0;
  double bytes_per_sec = 0.0;
  double bits_per_sec = 0.0;

  double ms_per_block() const { return elapsed_s * 1e3 / static_cast<double>(block_count); }
};

// throughput = 16 * blocks / elapsed bytes per second, and 8x that in bits.
// Throws std::invalid_argument if blocks == 0 or elapsed <= 0.
BenchReport make_report(Operation op, std::uint64_t blocks, double elapsed_s);

// Times `blocks` single-block cipher calls on a monotonic clock after an
// untimed warm-up pass. Only the cipher is timed: no UART, no framing.
BenchReport run_bench(Operation op, std::uint64_t blocks, std::span<const Byte> key);

// Published single-block figures for a 50 MHz soft-core processor, kept as a
// reference row. The decrypt throughput is reproduced as printed although
// 16 bytes / 4.1524 ms is about 3853 byte/s.
struct ReferenceRow {
  Operation operation;
  double clock_mhz;
  double time_ms;
  double bytes_per_sec;
};
inline constexpr std::array<ReferenceRow, 2> kSoftCoreReference = {{
    {Operation::kEncrypt, 50.0, 4.0274, 3972.2},
    {Operation::kDecrypt, 50.0, 4.1524, 30825.1},
}};

std::string csv_header();
std::string csv_row(const BenchReport& r);
// Fixed-width table with the reference rows first.
std::string text_table(const std::vector<BenchReport>& reports);

}  // namespace rtaes::bench
