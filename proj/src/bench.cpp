#include "rtaes/bench.hpp"

#include <chrono>
#include <cstdio>
#include <stdexcept>

namespace rtaes::bench {

const char* to_string(Operation op) { return op == Operation::kEncrypt ? "encrypt" : "decrypt"; }

BenchReport make_report(Operation op, std::uint64_t blocks, double elapsed_s) {
  if (blocks == 0) throw std::invalid_argument("block count must be >= 1");
  if (!(elapsed_s > 0.0)) throw std::invalid_argument("elapsed time must be positive");
  BenchReport r;
  r.operation = op;
  r.block_count = blocks;
  r.elapsed_s = elapsed_s;
  r.bytes_per_sec = static_cast<double>(kBlockBytes * blocks) / elapsed_s;
  r.bits_per_sec = 8.0 * r.bytes_per_sec;
  return r;
}

BenchReport run_bench(Operation op, std::uint64_t blocks, std::span<const Byte> key) {
  if (blocks == 0) throw std::invalid_argument("block count must be >= 1");
  const KeySchedule schedule = key_expansion(key);
  auto one = op == Operation::kEncrypt ? &cipher : &inv_cipher;

  // Each output feeds the next input so no call can be elided.
  Block block{};
  const std::uint64_t warmup = blocks < 1000 ? blocks : 1000;
  for (std::uint64_t i = 0; i < warmup; ++i) block = one(block, schedule, nullptr);

  const auto t0 = std::chrono::steady_clock::now();
  for (std::uint64_t i = 0; i < blocks; ++i) block = one(block, schedule, nullptr);
  const auto t1 = std::chrono::steady_clock::now();

  volatile Byte sink = block[0];
  (void)sink;
  return make_report(op, blocks, std::chrono::duration<double>(t1 - t0).count());
}

std::string csv_header() { return "operation,blocks,elapsed_s,bytes_per_s,bits_per_s"; }

std::string csv_row(const BenchReport& r) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%s,%llu,%.9f,%.1f,%.1f", to_string(r.operation),
                static_cast<unsigned long long>(r.block_count), r.elapsed_s, r.bytes_per_sec,
                r.bits_per_sec);
  return buf;
}

std::string text_table(const std::vector<BenchReport>& reports) {
  std::string out;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%-22s %-10s %12s %12s %18s %18s\n", "Process", "Clock MHz",
                "Blocks", "Time (ms)", "Throughput (B/s)", "Throughput (b/s)");
  out += buf;
  for (const auto& ref : kSoftCoreReference) {
    std::snprintf(buf, sizeof buf, "%-22s %-10.0f %12s %12.4f %18.1f %18.1f\n",
                  (std::string(to_string(ref.operation)) + " (reference)").c_str(), ref.clock_mhz,
                  "1", ref.time_ms, ref.bytes_per_sec, 8.0 * ref.bytes_per_sec);
    out += buf;
  }
  for (const auto& r : reports) {
    std::snprintf(buf, sizeof buf, "%-22s %-10s %12llu %12.6f %18.1f %18.1f\n",
                  to_string(r.operation), "host", static_cast<unsigned long long>(r.block_count),
                  r.ms_per_block(), r.bytes_per_sec, r.bits_per_sec);
    out += buf;
  }
  return out;
}

}  // namespace rtaes::bench
