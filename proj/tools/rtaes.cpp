// rtaes: command-line front end for the AES core, the simulated serial link
// and the benchmark.
//
// Exit codes: 0 success, 1 usage, 2 crypto/size error, 3 link error.

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rtaes/aes.hpp"
#include "rtaes/bench.hpp"
#include "rtaes/hex.hpp"
#include "rtaes/node.hpp"
#include "rtaes/selftest.hpp"
#include "rtaes/socket_port.hpp"
#include "rtaes/uart.hpp"

namespace {

using rtaes::Byte;
using Bytes = std::vector<Byte>;

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitCrypto = 2;
constexpr int kExitLink = 3;

constexpr const char* kKeyFileEnv = "RTAES_KEY_FILE";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Options shared by several subcommands.
struct Common {
  std::string key_hex;
  std::string key_file;
  std::string config_file;
  std::uint32_t baud = 0;  // 0: config file or default
  std::size_t fifo_depth = rtaes::uart::kDefaultFifoDepth;
  std::string transport = "socket";
  std::string address = "127.0.0.1:5150";
  int verbosity = 0;
};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  const auto e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
}

Bytes read_stdin() {
  std::string s{std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>()};
  return {s.begin(), s.end()};
}

// key=value lines; '#' starts a comment.
std::map<std::string, std::string> read_config(const std::string& path) {
  std::map<std::string, std::string> values;
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    line = trim(line.substr(0, line.find('#')));
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError("config line without '=': " + line);
    values[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
  }
  return values;
}

// Precedence: --key, --key-file, config file `key`/`key_file`, then the file
// named by $RTAES_KEY_FILE. The environment never carries the key itself.
Bytes resolve_key(const Common& c) {
  std::string hex = c.key_hex;
  std::string file = c.key_file;
  if (hex.empty() && file.empty() && !c.config_file.empty()) {
    const auto cfg = read_config(c.config_file);
    if (auto it = cfg.find("key"); it != cfg.end()) hex = it->second;
    if (auto it = cfg.find("key_file"); it != cfg.end()) file = it->second;
  }
  if (hex.empty() && file.empty()) {
    if (const char* env = std::getenv(kKeyFileEnv)) file = env;
  }
  if (hex.empty() && !file.empty()) hex = trim(read_file(file));
  if (hex.empty()) throw UsageError("no key given (use --key, --key-file or --config)");
  if (hex.size() != 32 && hex.size() != 48 && hex.size() != 64) {
    throw UsageError("key must be 32, 48 or 64 hex digits, got " + std::to_string(hex.size()));
  }
  try {
    return rtaes::from_hex(hex);
  } catch (const rtaes::HexError& e) {
    throw UsageError(std::string("bad key: ") + e.what());
  }
}

rtaes::uart::ChannelConfig resolve_channel(const Common& c) {
  rtaes::uart::ChannelConfig cfg;
  cfg.fifo_depth = c.fifo_depth;
  if (c.baud != 0) {
    cfg.baud = c.baud;
  } else if (!c.config_file.empty()) {
    const auto values = read_config(c.config_file);
    if (auto it = values.find("baud"); it != values.end()) {
      try {
        cfg.baud = static_cast<std::uint32_t>(std::stoul(it->second));
      } catch (const std::exception&) {
        throw UsageError("bad baud in config: " + it->second);
      }
    }
  }
  try {
    cfg.validate();
  } catch (const rtaes::uart::ConfigError& e) {
    throw UsageError(e.what());
  }
  return cfg;
}

void add_key_options(CLI::App* app, Common& c) {
  app->add_option("--key", c.key_hex, "Key as 32/48/64 hex digits");
  app->add_option("--key-file", c.key_file, "File holding the hex key");
  app->add_option("--config", c.config_file, "key=value config file (key, key_file, baud)");
}

void add_link_options(CLI::App* app, Common& c) {
  app->add_option("--baud", c.baud, "Simulated baud rate (default 115200)");
  app->add_option("--fifo-depth", c.fifo_depth, "RX/TX FIFO depth")->check(CLI::PositiveNumber);
  app->add_option("--transport", c.transport, "in-process or socket")
      ->check(CLI::IsMember({"in-process", "socket"}));
  app->add_option("--address", c.address, "host:port; the decryptor listens, the encryptor connects");
  // A callback rather than a bound int: several subcommands share `c`.
  app->add_flag_function(
      "-v,--verbose", [&c](std::int64_t n) { c.verbosity += static_cast<int>(n); },
      "Repeat for more output; -vv logs the kernel trace");
}

// ---------------------------------------------------------------------------
// encrypt / decrypt / keyexpand

struct CryptOptions {
  std::string in_hex;
  std::string in_file;
  std::string out_file;
  bool stdin_hex = false;
};

Bytes crypt_input(const CryptOptions& o) {
  if (!o.in_hex.empty()) {
    try {
      return rtaes::from_hex(o.in_hex);
    } catch (const rtaes::HexError& e) {
      throw UsageError(std::string("bad --in-hex: ") + e.what());
    }
  }
  if (!o.in_file.empty()) {
    const std::string s = read_file(o.in_file);
    return {s.begin(), s.end()};
  }
  Bytes raw = read_stdin();
  if (!o.stdin_hex) return raw;
  try {
    return rtaes::from_hex(std::string(raw.begin(), raw.end()));
  } catch (const rtaes::HexError& e) {
    throw UsageError(std::string("bad hex on stdin: ") + e.what());
  }
}

int cmd_crypt(bool encrypt, const Common& c, const CryptOptions& o) {
  const auto schedule = rtaes::key_expansion(resolve_key(c));
  Bytes data = crypt_input(o);
  if (data.empty()) throw UsageError("no input");
  if (encrypt) {
    data.resize((data.size() + rtaes::kBlockBytes - 1) / rtaes::kBlockBytes * rtaes::kBlockBytes, 0);
  } else if (data.size() % rtaes::kBlockBytes != 0) {
    throw rtaes::SizeError("ciphertext must be a multiple of 16 bytes, got " +
                           std::to_string(data.size()));
  }
  Bytes out;
  for (std::size_t off = 0; off < data.size(); off += rtaes::kBlockBytes) {
    rtaes::Block b{};
    std::copy_n(data.begin() + static_cast<std::ptrdiff_t>(off), rtaes::kBlockBytes, b.begin());
    const auto r = encrypt ? rtaes::cipher(b, schedule) : rtaes::inv_cipher(b, schedule);
    out.insert(out.end(), r.begin(), r.end());
  }
  if (!o.out_file.empty()) write_file(o.out_file, out);
  std::cout << rtaes::to_bracketed_hex(out) << '\n';
  return kExitOk;
}

int cmd_keyexpand(const Common& c) {
  const auto schedule = rtaes::key_expansion(resolve_key(c));
  const auto words = schedule.words();
  for (std::size_t i = 0; i < words.size(); ++i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "w%zu=%08x", i, words[i]);
    std::cout << buf << '\n';
  }
  return kExitOk;
}

// ---------------------------------------------------------------------------
// node

struct NodeOptions {
  std::string role = "encrypt";
  std::string in_file;
  std::string out_file;
  std::string capture_file;
  bool records = false;
  bool realtime = false;
  int timeout_ms = 10000;
};

// Records are a big-endian u16 length followed by that many bytes.
std::vector<Bytes> split_records(const Bytes& data) {
  std::vector<Bytes> out;
  std::size_t off = 0;
  while (off < data.size()) {
    if (off + 2 > data.size()) throw UsageError("truncated record header");
    const std::size_t n = (std::size_t{data[off]} << 8) | data[off + 1];
    off += 2;
    if (off + n > data.size()) throw UsageError("truncated record body");
    out.emplace_back(data.begin() + static_cast<std::ptrdiff_t>(off),
                     data.begin() + static_cast<std::ptrdiff_t>(off + n));
    off += n;
  }
  return out;
}

void append_record(Bytes& out, const Bytes& message) {
  out.push_back(static_cast<Byte>(message.size() >> 8));
  out.push_back(static_cast<Byte>(message.size()));
  out.insert(out.end(), message.begin(), message.end());
}

const char* kSample = "Real-time AES over a simulated serial link.";

int report_faults(const std::vector<rtaes::node::FaultReport>& faults) {
  for (const auto& f : faults) {
    std::cerr << "link fault (" << rtaes::node::to_string(f.fault) << "): " << f.detail << '\n';
  }
  return faults.empty() ? kExitOk : kExitLink;
}

std::vector<Bytes> node_inputs(const NodeOptions& o, bool allow_sample) {
  Bytes data;
  if (!o.in_file.empty()) {
    const std::string s = read_file(o.in_file);
    data.assign(s.begin(), s.end());
  } else if (allow_sample) {
    const std::string s = kSample;
    data.assign(s.begin(), s.end());
  } else {
    data = read_stdin();
  }
  if (o.records) return split_records(data);
  if (data.empty()) throw UsageError("no input to send");
  // Larger inputs go out as consecutive frames.
  std::vector<Bytes> out;
  for (std::size_t off = 0; off < data.size(); off += rtaes::link::kMaxMessageBytes) {
    const std::size_t n = std::min(rtaes::link::kMaxMessageBytes, data.size() - off);
    out.emplace_back(data.begin() + static_cast<std::ptrdiff_t>(off),
                     data.begin() + static_cast<std::ptrdiff_t>(off + n));
  }
  return out;
}

void emit_output(const NodeOptions& o, const std::vector<Bytes>& messages) {
  Bytes out;
  for (const auto& m : messages) {
    if (o.records) {
      append_record(out, m);
    } else {
      out.insert(out.end(), m.begin(), m.end());
    }
  }
  if (!o.out_file.empty()) write_file(o.out_file, out);
}

int cmd_node(const Common& c, const NodeOptions& o) {
  const Bytes key = resolve_key(c);
  const auto channel = resolve_channel(c);
  rtaes::node::SocketNodeOptions socket_opts;
  socket_opts.realtime = o.realtime;
  if (c.verbosity >= 2) socket_opts.trace_log = &std::cerr;

  if (c.transport == "in-process") {
    const auto messages = node_inputs(o, o.in_file.empty());
    rtaes::node::LoopbackOptions lo;
    lo.encryptor_channel = channel;
    lo.decryptor_channel = channel;
    lo.kernel.max_ticks = 0;
    const auto r = rtaes::node::run_loopback(key, messages, lo);
    if (o.out_file.empty()) {
      for (const auto& m : r.received) std::cout << rtaes::to_bracketed_hex(m) << '\n';
    }
    if (c.verbosity >= 1) std::cerr << "wire: " << rtaes::to_bracketed_hex(r.wire) << '\n';
    if (c.verbosity >= 2) std::cerr << r.encryptor_trace.to_text() << r.decryptor_trace.to_text();
    emit_output(o, r.received);
    const int rc = report_faults(r.faults);
    if (rc == kExitOk && r.received != messages) {
      std::cerr << "loopback mismatch\n";
      return kExitLink;
    }
    return rc;
  }

  const auto endpoint = rtaes::uart::Endpoint::parse(c.address);
  const auto schedule = rtaes::key_expansion(key);
  const auto timeout = std::chrono::milliseconds(o.timeout_ms);

  if (o.role == "encrypt") {
    const auto messages = node_inputs(o, false);
    rtaes::uart::SocketPort port(rtaes::uart::connect_to(endpoint, timeout), channel);
    std::size_t next = 0;
    const std::size_t blocks = rtaes::node::run_socket_encryptor(
        port, schedule,
        [&]() -> std::optional<Bytes> {
          if (next == messages.size()) return std::nullopt;
          return messages[next++];
        },
        socket_opts);
    if (c.verbosity >= 1) std::cerr << "sent " << messages.size() << " messages, " << blocks << " blocks\n";
    return kExitOk;
  }

  rtaes::uart::Listener listener(endpoint);
  rtaes::uart::SocketPort port(listener.accept(timeout), channel);
  port.set_capture(!o.capture_file.empty());
  std::vector<Bytes> received;
  const auto faults = rtaes::node::run_socket_decryptor(
      port, schedule,
      [&](const Bytes& plain, const rtaes::link::LinkMessage&) {
        received.push_back(plain);
        if (o.out_file.empty()) std::cout << rtaes::to_bracketed_hex(plain) << '\n';
      },
      socket_opts);
  std::cout.flush();
  emit_output(o, received);
  if (!o.capture_file.empty()) write_file(o.capture_file, port.capture());
  if (c.verbosity >= 1) std::cerr << "received " << received.size() << " messages\n";
  return report_faults(faults);
}

// ---------------------------------------------------------------------------
// chat

int cmd_chat(const Common& c, const std::string& role) {
  const Bytes key = resolve_key(c);
  const auto channel = resolve_channel(c);
  const auto schedule = rtaes::key_expansion(key);

  auto next_line = []() -> std::optional<Bytes> {
    std::string line;
    if (!std::getline(std::cin, line)) return std::nullopt;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return Bytes(line.begin(), line.end());
  };
  auto show = [](const Bytes& plain, const rtaes::link::LinkMessage& wire) {
    std::cout << std::string(plain.begin(), plain.end()) << '\n';
    Bytes cipher_bytes;
    for (const auto& b : wire.blocks) cipher_bytes.insert(cipher_bytes.end(), b.begin(), b.end());
    std::cout << rtaes::to_bracketed_hex(cipher_bytes) << '\n' << std::flush;
  };

  if (c.transport == "in-process") {
    int rc = kExitOk;
    while (auto line = next_line()) {
      if (line->empty()) continue;
      rtaes::node::LoopbackOptions lo;
      lo.encryptor_channel = channel;
      lo.decryptor_channel = channel;
      const auto r = rtaes::node::run_loopback(key, {*line}, lo);
      for (const auto& m : r.received) {
        rtaes::link::LinkMessage wire = rtaes::link::seal(m, schedule);
        show(m, wire);
      }
      if (report_faults(r.faults) != kExitOk) rc = kExitLink;
    }
    return rc;
  }

  const auto endpoint = rtaes::uart::Endpoint::parse(c.address);
  if (role == "encrypt") {
    rtaes::uart::SocketPort port(rtaes::uart::connect_to(endpoint, std::chrono::seconds(30)), channel);
    rtaes::node::run_socket_encryptor(port, schedule, next_line);
    std::cerr << "session closed\n";
    return kExitOk;
  }
  rtaes::uart::Listener listener(endpoint);
  rtaes::uart::SocketPort port(listener.accept(std::chrono::minutes(10)), channel);
  const auto faults = rtaes::node::run_socket_decryptor(port, schedule, show);
  std::cerr << "peer disconnected, session closed\n";
  return report_faults(faults);
}

// ---------------------------------------------------------------------------
// bench / selftest

int cmd_bench(const Common& c, std::uint64_t blocks, const std::string& op, const std::string& csv) {
  Bytes key;
  if (c.key_hex.empty() && c.key_file.empty() && c.config_file.empty() && !std::getenv(kKeyFileEnv)) {
    key = rtaes::from_hex("2b7e151628aed2a6abf7158809cf4f3c");
  } else {
    key = resolve_key(c);
  }
  std::vector<rtaes::bench::BenchReport> reports;
  if (op != "decrypt") reports.push_back(rtaes::bench::run_bench(rtaes::bench::Operation::kEncrypt, blocks, key));
  if (op != "encrypt") reports.push_back(rtaes::bench::run_bench(rtaes::bench::Operation::kDecrypt, blocks, key));
  std::cout << rtaes::bench::text_table(reports);
  std::string rows = rtaes::bench::csv_header() + "\n";
  for (const auto& r : reports) rows += rtaes::bench::csv_row(r) + "\n";
  if (csv.empty()) {
    std::cout << '\n' << rows;
  } else {
    std::ofstream out(csv);
    if (!out) throw UsageError("cannot write " + csv);
    out << rows;
  }
  return kExitOk;
}

int cmd_selftest(bool quick) {
  bool all = true;
  for (const auto& g : rtaes::selftest::run_all(quick)) {
    std::cout << (g.passed ? "PASS " : "FAIL ") << g.name << ": " << g.detail << '\n';
    all = all && g.passed;
  }
  return all ? kExitOk : kExitCrypto;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AES-128/192/256 over a simulated UART link"};
  app.require_subcommand(1);

  Common common;
  CryptOptions crypt;
  NodeOptions node;
  std::string chat_role = "encrypt";
  std::uint64_t bench_blocks = 1'000'000;
  std::string bench_op = "both";
  std::string bench_csv;
  bool quick = false;

  auto* enc = app.add_subcommand("encrypt", "Encrypt zero-padded 16-byte blocks");
  auto* dec = app.add_subcommand("decrypt", "Decrypt 16-byte blocks");
  for (auto* sub : {enc, dec}) {
    add_key_options(sub, common);
    sub->add_option("--in-hex", crypt.in_hex, "Input as hex");
    sub->add_option("--in", crypt.in_file, "Raw input file");
    sub->add_option("--out", crypt.out_file, "Write raw output here");
    sub->add_flag("--stdin-hex", crypt.stdin_hex, "Parse stdin as hex (brackets allowed)");
  }

  auto* kx = app.add_subcommand("keyexpand", "Print the expanded key schedule");
  add_key_options(kx, common);

  auto* nd = app.add_subcommand("node", "Run one end of the encrypted link");
  add_key_options(nd, common);
  add_link_options(nd, common);
  nd->add_option("--role", node.role, "encrypt or decrypt")->check(CLI::IsMember({"encrypt", "decrypt"}));
  nd->add_option("--in", node.in_file, "Plaintext file (encryptor; default stdin)");
  nd->add_option("--out", node.out_file, "Write decrypted output here");
  nd->add_option("--capture", node.capture_file, "Decryptor: save the received wire bytes");
  nd->add_flag("--records", node.records, "Input/output are u16-length-prefixed records");
  nd->add_flag("--realtime", node.realtime, "Pace the simulated line against the wall clock");
  nd->add_option("--timeout-ms", node.timeout_ms, "Connect/accept timeout");

  auto* ch = app.add_subcommand("chat", "Line-oriented encrypted chat (one direction)");
  add_key_options(ch, common);
  add_link_options(ch, common);
  ch->add_option("--role", chat_role, "encrypt (types) or decrypt (displays)")
      ->check(CLI::IsMember({"encrypt", "decrypt"}));

  auto* bn = app.add_subcommand("bench", "Time single-block encryption and decryption");
  add_key_options(bn, common);
  bn->add_option("--blocks", bench_blocks, "Blocks per run")->check(CLI::PositiveNumber);
  bn->add_option("--op", bench_op, "encrypt, decrypt or both")
      ->check(CLI::IsMember({"encrypt", "decrypt", "both"}));
  bn->add_option("--csv", bench_csv, "Write the CSV report here");

  auto* st = app.add_subcommand("selftest", "Run the known-answer and property checks");
  st->add_flag("--quick", quick, "Fewer randomized trials");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*enc) return cmd_crypt(true, common, crypt);
    if (*dec) return cmd_crypt(false, common, crypt);
    if (*kx) return cmd_keyexpand(common);
    if (*nd) return cmd_node(common, node);
    if (*ch) return cmd_chat(common, chat_role);
    if (*bn) return cmd_bench(common, bench_blocks, bench_op, bench_csv);
    if (*st) return cmd_selftest(quick);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const rtaes::uart::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const rtaes::SizeError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCrypto;
  } catch (const rtaes::link::MessageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitCrypto;
  } catch (const rtaes::uart::LinkError& e) {
    std::cerr << "link error: " << e.what() << '\n';
    return kExitLink;
  } catch (const rtaes::kernel::KernelError& e) {
    std::cerr << "kernel error: " << e.what() << '\n';
    return kExitLink;
  }
  return kExitUsage;
}
