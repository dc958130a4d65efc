#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "rtaes/socket_port.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is discarded.
RunResult run(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " '" RTAES_CLI_PATH "' " + args + " 2>/dev/null";
  RunResult r;
  FILE* pipe = ::popen(cmd.c_str(), "r");
  REQUIRE(pipe);
  char buf[4096];
  std::size_t n = 0;
  while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  const int status = ::pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

fs::path scratch_dir() {
  const auto dir = fs::temp_directory_path() / ("rtaes-cli-" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir;
}

const std::string kKey = "2b7e151628aed2a6abf7158809cf4f3c";
const std::string kPlain = "3243f6a8885a308d313198a2e0370734";
const std::string kCipher = "[39 25 84 1d 02 dc 09 fb dc 11 85 97 19 6a 0b 32]\n";

}  // namespace

TEST_CASE("encrypt and decrypt the standard vector") {
  auto r = run("encrypt --key " + kKey + " --in-hex " + kPlain);
  CHECK(r.code == 0);
  CHECK(r.out == kCipher);

  r = run("decrypt --key " + kKey + " --in-hex 3925841d02dc09fbdc118597196a0b32");
  CHECK(r.code == 0);
  CHECK(r.out == "[32 43 f6 a8 88 5a 30 8d 31 31 98 a2 e0 37 07 34]\n");
}

TEST_CASE("bracketed output pipes back into decrypt") {
  const auto r = run("encrypt --key " + kKey + " --in-hex " + kPlain + " | '" RTAES_CLI_PATH
                     "' decrypt --key " + kKey + " --stdin-hex");
  CHECK(r.code == 0);
  CHECK(r.out == "[32 43 f6 a8 88 5a 30 8d 31 31 98 a2 e0 37 07 34]\n");
}

TEST_CASE("key expansion output") {
  const auto r = run("keyexpand --key " + kKey);
  CHECK(r.code == 0);
  CHECK(r.out.find("2b7e1516") != std::string::npos);
  CHECK(r.out.find("a0fafe17") != std::string::npos);
  CHECK(r.out.find("b6630ca6") != std::string::npos);  // last word of the schedule
}

TEST_CASE("exit codes") {
  CHECK(run("").code == 1);
  CHECK(run("encrypt --key zz --in-hex 00").code == 1);
  CHECK(run("encrypt --in-hex 00").code == 1);
  CHECK(run("encrypt --key " + kKey + " --bogus").code == 1);
  CHECK(run("decrypt --key " + kKey + " --in-hex 0011").code == 2);
  CHECK(run("node --role encrypt --key " + kKey + " --address 127.0.0.1:1 --timeout-ms 200 --in /dev/null")
            .code != 0);
}

TEST_CASE("key from a config file and from the environment") {
  const auto dir = scratch_dir();
  const auto key_path = dir / "key.txt";
  std::ofstream(key_path) << kKey << "\n";
  const auto cfg_path = dir / "link.cfg";
  std::ofstream(cfg_path) << "# link settings\nkey_file=" << key_path.string() << "\nbaud=57600\n";

  auto r = run("encrypt --config '" + cfg_path.string() + "' --in-hex " + kPlain);
  CHECK(r.code == 0);
  CHECK(r.out == kCipher);

  r = run("encrypt --in-hex " + kPlain, "RTAES_KEY_FILE='" + key_path.string() + "'");
  CHECK(r.code == 0);
  CHECK(r.out == kCipher);

  fs::remove_all(dir);
}

TEST_CASE("in-process node round trip") {
  const auto dir = scratch_dir();
  const auto in = dir / "msg.txt";
  std::ofstream(in) << "hello over the wire";
  const auto r = run("node --transport in-process --role encrypt --key " + kKey + " --in '" + in.string() +
                     "' --out '" + (dir / "out.bin").string() + "'");
  CHECK(r.code == 0);
  std::ifstream f(dir / "out.bin", std::ios::binary);
  const std::string got((std::istreambuf_iterator<char>(f)), {});
  CHECK(got == "hello over the wire");
  fs::remove_all(dir);
}

TEST_CASE("in-process node demo prints the sample as hex") {
  const auto r = run("node --transport in-process --role encrypt --key " + kKey);
  CHECK(r.code == 0);
  CHECK(r.out.rfind("[52 65 61 6c", 0) == 0);  // "Real..."
}

TEST_CASE("mismatched baud between socket nodes is a link error") {
  const auto dir = scratch_dir();
  std::ofstream(dir / "msg.txt") << std::string(200, 'x');
  std::uint16_t port = 0;
  {
    rtaes::uart::Listener probe(rtaes::uart::Endpoint::parse("127.0.0.1:0"));
    port = probe.port();
  }
  const std::string addr = "127.0.0.1:" + std::to_string(port);
  const auto r = run("node --role decrypt --key " + kKey + " --baud 57600 --address " + addr +
                     " --out '" + (dir / "out.bin").string() + "' & sleep 0.3; '" RTAES_CLI_PATH
                     "' node --role encrypt --key " + kKey + " --baud 115200 --address " + addr + " --in '" +
                     (dir / "msg.txt").string() + "' >/dev/null 2>&1; wait $!");
  CHECK(r.code == 3);
  fs::remove_all(dir);
}

TEST_CASE("quick self-test passes") {
  const auto r = run("selftest --quick");
  CHECK(r.code == 0);
  CHECK(r.out.find("FAIL") == std::string::npos);
}
