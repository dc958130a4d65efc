#include <doctest.h>

#include <random>

#include "rtaes/socket_port.hpp"

using namespace rtaes::uart;
using namespace std::chrono_literals;

namespace {

struct Pair {
  std::unique_ptr<SocketPort> a;
  std::unique_ptr<SocketPort> b;
};

Pair open_pair(const ChannelConfig& ca, const ChannelConfig& cb) {
  Listener listener(Endpoint::parse("127.0.0.1:0"));
  Socket client = connect_to({"127.0.0.1", listener.port()}, 2000ms);
  Socket server = listener.accept(2000ms);
  REQUIRE(server);
  return {std::make_unique<SocketPort>(std::move(client), ca),
          std::make_unique<SocketPort>(std::move(server), cb)};
}

// Moves time forward on both ends in small steps until `done` holds.
template <typename Done>
void pump_until(Pair& p, Done done, int max_rounds = 100000) {
  const double step = p.a->config().frame_seconds();
  for (int i = 0; i < max_rounds && !done(); ++i) {
    p.a->pump(step);
    p.b->pump(step, 1ms);
  }
  REQUIRE(done());
}

}  // namespace

TEST_CASE("wire header") {
  const auto h = encode_wire_header(115200);
  CHECK(h == std::array<Byte, kWireHeaderBytes>{'A', 'E', 'S', 'L', 0x01, 0x00, 0x01, 0xc2, 0x00});
  CHECK(decode_wire_header(h) == 115200);

  auto bad = h;
  bad[0] = 'X';
  CHECK_THROWS_AS(decode_wire_header(bad), LinkError);
  bad = h;
  bad[4] = 0x02;
  CHECK_THROWS_AS(decode_wire_header(bad), LinkError);
}

TEST_CASE("endpoint parsing") {
  const auto e = Endpoint::parse("127.0.0.1:5150");
  CHECK(e.host == "127.0.0.1");
  CHECK(e.port == 5150);
  CHECK(Endpoint::parse("6000").port == 6000);
  CHECK_THROWS_AS(Endpoint::parse("host:"), ConfigError);
  CHECK_THROWS_AS(Endpoint::parse("host:70000"), ConfigError);
  CHECK_THROWS_AS(Endpoint::parse("host:abc"), ConfigError);
}

TEST_CASE("connect to a closed port fails") {
  // Grab an ephemeral port, then release it.
  std::uint16_t port = 0;
  {
    Listener l(Endpoint::parse("127.0.0.1:0"));
    port = l.port();
  }
  CHECK_THROWS_AS(connect_to({"127.0.0.1", port}, 100ms), LinkError);
}

TEST_CASE("bytes cross a socket link in order") {
  auto p = open_pair({115200, 16}, {115200, 16});
  p.b->set_capture(true);
  std::mt19937 rng(61);
  std::vector<Byte> sent, got;
  while (sent.size() < 2000) {
    const auto b = static_cast<Byte>(rng());
    if (p.a->send(b) == SendResult::kOk) {
      sent.push_back(b);
    } else {
      p.a->pump(p.a->config().frame_seconds());
    }
    p.b->pump(p.a->config().frame_seconds());
    while (auto r = p.b->recv()) got.push_back(*r);
  }
  p.a->close();
  pump_until(p, [&] {
    while (auto r = p.b->recv()) got.push_back(*r);
    return p.b->peer_closed() && got.size() == sent.size();
  });
  CHECK(got == sent);
  CHECK(p.b->capture() == sent);
  CHECK(p.b->peer_baud() == 115200u);
  CHECK(p.b->incoming_counters().framing == 0);
  CHECK(p.b->incoming_counters().overrun == 0);
}

TEST_CASE("socket link reproduces a baud mismatch") {
  auto p = open_pair({115200, 16}, {57600, 16});
  for (int i = 0; i < 10; ++i) REQUIRE(p.a->send(static_cast<Byte>(0x55 + i)) == SendResult::kOk);
  p.a->close();
  pump_until(p, [&] { return p.b->peer_closed(); });
  CHECK(p.b->status().framing_error);
  CHECK(p.b->incoming_counters().framing > 0);
}

TEST_CASE("both directions at once") {
  auto p = open_pair({}, {});
  for (Byte b : {1, 2, 3}) p.a->send(b);
  for (Byte b : {9, 8}) p.b->send(b);
  std::vector<Byte> at_a, at_b;
  pump_until(p, [&] {
    while (auto r = p.a->recv()) at_a.push_back(*r);
    while (auto r = p.b->recv()) at_b.push_back(*r);
    return at_a.size() == 2 && at_b.size() == 3;
  });
  CHECK(at_b == std::vector<Byte>{1, 2, 3});
  CHECK(at_a == std::vector<Byte>{9, 8});
}
