#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include "support.hpp"
#include "tstream/comms.hpp"
#include "tstream/wire.hpp"

using namespace tstream;
using namespace tstream::comms;
using test::edge;

namespace {

Bytes bytes(const std::string& s) { return Bytes(s.begin(), s.end()); }

CommErrorKind kindOf(const std::function<void()>& f) {
  try {
    f();
  } catch (const CommError& e) {
    return e.kind();
  }
  FAIL("expected CommError");
  return CommErrorKind::Unsupported;
}

/// Thread-safe log of received messages.
struct Inbox {
  std::mutex mutex;
  std::vector<Bytes> got;
  Handler handler() {
    return [this](const Bytes& b) {
      std::lock_guard lock(mutex);
      got.push_back(b);
    };
  }
  std::size_t size() {
    std::lock_guard lock(mutex);
    return got.size();
  }
};

bool waitFor(const std::function<bool()>& pred, double seconds = 5) {
  auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
  while (!pred()) {
    if (std::chrono::steady_clock::now() > until) return false;
    std::this_thread::sleep_for(std::chrono::milliseconds(2));
  }
  return true;
}

}  // namespace

TEST_CASE("edge frames round trip") {
  auto e = edge("10.0.0.1", "10.0.0.2", 12.25, 0.5, (EdgeId{3} << 40) | 17);
  e.payload = std::make_shared<const std::vector<std::string>>(
      std::vector<std::string>{"5000", "80", "TCP", ""});
  auto back = wire::decodeEdge(wire::encode(e));
  CHECK(back.source == e.source);
  CHECK(back.target == e.target);
  CHECK(back.startTime == e.startTime);
  CHECK(back.duration == e.duration);
  CHECK(back.id == e.id);
  REQUIRE(back.payload);
  CHECK(*back.payload == *e.payload);

  auto bare = wire::decodeEdge(wire::encode(edge("a", "b", -1, 0, 0)));
  CHECK((!bare.payload || bare.payload->empty()));
}

TEST_CASE("request frames round trip") {
  EdgeRequest r;
  r.target = VertexId::intern("C");
  r.window = {1.5, 9};
  r.requester = 6;
  r.expiry = 9;
  r.queryId = "watering_hole";
  r.step = 2;
  CHECK(wire::decodeRequest(wire::encode(r)) == r);
  r.source = VertexId::intern("A");
  CHECK(wire::decodeRequest(wire::encode(r)) == r);
}

TEST_CASE("bad frames are rejected") {
  auto frame = wire::encode(edge("a", "b", 1, 0, 1));
  CHECK(frame[0] == wire::kEdgeTag);
  CHECK(frame[1] == wire::kVersion);
  for (std::size_t n = 0; n < frame.size(); ++n) {
    Bytes cut(frame.begin(), frame.begin() + static_cast<std::ptrdiff_t>(n));
    CHECK_THROWS_AS(wire::decodeEdge(cut), wire::WireError);
  }
  auto longer = frame;
  longer.push_back(0);
  CHECK_THROWS_AS(wire::decodeEdge(longer), wire::WireError);
  auto version = frame;
  version[1] = 2;
  CHECK_THROWS_AS(wire::decodeEdge(version), wire::WireError);
  CHECK_THROWS_AS(wire::decodeRequest(frame), wire::WireError);

  EdgeRequest r;
  r.source = VertexId::intern("A");
  r.window = {0, 1};
  auto rf = wire::encode(r);
  CHECK_THROWS_AS(wire::decodeEdge(rf), wire::WireError);
  auto flags = rf;
  flags[2] = 0;
  CHECK_THROWS_AS(wire::decodeRequest(flags), wire::WireError);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 20000; ++i) {
    Bytes junk(rng() % 80);
    for (auto& b : junk) b = static_cast<std::uint8_t>(rng());
    if (!junk.empty() && i % 2) junk[0] = wire::kRequestTag;
    if (junk.size() > 1 && i % 3) junk[1] = wire::kVersion;
    try {
      wire::decodeRequest(junk);
    } catch (const wire::WireError&) {
    }
    try {
      wire::decodeEdge(junk);
    } catch (const wire::WireError&) {
    }
  }
}

TEST_CASE("deterministic loopback") {
  auto net = InProcessNetwork::deterministic(1);
  Communicator a(0, {0, 1}, {}, net, "edges"), b(1, {0, 1}, {}, net, "edges");
  Inbox in;
  a.registerCallback([](const Bytes&) {});
  b.registerCallback(in.handler());
  a.start();
  b.start();
  a.send(1, bytes("hello"));
  CHECK(in.size() == 0);
  a.drain();
  REQUIRE(in.size() == 1);
  CHECK(in.got[0] == bytes("hello"));
  CHECK(net->delivered() == 1);
  a.stop();
  b.stop();
}

TEST_CASE("send errors") {
  auto net = InProcessNetwork::deterministic(1);
  Communicator a(0, {0, 1, 2}, {}, net, "x");
  CHECK(a.peers() == std::vector<WorkerId>{1, 2});
  CHECK(kindOf([&] { a.send(0, {}); }) == CommErrorKind::SendToSelf);
  CHECK(kindOf([&] { a.send(5, {}); }) == CommErrorKind::UnknownPeer);
  CHECK(kindOf([&] { a.send(1, {}); }) == CommErrorKind::NotStarted);
  CHECK(kindOf([&] { a.stop(); }) == CommErrorKind::NotStarted);
  CHECK(kindOf([&] { a.start(); }) == CommErrorKind::NoCallback);
  a.registerCallback([](const Bytes&) {});
  a.start();
  CHECK(kindOf([&] { a.start(); }) == CommErrorKind::AlreadyStarted);
  a.stop();
  CHECK_NOTHROW(a.stop());
  CHECK(kindOf([&] { Communicator(0, {1}, {0, 16, 0}, net, "y"); }) ==
        CommErrorKind::InvalidConfig);
  CHECK(kindOf([&] { Communicator(0, {1}, {4, 0, 0}, net, "y"); }) ==
        CommErrorKind::InvalidConfig);
}

TEST_CASE("counting callback sees every send") {
  for (bool delayed : {false, true}) {
    CAPTURE(delayed);
    auto net = delayed ? InProcessNetwork::delayed({0.002, 0, 9})
                       : InProcessNetwork::deterministic(9);
    std::atomic<int> count{0};
    std::vector<std::unique_ptr<Communicator>> comms;
    for (WorkerId w = 0; w < 3; ++w) {
      comms.push_back(std::make_unique<Communicator>(w, std::vector<WorkerId>{0, 1, 2},
                                                     CommConfig{}, net, "c"));
      comms.back()->registerCallback([&](const Bytes&) { ++count; });
      comms.back()->start();
    }
    int sends = 0;
    for (int i = 0; i < 300; ++i) {
      WorkerId from = i % 3, to = (i + 1 + i / 3 % 2) % 3;
      comms[from]->send(to, bytes(std::to_string(i)));
      ++sends;
    }
    comms[0]->drain();
    CHECK(count == sends);
    CHECK(net->dropped() == 0);
    for (auto& c : comms) c->stop();
  }
}

TEST_CASE("total loss") {
  auto net = InProcessNetwork::delayed({0, 1.0, 3});
  Communicator a(0, {1}, {}, net, "e"), b(1, {0}, {}, net, "e");
  std::atomic<int> count{0};
  a.registerCallback([](const Bytes&) {});
  b.registerCallback([&](const Bytes&) { ++count; });
  a.start();
  b.start();
  a.send(1, bytes("x"));
  a.drain();
  CHECK(count == 0);
  CHECK(net->dropped() == 1);
  CHECK(kindOf([] { InProcessNetwork::delayed({0, 1.5, 0}); }) == CommErrorKind::InvalidConfig);
}

TEST_CASE("push channel choice is uniform") {
  auto net = InProcessNetwork::deterministic(5);
  Communicator a(0, {1}, {4, 1, 123}, net, "u"), b(1, {0}, {4, 1, 0}, net, "u");
  a.registerCallback([](const Bytes&) {});
  b.registerCallback([](const Bytes&) {});
  a.start();
  b.start();
  const int n = 10000;
  for (int i = 0; i < n; ++i) a.send(1, {});
  auto counts = a.channelCounts(1);
  REQUIRE(counts.size() == 4);
  const double expect = n / 4.0, sigma = std::sqrt(n * 0.25 * 0.75);
  double chi2 = 0;
  for (auto c : counts) {
    CHECK(std::abs(static_cast<double>(c) - expect) < 4 * sigma);
    chi2 += (c - expect) * (c - expect) / expect;
  }
  // 3 degrees of freedom, upper 0.1% point
  CHECK(chi2 < 16.266);
  a.drain();
  CHECK(net->delivered() == n);
}

TEST_CASE("same seed, same delivery schedule") {
  auto run = [](std::uint64_t seed) {
    auto net = InProcessNetwork::deterministic(seed);
    std::vector<std::string> order;
    std::vector<std::unique_ptr<Communicator>> comms;
    for (WorkerId w = 0; w < 3; ++w) {
      comms.push_back(std::make_unique<Communicator>(
          w, std::vector<WorkerId>{0, 1, 2}, CommConfig{4, 1, seed}, net, "s"));
      comms.back()->registerCallback([&order, w](const Bytes& b) {
        order.push_back(std::to_string(w) + ":" + std::string(b.begin(), b.end()));
      });
      comms.back()->start();
    }
    for (int i = 0; i < 200; ++i)
      comms[i % 3]->send((i % 3 + 1 + i % 2) % 3, bytes(std::to_string(i)));
    net->drain();
    return order;
  };
  auto a = run(11), b = run(11), c = run(12);
  CHECK(a.size() == 200);
  CHECK(a == b);
  CHECK(a != c);
}

TEST_CASE("edge and request channels are independent") {
  auto net = InProcessNetwork::deterministic(2);
  Communicator e0(0, {1}, {}, net, "edges"), e1(1, {0}, {}, net, "edges");
  Communicator r0(0, {1}, {}, net, "requests"), r1(1, {0}, {}, net, "requests");
  Inbox edges, requests;
  e0.registerCallback([](const Bytes&) {});
  r0.registerCallback([](const Bytes&) {});
  e1.registerCallback(edges.handler());
  r1.registerCallback(requests.handler());
  for (auto* c : {&e0, &e1, &r0, &r1}) c->start();
  e0.send(1, bytes("edge"));
  r0.send(1, bytes("req"));
  r0.send(1, bytes("req2"));
  net->drain();
  CHECK(edges.got == std::vector<Bytes>{bytes("edge")});
  CHECK(requests.size() == 2);
  r1.stop();
  e0.send(1, bytes("edge2"));
  net->drain();
  CHECK(edges.size() == 2);
}

TEST_CASE("delayed transport reorders but delivers") {
  auto net = InProcessNetwork::delayed({0.01, 0, 17});
  Communicator a(0, {1}, {4, 4, 1}, net, "d"), b(1, {0}, {4, 4, 2}, net, "d");
  Inbox in;
  a.registerCallback([](const Bytes&) {});
  b.registerCallback(in.handler());
  a.start();
  b.start();
  for (int i = 0; i < 500; ++i) a.send(1, bytes(std::to_string(i)));
  net->drain();
  REQUIRE(in.size() == 500);
  std::vector<int> seen;
  for (const auto& m : in.got) seen.push_back(std::stoi(std::string(m.begin(), m.end())));
  CHECK_FALSE(std::is_sorted(seen.begin(), seen.end()));
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 500; ++i) CHECK(seen[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("peer config") {
  auto peers = parsePeerConfig("# cluster\n0 127.0.0.1:9000\n\n1 host-b:9001  \n");
  REQUIRE(peers.size() == 2);
  CHECK(peers.at(0).host == "127.0.0.1");
  CHECK(peers.at(0).port == 9000);
  CHECK(peers.at(1).host == "host-b");
  CHECK(peers.at(1).port == 9001);
  CHECK(kindOf([] { parsePeerConfig("0 nohostport\n"); }) == CommErrorKind::InvalidConfig);
  CHECK(kindOf([] { parsePeerConfig("x 1.2.3.4:5\n"); }) == CommErrorKind::InvalidConfig);
  CHECK(kindOf([] { parsePeerConfig("0 h:99999\n"); }) == CommErrorKind::InvalidConfig);
}

TEST_CASE("socket loopback between two workers") {
  auto t0 = std::make_shared<SocketTransport>(0, std::map<WorkerId, PeerAddress>{}, 0);
  auto t1 = std::make_shared<SocketTransport>(1, std::map<WorkerId, PeerAddress>{}, 0);
  REQUIRE(t0->port() != 0);
  t0->setPeer(1, {"127.0.0.1", t1->port()});
  t1->setPeer(0, {"127.0.0.1", t0->port()});

  Communicator a(0, {0, 1}, {4, 2, 1}, t0, "edges"), b(1, {0, 1}, {4, 2, 2}, t1, "edges");
  Inbox atA, atB;
  a.registerCallback(atA.handler());
  b.registerCallback(atB.handler());
  a.start();
  b.start();

  auto frame = wire::encode(edge("10.1.1.1", "10.2.2.2", 3.5, 1, 99));
  for (int i = 0; i < 50; ++i) a.send(1, frame);
  b.send(0, bytes("back"));
  REQUIRE(waitFor([&] { return atB.size() == 50 && atA.size() == 1; }));
  CHECK(wire::decodeEdge(atB.got[0]).id == 99);
  CHECK(atA.got[0] == bytes("back"));
  CHECK(kindOf([&] { a.drain(); }) == CommErrorKind::Unsupported);
  a.stop();
  b.stop();
}
