#pragma once

#include <atomic>
#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "tstream/partition.hpp"

namespace tstream::comms {

using Bytes = std::vector<std::uint8_t>;
using Handler = std::function<void(const Bytes&)>;

enum class CommErrorKind {
  SendToSelf,
  UnknownPeer,
  NotStarted,
  AlreadyStarted,
  NoCallback,
  Unsupported,
  InvalidConfig,
};

class CommError : public std::runtime_error {
 public:
  CommError(CommErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}
  CommErrorKind kind() const noexcept { return kind_; }

 private:
  CommErrorKind kind_;
};

/// Counts outstanding work items; waitIdle() returns once the count is zero.
/// A handler that produces more work must begin() it before its own item
/// ends, so zero really means quiescent.
class ActivityCounter {
 public:
  void begin(std::size_t n = 1);
  void end(std::size_t n = 1);
  void waitIdle();
  std::size_t pending() const;

 private:
  mutable std::mutex mutex_;
  std::condition_variable idle_;
  std::size_t count_ = 0;
};

/// Worker threads popping messages from one inbox and running the handler.
class PullPool {
 public:
  PullPool(std::size_t threads, Handler handler,
           std::shared_ptr<ActivityCounter> activity);
  ~PullPool();

  PullPool(const PullPool&) = delete;
  PullPool& operator=(const PullPool&) = delete;

  /// The caller has already counted the message as begun.
  void push(Bytes message);
  /// Joins the workers; undelivered messages are discarded and returned as
  /// a count.
  std::size_t stop();

 private:
  void run();

  Handler handler_;
  std::shared_ptr<ActivityCounter> activity_;
  std::mutex mutex_;
  std::condition_variable ready_;
  std::deque<Bytes> inbox_;
  bool stopping_ = false;
  std::vector<std::thread> threads_;
};

/// Moves messages between named channel endpoints.  One transport serves
/// every communicator of a run (in-process) or of a host (sockets).
class Transport {
 public:
  virtual ~Transport() = default;
  virtual void attach(const std::string& channel, WorkerId self,
                      std::size_t pullWorkers, Handler handler) = 0;
  virtual void detach(const std::string& channel, WorkerId self) = 0;
  virtual void deliver(const std::string& channel, WorkerId from, WorkerId to,
                       std::size_t pushChannel, Bytes message) = 0;
  /// Blocks until every message sent so far has been handled.
  virtual void drain() = 0;
  virtual std::uint64_t dropped() const = 0;
  virtual std::uint64_t delivered() const = 0;
};

struct CommConfig {
  std::size_t pushChannelsPerPeer = 4;
  std::size_t pullWorkerCount = 16;
  std::uint64_t seed = 0;
};

/// Push/pull endpoint of one worker on one named channel.  Each peer is
/// reached through pushChannelsPerPeer logical channels, one picked
/// uniformly at random per send; incoming messages run the registered
/// callback on up to pullWorkerCount threads.
class Communicator {
 public:
  Communicator(WorkerId self, std::vector<WorkerId> peers, CommConfig config,
               std::shared_ptr<Transport> transport, std::string channel);
  ~Communicator();

  Communicator(const Communicator&) = delete;
  Communicator& operator=(const Communicator&) = delete;

  WorkerId self() const noexcept { return self_; }
  const std::vector<WorkerId>& peers() const noexcept { return peers_; }
  const std::string& channel() const noexcept { return channel_; }

  void registerCallback(Handler handler);
  void start();
  /// Idempotent once started.
  void stop();
  bool started() const noexcept { return state_.load() == State::Running; }

  void send(WorkerId destination, Bytes message);
  void drain();

  /// Messages sent to `peer` per push channel.
  std::vector<std::uint64_t> channelCounts(WorkerId peer) const;
  std::uint64_t sent() const noexcept { return sent_.load(); }

 private:
  enum class State { Idle, Running, Stopped };

  std::size_t peerIndex(WorkerId w) const;

  WorkerId self_;
  std::vector<WorkerId> peers_;
  CommConfig config_;
  std::shared_ptr<Transport> transport_;
  std::string channel_;
  Handler handler_;
  std::atomic<State> state_{State::Idle};

  mutable std::mutex rngMutex_;
  std::mt19937_64 rng_;
  std::vector<std::uint64_t> counts_;  // peer-major
  std::atomic<std::uint64_t> sent_{0};
};

struct DelayModel {
  double maxLatency = 0.0;  // seconds, uniform on [0, maxLatency]
  double dropProbability = 0.0;
  std::uint64_t seed = 0;
};

/// In-process transport.
///
/// Deterministic mode queues messages per logical channel and delivers them
/// only inside drain(), on the draining thread, choosing the next non-empty
/// channel with a seeded generator: FIFO within a channel, shuffled across
/// channels, and the same schedule for the same seed.
///
/// Delayed mode holds each message for a random latency (or drops it) on a
/// scheduler thread and hands it to the destination's pull workers.
class InProcessNetwork final : public Transport {
 public:
  static std::shared_ptr<InProcessNetwork> deterministic(
      std::uint64_t seed, std::shared_ptr<ActivityCounter> activity = nullptr);
  static std::shared_ptr<InProcessNetwork> delayed(
      DelayModel model, std::shared_ptr<ActivityCounter> activity = nullptr);
  ~InProcessNetwork() override;

  void attach(const std::string& channel, WorkerId self, std::size_t pullWorkers,
              Handler handler) override;
  void detach(const std::string& channel, WorkerId self) override;
  void deliver(const std::string& channel, WorkerId from, WorkerId to,
               std::size_t pushChannel, Bytes message) override;
  void drain() override;
  std::uint64_t dropped() const override { return dropped_.load(); }
  std::uint64_t delivered() const override { return delivered_.load(); }

  bool isDeterministic() const noexcept { return deterministic_; }
  const std::shared_ptr<ActivityCounter>& activity() const noexcept {
    return activity_;
  }

 private:
  struct QueueKey {
    std::string channel;
    WorkerId from;
    WorkerId to;
    std::size_t push;
    auto operator<=>(const QueueKey&) const = default;
  };
  struct Pending {
    std::chrono::steady_clock::time_point due;
    std::uint64_t seq;
    std::string channel;
    WorkerId to;
    Bytes message;
  };
  struct Later {
    bool operator()(const Pending& a, const Pending& b) const {
      return a.due != b.due ? a.due > b.due : a.seq > b.seq;
    }
  };
  struct Endpoint {
    Handler handler;
    std::unique_ptr<PullPool> pool;
  };

  InProcessNetwork(bool deterministic, DelayModel model,
                   std::shared_ptr<ActivityCounter> activity);
  void schedule();
  void dispatch(const std::string& channel, WorkerId to, Bytes message);

  bool deterministic_;
  DelayModel model_;
  std::shared_ptr<ActivityCounter> activity_;

  std::mutex endpointsMutex_;
  std::map<std::pair<std::string, WorkerId>, std::shared_ptr<Endpoint>> endpoints_;

  std::mutex mutex_;
  std::condition_variable wake_;
  std::mt19937_64 rng_;
  std::map<QueueKey, std::deque<Bytes>> queues_;
  std::vector<QueueKey> active_;
  std::vector<Pending> heap_;
  std::uint64_t seq_ = 0;
  bool stopping_ = false;
  std::thread scheduler_;

  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> delivered_{0};
};

struct PeerAddress {
  std::string host;
  std::uint16_t port = 0;
};

/// `workerId host:port` lines; blank lines and `#` comments ignored.
std::map<WorkerId, PeerAddress> parsePeerConfig(const std::string& text);
std::map<WorkerId, PeerAddress> loadPeerConfig(const std::string& path);

/// TCP transport.  Each process listens on one port; a connection opens with
/// a hello (u16 channel name length, name, u32 sender) followed by messages,
/// each prefixed with its u32 little-endian length.  drain() is unsupported.
class SocketTransport final : public Transport {
 public:
  SocketTransport(WorkerId self, std::map<WorkerId, PeerAddress> peers,
                  std::uint16_t listenPort);
  ~SocketTransport() override;

  std::uint16_t port() const noexcept { return port_; }
  void setPeer(WorkerId worker, PeerAddress address);

  void attach(const std::string& channel, WorkerId self, std::size_t pullWorkers,
              Handler handler) override;
  void detach(const std::string& channel, WorkerId self) override;
  void deliver(const std::string& channel, WorkerId from, WorkerId to,
               std::size_t pushChannel, Bytes message) override;
  void drain() override;
  std::uint64_t dropped() const override { return dropped_.load(); }
  std::uint64_t delivered() const override { return delivered_.load(); }

 private:
  struct Connection {
    std::mutex mutex;
    int fd = -1;
  };

  void acceptLoop();
  void readLoop(int fd);
  bool writeAll(int fd, const std::uint8_t* data, std::size_t size);
  int connectTo(const PeerAddress& address);

  WorkerId self_;
  std::uint16_t port_ = 0;
  int listenFd_ = -1;
  std::atomic<bool> stopping_{false};

  std::mutex peersMutex_;
  std::map<WorkerId, PeerAddress> peers_;
  std::map<std::tuple<std::string, WorkerId, std::size_t>, std::shared_ptr<Connection>>
      connections_;

  std::mutex channelsMutex_;
  std::map<std::string, std::shared_ptr<PullPool>> channels_;

  std::mutex readersMutex_;
  std::vector<int> readerFds_;
  std::vector<std::thread> readers_;
  std::thread acceptor_;

  std::shared_ptr<ActivityCounter> activity_ = std::make_shared<ActivityCounter>();
  std::atomic<std::uint64_t> dropped_{0};
  std::atomic<std::uint64_t> delivered_{0};
};

}  // namespace tstream::comms
