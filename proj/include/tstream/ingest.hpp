#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "tstream/temporal_edge.hpp"

namespace tstream::ingest {

/// One CSV line: time,duration,srcIp,dstIp,srcPort,dstPort,protocol[,extra...]
struct NetflowTuple {
  double timeSeconds = 0.0;
  double durationSeconds = 0.0;
  std::string sourceIp;
  std::string destIp;
  int sourcePort = 0;
  int destPort = 0;
  std::string protocol;
  std::vector<std::string> extras;

  friend bool operator==(const NetflowTuple&, const NetflowTuple&) = default;
};

inline constexpr std::size_t kNetflowFields = 7;

class MalformedLine : public std::runtime_error {
 public:
  MalformedLine(std::size_t field, const std::string& message)
      : std::runtime_error(message), field_(field) {}
  /// Zero-based index of the offending (or first missing) field.
  std::size_t field() const noexcept { return field_; }

 private:
  std::size_t field_;
};

struct ParseOptions {
  /// Keep fields past the seventh as extras instead of rejecting the line.
  bool allowExtraFields = true;
};

NetflowTuple parseNetflowLine(std::string_view line, const ParseOptions& options = {});
std::string formatNetflowLine(const NetflowTuple& tuple);

/// Edge view (sourceIp, destIp, time, duration).  The remaining fields ride
/// along as the payload.
TemporalEdge toEdge(const NetflowTuple& tuple, EdgeId id);

/// Reads a CSV file of netflow lines.  Blank lines and lines starting with
/// `#` are skipped, as is a first line beginning with "time".  Ids are
/// firstId, firstId + 1, ...  Errors carry the line number.
std::vector<TemporalEdge> readEdgeFile(const std::string& path,
                                       const ParseOptions& options = {},
                                       EdgeId firstId = 0);

struct GeneratorConfig {
  std::size_t vertexPoolSize = 5000;
  std::size_t edgesPerWorker = 2'500'000;
  double ratePerWorker = 1000.0;
  std::uint64_t seed = 0;
  std::size_t workerCount = 1;
  /// Durations are uniform on [0, maxDuration).
  double maxDuration = 1.0;

  /// Throws ConfigError.
  void validate() const;
};

/// "10.a.b.c" for pool index i.
std::string vertexName(std::size_t index);

/// Synthetic netflows for one worker: endpoints uniform over the pool with
/// self-loops redrawn, edge k at time k / ratePerWorker.  Ids are
/// (workerIndex << 40) | k, unique across workers.
class Generator {
 public:
  Generator(const GeneratorConfig& config, std::size_t workerIndex);

  bool done() const noexcept { return produced_ >= config_.edgesPerWorker; }
  std::size_t produced() const noexcept { return produced_; }
  TemporalEdge next();

 private:
  GeneratorConfig config_;
  std::size_t worker_;
  std::mt19937_64 rng_;
  std::vector<VertexId> pool_;
  std::size_t produced_ = 0;
};

std::vector<TemporalEdge> generate(const GeneratorConfig& config, std::size_t workerIndex);

/// Listens on a TCP port and yields newline-delimited lines from one
/// connection at a time.
class SocketLineSource {
 public:
  explicit SocketLineSource(std::uint16_t port);
  ~SocketLineSource();

  SocketLineSource(const SocketLineSource&) = delete;
  SocketLineSource& operator=(const SocketLineSource&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  /// Blocks for the next line; false once the peer closes or close() runs.
  bool nextLine(std::string& line);
  void close();

 private:
  bool fill();

  int listenFd_ = -1;
  int connFd_ = -1;
  std::uint16_t port_ = 0;
  std::string buffer_;
  bool closed_ = false;
};

}  // namespace tstream::ingest
