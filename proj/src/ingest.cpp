#include "tstream/ingest.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>

#include "tstream/keep.hpp"

namespace tstream::ingest {

namespace {

const char* const kFieldNames[kNetflowFields] = {
    "time", "duration", "source ip", "destination ip",
    "source port", "destination port", "protocol"};

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

double parseReal(std::string_view s, std::size_t field) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw MalformedLine(field, std::string("bad ") + kFieldNames[field] + ": '" +
                                   std::string(s) + "'");
  return v;
}

int parsePort(std::string_view s, std::size_t field) {
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size() || v < 0 || v > 65535)
    throw MalformedLine(field, std::string("bad ") + kFieldNames[field] + ": '" +
                                   std::string(s) + "'");
  return v;
}

}  // namespace

NetflowTuple parseNetflowLine(std::string_view line, const ParseOptions& options) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (fields.size() < kNetflowFields)
    throw MalformedLine(fields.size(), "expected " + std::to_string(kNetflowFields) +
                                           " fields, got " +
                                           std::to_string(fields.size()));
  if (fields.size() > kNetflowFields && !options.allowExtraFields)
    throw MalformedLine(kNetflowFields, "unexpected extra fields");

  NetflowTuple t;
  t.timeSeconds = parseReal(fields[0], 0);
  t.durationSeconds = parseReal(fields[1], 1);
  if (t.durationSeconds < 0.0) throw MalformedLine(1, "negative duration");
  for (std::size_t f : {2u, 3u, 6u})
    if (fields[f].empty())
      throw MalformedLine(f, std::string("empty ") + kFieldNames[f]);
  t.sourceIp = std::string(fields[2]);
  t.destIp = std::string(fields[3]);
  t.sourcePort = parsePort(fields[4], 4);
  t.destPort = parsePort(fields[5], 5);
  t.protocol = std::string(fields[6]);
  for (std::size_t i = kNetflowFields; i < fields.size(); ++i)
    t.extras.emplace_back(fields[i]);
  return t;
}

std::string formatNetflowLine(const NetflowTuple& t) {
  std::string out = formatTime(t.timeSeconds) + ',' + formatTime(t.durationSeconds) +
                    ',' + t.sourceIp + ',' + t.destIp + ',' +
                    std::to_string(t.sourcePort) + ',' + std::to_string(t.destPort) +
                    ',' + t.protocol;
  for (const auto& e : t.extras) out += ',' + e;
  return out;
}

TemporalEdge toEdge(const NetflowTuple& t, EdgeId id) {
  TemporalEdge e;
  e.source = VertexId::intern(t.sourceIp);
  e.target = VertexId::intern(t.destIp);
  e.startTime = t.timeSeconds;
  e.duration = t.durationSeconds;
  e.id = id;
  auto payload = std::make_shared<std::vector<std::string>>();
  payload->reserve(3 + t.extras.size());
  payload->push_back(std::to_string(t.sourcePort));
  payload->push_back(std::to_string(t.destPort));
  payload->push_back(t.protocol);
  payload->insert(payload->end(), t.extras.begin(), t.extras.end());
  e.payload = std::move(payload);
  return e;
}

std::vector<TemporalEdge> readEdgeFile(const std::string& path,
                                       const ParseOptions& options, EdgeId firstId) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::vector<TemporalEdge> out;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    if (lineNo == 1 && v.substr(0, 4) == "time") continue;
    try {
      out.push_back(toEdge(parseNetflowLine(v, options), firstId + out.size()));
    } catch (const MalformedLine& e) {
      throw MalformedLine(e.field(), path + ":" + std::to_string(lineNo) + ": " + e.what());
    }
  }
  return out;
}

void GeneratorConfig::validate() const {
  if (vertexPoolSize < 2) throw ConfigError("vertex pool must hold at least 2 vertices");
  if (edgesPerWorker == 0) throw ConfigError("edges per worker must be positive");
  if (!(ratePerWorker > 0.0) || !std::isfinite(ratePerWorker))
    throw ConfigError("rate per worker must be positive");
  if (workerCount == 0) throw ConfigError("worker count must be positive");
  if (!(maxDuration >= 0.0) || !std::isfinite(maxDuration))
    throw ConfigError("max duration must be >= 0");
}

std::string vertexName(std::size_t i) {
  return "10." + std::to_string((i >> 16) & 0xff) + "." +
         std::to_string((i >> 8) & 0xff) + "." + std::to_string(i & 0xff);
}

Generator::Generator(const GeneratorConfig& config, std::size_t workerIndex)
    : config_(config),
      worker_(workerIndex),
      rng_(mix64(config.seed ^ mix64(workerIndex + 1))) {
  config_.validate();
  if (workerIndex >= config_.workerCount)
    throw ConfigError("worker index out of range");
  if (config_.vertexPoolSize > (std::size_t{1} << 24))
    throw ConfigError("vertex pool larger than the 10.0.0.0/8 name space");
  pool_.reserve(config_.vertexPoolSize);
  for (std::size_t i = 0; i < config_.vertexPoolSize; ++i)
    pool_.push_back(VertexId::intern(vertexName(i)));
}

TemporalEdge Generator::next() {
  std::uniform_int_distribution<std::size_t> pick(0, pool_.size() - 1);
  std::uniform_real_distribution<double> dur(0.0, config_.maxDuration);
  std::size_t s = pick(rng_);
  std::size_t t = pick(rng_);
  while (t == s) t = pick(rng_);
  TemporalEdge e;
  e.source = pool_[s];
  e.target = pool_[t];
  e.startTime = static_cast<double>(produced_) / config_.ratePerWorker;
  e.duration = config_.maxDuration > 0.0 ? dur(rng_) : 0.0;
  e.id = (static_cast<EdgeId>(worker_) << 40) | produced_;
  ++produced_;
  return e;
}

std::vector<TemporalEdge> generate(const GeneratorConfig& config, std::size_t workerIndex) {
  Generator g(config, workerIndex);
  std::vector<TemporalEdge> out;
  out.reserve(config.edgesPerWorker);
  while (!g.done()) out.push_back(g.next());
  return out;
}

SocketLineSource::SocketLineSource(std::uint16_t port) {
  listenFd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listenFd_ < 0) throw std::runtime_error("socket() failed");
  int one = 1;
  ::setsockopt(listenFd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(port);
  if (::bind(listenFd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listenFd_, 4) != 0) {
    ::close(listenFd_);
    throw std::runtime_error("cannot listen on port " + std::to_string(port) + ": " +
                             std::strerror(errno));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listenFd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
}

SocketLineSource::~SocketLineSource() {
  close();
  if (connFd_ >= 0) ::close(connFd_);
  ::close(listenFd_);
}

void SocketLineSource::close() {
  if (closed_) return;
  closed_ = true;
  ::shutdown(listenFd_, SHUT_RDWR);
  if (connFd_ >= 0) ::shutdown(connFd_, SHUT_RDWR);
}

bool SocketLineSource::fill() {
  if (closed_) return false;
  if (connFd_ < 0) {
    connFd_ = ::accept(listenFd_, nullptr, nullptr);
    if (connFd_ < 0) return false;
  }
  char buf[65536];
  ssize_t n = ::recv(connFd_, buf, sizeof buf, 0);
  if (n <= 0) return false;
  buffer_.append(buf, static_cast<std::size_t>(n));
  return true;
}

bool SocketLineSource::nextLine(std::string& line) {
  for (;;) {
    auto nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      line.assign(buffer_, 0, nl);
      if (!line.empty() && line.back() == '\r') line.pop_back();
      buffer_.erase(0, nl + 1);
      return true;
    }
    if (!fill()) {
      if (buffer_.empty()) return false;
      line = std::move(buffer_);
      buffer_.clear();
      return true;
    }
  }
}

}  // namespace tstream::ingest
