#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cstring>
#include <fstream>
#include <sstream>

#include "tstream/comms.hpp"

namespace tstream::comms {

namespace {

bool readAll(int fd, std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    ssize_t n = ::recv(fd, data, size, 0);
    if (n <= 0) return false;
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

std::uint32_t le32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

void putLe32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

constexpr std::uint32_t kMaxMessage = 64u << 20;

}  // namespace

std::map<WorkerId, PeerAddress> parsePeerConfig(const std::string& text) {
  std::map<WorkerId, PeerAddress> out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    std::istringstream fields(line);
    std::string id, addr, extra;
    if (!(fields >> id)) continue;
    auto bad = [&](const std::string& why) {
      return CommError(CommErrorKind::InvalidConfig,
                       "peer config line " + std::to_string(lineNo) + ": " + why);
    };
    if (!(fields >> addr) || (fields >> extra)) throw bad("expected 'workerId host:port'");
    auto colon = addr.rfind(':');
    if (colon == std::string::npos || colon == 0) throw bad("expected host:port");
    unsigned long worker = 0, port = 0;
    try {
      std::size_t used = 0;
      worker = std::stoul(id, &used);
      if (used != id.size()) throw bad("bad worker id");
      std::string portText = addr.substr(colon + 1);
      port = std::stoul(portText, &used);
      if (used != portText.size() || port > 65535) throw bad("bad port");
    } catch (const std::logic_error&) {
      throw bad("bad number");
    }
    if (out.count(static_cast<WorkerId>(worker))) throw bad("duplicate worker id");
    out[static_cast<WorkerId>(worker)] =
        PeerAddress{addr.substr(0, colon), static_cast<std::uint16_t>(port)};
  }
  return out;
}

std::map<WorkerId, PeerAddress> loadPeerConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CommError(CommErrorKind::InvalidConfig, "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parsePeerConfig(ss.str());
}

SocketTransport::SocketTransport(WorkerId self, std::map<WorkerId, PeerAddress> peers,
                                 std::uint16_t listenPort)
    : self_(self), peers_(std::move(peers)) {
  listenFd_ = ::socket(AF_INET, SOCK_STREAM, 0);
  if (listenFd_ < 0) throw std::runtime_error("socket() failed");
  int one = 1;
  ::setsockopt(listenFd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_ANY);
  addr.sin_port = htons(listenPort);
  if (::bind(listenFd_, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(listenFd_, 64) != 0) {
    ::close(listenFd_);
    throw std::runtime_error("cannot listen on port " + std::to_string(listenPort) +
                             ": " + std::strerror(errno));
  }
  socklen_t len = sizeof addr;
  ::getsockname(listenFd_, reinterpret_cast<sockaddr*>(&addr), &len);
  port_ = ntohs(addr.sin_port);
  acceptor_ = std::thread([this] { acceptLoop(); });
}

SocketTransport::~SocketTransport() {
  stopping_.store(true);
  ::shutdown(listenFd_, SHUT_RDWR);
  ::close(listenFd_);
  if (acceptor_.joinable()) acceptor_.join();
  {
    std::lock_guard lock(readersMutex_);
    for (int fd : readerFds_) ::shutdown(fd, SHUT_RDWR);
  }
  for (auto& t : readers_)
    if (t.joinable()) t.join();
  for (int fd : readerFds_) ::close(fd);
  {
    std::lock_guard lock(peersMutex_);
    for (auto& [key, c] : connections_)
      if (c->fd >= 0) ::close(c->fd);
  }
  std::lock_guard lock(channelsMutex_);
  for (auto& [name, pool] : channels_) pool->stop();
}

void SocketTransport::setPeer(WorkerId worker, PeerAddress address) {
  std::lock_guard lock(peersMutex_);
  peers_[worker] = std::move(address);
}

void SocketTransport::attach(const std::string& channel, WorkerId self,
                             std::size_t pullWorkers, Handler handler) {
  if (self != self_)
    throw CommError(CommErrorKind::InvalidConfig, "socket transport serves one worker");
  auto pool = std::make_shared<PullPool>(pullWorkers, std::move(handler), activity_);
  std::lock_guard lock(channelsMutex_);
  channels_[channel] = std::move(pool);
}

void SocketTransport::detach(const std::string& channel, WorkerId) {
  std::shared_ptr<PullPool> pool;
  {
    std::lock_guard lock(channelsMutex_);
    auto it = channels_.find(channel);
    if (it == channels_.end()) return;
    pool = std::move(it->second);
    channels_.erase(it);
  }
  dropped_.fetch_add(pool->stop());
}

int SocketTransport::connectTo(const PeerAddress& address) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (::getaddrinfo(address.host.c_str(), std::to_string(address.port).c_str(),
                    &hints, &res) != 0)
    return -1;
  int fd = -1;
  for (addrinfo* p = res; p; p = p->ai_next) {
    fd = ::socket(p->ai_family, p->ai_socktype, p->ai_protocol);
    if (fd < 0) continue;
    if (::connect(fd, p->ai_addr, p->ai_addrlen) == 0) break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd >= 0) {
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  }
  return fd;
}

bool SocketTransport::writeAll(int fd, const std::uint8_t* data, std::size_t size) {
  while (size > 0) {
    ssize_t n = ::send(fd, data, size, MSG_NOSIGNAL);
    if (n <= 0) return false;
    data += n;
    size -= static_cast<std::size_t>(n);
  }
  return true;
}

void SocketTransport::deliver(const std::string& channel, WorkerId from, WorkerId to,
                              std::size_t pushChannel, Bytes message) {
  std::shared_ptr<Connection> conn;
  PeerAddress address;
  {
    std::lock_guard lock(peersMutex_);
    auto peer = peers_.find(to);
    if (peer == peers_.end()) {
      dropped_.fetch_add(1);
      return;
    }
    address = peer->second;
    auto& slot = connections_[{channel, to, pushChannel}];
    if (!slot) slot = std::make_shared<Connection>();
    conn = slot;
  }
  std::lock_guard lock(conn->mutex);
  if (conn->fd < 0) {
    conn->fd = connectTo(address);
    if (conn->fd < 0) {
      dropped_.fetch_add(1);
      return;
    }
    std::vector<std::uint8_t> hello;
    hello.push_back(static_cast<std::uint8_t>(channel.size() & 0xff));
    hello.push_back(static_cast<std::uint8_t>(channel.size() >> 8));
    hello.insert(hello.end(), channel.begin(), channel.end());
    putLe32(hello, from);
    if (!writeAll(conn->fd, hello.data(), hello.size())) {
      ::close(conn->fd);
      conn->fd = -1;
      dropped_.fetch_add(1);
      return;
    }
  }
  std::vector<std::uint8_t> frame;
  frame.reserve(message.size() + 4);
  putLe32(frame, static_cast<std::uint32_t>(message.size()));
  frame.insert(frame.end(), message.begin(), message.end());
  if (!writeAll(conn->fd, frame.data(), frame.size())) {
    ::close(conn->fd);
    conn->fd = -1;
    dropped_.fetch_add(1);
  }
}

void SocketTransport::drain() {
  throw CommError(CommErrorKind::Unsupported, "drain is not supported over sockets");
}

void SocketTransport::acceptLoop() {
  while (!stopping_.load()) {
    int fd = ::accept(listenFd_, nullptr, nullptr);
    if (fd < 0) {
      if (stopping_.load()) return;
      continue;
    }
    std::lock_guard lock(readersMutex_);
    if (stopping_.load()) {
      ::close(fd);
      return;
    }
    readerFds_.push_back(fd);
    readers_.emplace_back([this, fd] { readLoop(fd); });
  }
}

void SocketTransport::readLoop(int fd) {
  std::uint8_t lenBuf[4];
  if (!readAll(fd, lenBuf, 2)) return;
  std::size_t nameLen = lenBuf[0] | (static_cast<std::size_t>(lenBuf[1]) << 8);
  std::string channel(nameLen, '\0');
  if (!readAll(fd, reinterpret_cast<std::uint8_t*>(channel.data()), nameLen)) return;
  if (!readAll(fd, lenBuf, 4)) return;  // sender id
  while (!stopping_.load()) {
    if (!readAll(fd, lenBuf, 4)) return;
    std::uint32_t len = le32(lenBuf);
    if (len > kMaxMessage) return;
    Bytes msg(len);
    if (!readAll(fd, msg.data(), len)) return;
    std::shared_ptr<PullPool> pool;
    {
      std::lock_guard lock(channelsMutex_);
      auto it = channels_.find(channel);
      if (it != channels_.end()) pool = it->second;
    }
    if (!pool) {
      dropped_.fetch_add(1);
      continue;
    }
    delivered_.fetch_add(1);
    activity_->begin();
    pool->push(std::move(msg));
  }
}

}  // namespace tstream::comms
