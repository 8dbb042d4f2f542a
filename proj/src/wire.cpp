#include "tstream/wire.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>

namespace tstream::wire {

namespace {

class Writer {
 public:
  explicit Writer(std::uint8_t tag) { out_ = {tag, kVersion}; }

  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
      std::reverse(buf, buf + sizeof(T));
    out_.insert(out_.end(), buf, buf + sizeof(T));
  }
  void bytes(const std::string& s) { out_.insert(out_.end(), s.begin(), s.end()); }
  Bytes take() { return std::move(out_); }

 private:
  Bytes out_;
};

class Reader {
 public:
  Reader(const Bytes& in, std::uint8_t tag) : in_(in) {
    if (in_.size() < 2) throw WireError("message too short");
    if (in_[0] != tag) throw WireError("unexpected message tag");
    if (in_[1] != kVersion) throw WireError("unsupported message version");
    pos_ = 2;
  }

  template <typename T>
  T get() {
    need(sizeof(T));
    std::uint8_t buf[sizeof(T)];
    std::memcpy(buf, in_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
      std::reverse(buf, buf + sizeof(T));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
  }
  std::string bytes(std::size_t n) {
    need(n);
    std::string s(in_.begin() + static_cast<std::ptrdiff_t>(pos_),
                  in_.begin() + static_cast<std::ptrdiff_t>(pos_ + n));
    pos_ += n;
    return s;
  }
  void finish() const {
    if (pos_ != in_.size()) throw WireError("trailing bytes in message");
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (in_.size() - pos_ < n) throw WireError("truncated message");
  }

  const Bytes& in_;
  std::size_t pos_ = 0;
};

}  // namespace

Bytes encode(const TemporalEdge& edge) {
  Writer w(kEdgeTag);
  w.put<std::uint64_t>(edge.source.value());
  w.put<std::uint64_t>(edge.target.value());
  w.put<double>(edge.startTime);
  w.put<double>(edge.duration);
  w.put<std::uint64_t>(edge.id);
  const auto count = edge.payload ? edge.payload->size() : 0;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(count));
  for (std::size_t i = 0; i < count; ++i) {
    const auto& f = (*edge.payload)[i];
    w.put<std::uint32_t>(static_cast<std::uint32_t>(f.size()));
    w.bytes(f);
  }
  return w.take();
}

Bytes encode(const EdgeRequest& r) {
  if (r.queryId.size() > std::numeric_limits<std::uint16_t>::max())
    throw WireError("query id too long");
  Writer w(kRequestTag);
  std::uint8_t flags = (r.source ? 1 : 0) | (r.target ? 2 : 0);
  w.put<std::uint8_t>(flags);
  w.put<std::uint64_t>(r.source ? r.source->value() : 0);
  w.put<std::uint64_t>(r.target ? r.target->value() : 0);
  w.put<double>(r.window.lo);
  w.put<double>(r.window.hi);
  w.put<std::uint32_t>(r.requester);
  w.put<double>(r.expiry);
  w.put<std::uint16_t>(static_cast<std::uint16_t>(r.queryId.size()));
  w.bytes(r.queryId);
  w.put<std::uint32_t>(r.step);
  return w.take();
}

TemporalEdge decodeEdge(const Bytes& message) {
  Reader r(message, kEdgeTag);
  TemporalEdge e;
  e.source = VertexId(r.get<std::uint64_t>());
  e.target = VertexId(r.get<std::uint64_t>());
  e.startTime = r.get<double>();
  e.duration = r.get<double>();
  e.id = r.get<std::uint64_t>();
  auto count = r.get<std::uint32_t>();
  if (count > r.remaining() / 4) throw WireError("field count exceeds message");
  if (count > 0) {
    auto fields = std::make_shared<std::vector<std::string>>();
    fields->reserve(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      auto len = r.get<std::uint32_t>();
      fields->push_back(r.bytes(len));
    }
    e.payload = std::move(fields);
  }
  r.finish();
  return e;
}

EdgeRequest decodeRequest(const Bytes& message) {
  Reader r(message, kRequestTag);
  EdgeRequest q;
  auto flags = r.get<std::uint8_t>();
  if (flags == 0 || (flags & ~3u)) throw WireError("bad request flags");
  auto src = r.get<std::uint64_t>();
  auto tgt = r.get<std::uint64_t>();
  if (flags & 1) q.source = VertexId(src);
  if (flags & 2) q.target = VertexId(tgt);
  q.window.lo = r.get<double>();
  q.window.hi = r.get<double>();
  q.requester = r.get<std::uint32_t>();
  q.expiry = r.get<double>();
  auto len = r.get<std::uint16_t>();
  q.queryId = r.bytes(len);
  q.step = r.get<std::uint32_t>();
  r.finish();
  return q;
}

}  // namespace tstream::wire
