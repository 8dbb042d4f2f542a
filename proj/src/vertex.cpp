#include "tstream/vertex.hpp"

#include <cstdio>
#include <mutex>
#include <shared_mutex>
#include <stdexcept>
#include <unordered_map>

namespace tstream {

namespace {

class NameRegistry {
 public:
  void record(std::uint64_t id, std::string_view name) {
    {
      std::shared_lock lock(mutex_);
      auto it = names_.find(id);
      if (it != names_.end()) {
        check(it->second, name);
        return;
      }
    }
    std::unique_lock lock(mutex_);
    auto [it, inserted] = names_.try_emplace(id, name);
    if (!inserted) check(it->second, name);
  }

  bool lookup(std::uint64_t id, std::string& out) const {
    std::shared_lock lock(mutex_);
    auto it = names_.find(id);
    if (it == names_.end()) return false;
    out = it->second;
    return true;
  }

 private:
  static void check(const std::string& existing, std::string_view name) {
    if (existing != name) {
      throw std::runtime_error("vertex id collision between '" + existing +
                               "' and '" + std::string(name) + "'");
    }
  }

  mutable std::shared_mutex mutex_;
  std::unordered_map<std::uint64_t, std::string> names_;
};

NameRegistry& registry() {
  static NameRegistry instance;
  return instance;
}

}  // namespace

std::uint64_t hashBytes(std::string_view bytes) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return mix64(h);
}

VertexId VertexId::intern(std::string_view name) {
  VertexId id = fromName(name);
  registry().record(id.value(), name);
  return id;
}

std::string VertexId::name() const {
  std::string out;
  if (registry().lookup(value_, out)) return out;
  char buf[24];
  std::snprintf(buf, sizeof buf, "#%016llx",
                static_cast<unsigned long long>(value_));
  return buf;
}

}  // namespace tstream
