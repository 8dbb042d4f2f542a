#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_set>

#include "tstream/vertex.hpp"

namespace tstream {

/// Named vertex predicate used by `v in Set` / `v not in Set`.
/// Implementations must be safe for concurrent contains() calls.
class MembershipPredicate {
 public:
  virtual ~MembershipPredicate() = default;
  virtual bool contains(VertexId vertex) const = 0;
};

/// Immutable in-memory set.
class StaticVertexSet final : public MembershipPredicate {
 public:
  StaticVertexSet() = default;
  explicit StaticVertexSet(std::unordered_set<VertexId> members)
      : members_(std::move(members)) {}

  bool contains(VertexId vertex) const override {
    return members_.count(vertex) != 0;
  }
  std::size_t size() const noexcept { return members_.size(); }

 private:
  std::unordered_set<VertexId> members_;
};

class MembershipRegistry {
 public:
  void add(std::string name, std::shared_ptr<const MembershipPredicate> p) {
    std::lock_guard lock(mutex_);
    sets_[std::move(name)] = std::move(p);
  }

  std::shared_ptr<const MembershipPredicate> find(const std::string& name) const {
    std::lock_guard lock(mutex_);
    auto it = sets_.find(name);
    return it == sets_.end() ? nullptr : it->second;
  }

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::shared_ptr<const MembershipPredicate>> sets_;
};

}  // namespace tstream
