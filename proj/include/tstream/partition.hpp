#pragma once

#include <algorithm>
#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "tstream/temporal_edge.hpp"

namespace tstream {

using WorkerId = std::uint32_t;
using VertexHash = std::function<std::uint64_t(VertexId)>;

/// Named hash functions usable by HASH ... WITH.
VertexHash hashFunction(const std::string& name);
std::vector<std::string> hashFunctionNames();

/// One or two distinct owners, ascending.
class Route {
 public:
  Route(WorkerId a, WorkerId b) noexcept {
    if (a == b) {
      owners_ = {a, a};
      size_ = 1;
    } else {
      owners_ = {std::min(a, b), std::max(a, b)};
      size_ = 2;
    }
  }
  const WorkerId* begin() const noexcept { return owners_.data(); }
  const WorkerId* end() const noexcept { return owners_.data() + size_; }
  std::size_t size() const noexcept { return size_; }
  WorkerId operator[](std::size_t i) const noexcept { return owners_[i]; }
  bool contains(WorkerId w) const noexcept {
    return owners_[0] == w || (size_ == 2 && owners_[1] == w);
  }

 private:
  std::array<WorkerId, 2> owners_{};
  std::size_t size_ = 1;
};

/// owner(v) = hash(v) mod workerCount.
class Partitioner {
 public:
  explicit Partitioner(std::size_t workerCount,
                       const std::string& hashName = "IpHashFunction");

  std::size_t workerCount() const noexcept { return workers_; }
  const std::string& hashName() const noexcept { return hashName_; }

  WorkerId owner(VertexId v) const {
    return static_cast<WorkerId>(hash_(v) % workers_);
  }
  Route route(const TemporalEdge& edge) const {
    return Route(owner(edge.source), owner(edge.target));
  }

 private:
  std::size_t workers_;
  std::string hashName_;
  VertexHash hash_;
};

}  // namespace tstream
