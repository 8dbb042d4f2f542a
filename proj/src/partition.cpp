#include "tstream/partition.hpp"

#include <stdexcept>

namespace tstream {

namespace {

constexpr std::uint64_t kOwnerSalt = 0x632be59bd9b4e019ULL;

std::uint64_t ipHash(VertexId v) { return mix64(v.value() ^ kOwnerSalt); }

}  // namespace

VertexHash hashFunction(const std::string& name) {
  if (name == "IpHashFunction") return ipHash;
  throw std::invalid_argument("unknown hash function '" + name + "'");
}

std::vector<std::string> hashFunctionNames() { return {"IpHashFunction"}; }

Partitioner::Partitioner(std::size_t workerCount, const std::string& hashName)
    : workers_(workerCount), hashName_(hashName), hash_(hashFunction(hashName)) {
  if (workerCount == 0) throw std::invalid_argument("worker count must be >= 1");
}

}  // namespace tstream
