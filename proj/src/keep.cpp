#include "tstream/keep.hpp"

#include <string>

namespace tstream {

namespace {

void checkKq(double kq) {
  if (!(kq > 0.0 && kq <= 1.0))
    throw ConfigError("keep probability must be in (0, 1], got " + std::to_string(kq));
}

double unitInterval(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

}  // namespace

bool applyKeepProbability(std::uint64_t& state, double kq) {
  checkKq(kq);
  state += 0x9e3779b97f4a7c15ULL;
  return unitInterval(mix64(state)) < kq;
}

KeepSampler::KeepSampler(double kq, std::uint64_t seed) : kq_(kq), seed_(seed) {
  checkKq(kq);
}

bool KeepSampler::keep(EdgeId edge, std::size_t query) const noexcept {
  if (kq_ >= 1.0) return true;
  std::uint64_t h = mix64(seed_ ^ mix64(edge + 0x9e3779b97f4a7c15ULL * (query + 1)));
  return unitInterval(h) < kq_;
}

}  // namespace tstream
