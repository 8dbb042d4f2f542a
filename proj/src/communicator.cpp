#include <algorithm>

#include "tstream/comms.hpp"

namespace tstream::comms {

void ActivityCounter::begin(std::size_t n) {
  std::lock_guard lock(mutex_);
  count_ += n;
}

void ActivityCounter::end(std::size_t n) {
  std::lock_guard lock(mutex_);
  count_ -= std::min(n, count_);
  if (count_ == 0) idle_.notify_all();
}

void ActivityCounter::waitIdle() {
  std::unique_lock lock(mutex_);
  idle_.wait(lock, [&] { return count_ == 0; });
}

std::size_t ActivityCounter::pending() const {
  std::lock_guard lock(mutex_);
  return count_;
}

PullPool::PullPool(std::size_t threads, Handler handler,
                   std::shared_ptr<ActivityCounter> activity)
    : handler_(std::move(handler)), activity_(std::move(activity)) {
  threads_.reserve(threads);
  for (std::size_t i = 0; i < threads; ++i) threads_.emplace_back([this] { run(); });
}

PullPool::~PullPool() { stop(); }

void PullPool::push(Bytes message) {
  {
    std::lock_guard lock(mutex_);
    inbox_.push_back(std::move(message));
  }
  ready_.notify_one();
}

std::size_t PullPool::stop() {
  {
    std::lock_guard lock(mutex_);
    if (stopping_ && threads_.empty()) return 0;
    stopping_ = true;
  }
  ready_.notify_all();
  for (auto& t : threads_)
    if (t.joinable()) t.join();
  threads_.clear();
  std::lock_guard lock(mutex_);
  std::size_t discarded = inbox_.size();
  inbox_.clear();
  if (discarded && activity_) activity_->end(discarded);
  return discarded;
}

void PullPool::run() {
  for (;;) {
    Bytes msg;
    {
      std::unique_lock lock(mutex_);
      ready_.wait(lock, [&] { return stopping_ || !inbox_.empty(); });
      if (stopping_) return;
      msg = std::move(inbox_.front());
      inbox_.pop_front();
    }
    try {
      handler_(msg);
    } catch (...) {
      // Handlers report their own failures; a throwing handler must not
      // take the pull worker down.
    }
    if (activity_) activity_->end();
  }
}

Communicator::Communicator(WorkerId self, std::vector<WorkerId> peers,
                           CommConfig config, std::shared_ptr<Transport> transport,
                           std::string channel)
    : self_(self),
      config_(config),
      transport_(std::move(transport)),
      channel_(std::move(channel)),
      rng_(config.seed ^ (static_cast<std::uint64_t>(self) << 32)) {
  if (config_.pushChannelsPerPeer < 1)
    throw CommError(CommErrorKind::InvalidConfig, "pushChannelsPerPeer must be >= 1");
  if (config_.pullWorkerCount < 1)
    throw CommError(CommErrorKind::InvalidConfig, "pullWorkerCount must be >= 1");
  if (!transport_) throw CommError(CommErrorKind::InvalidConfig, "null transport");
  for (WorkerId p : peers)
    if (p != self_ && std::find(peers_.begin(), peers_.end(), p) == peers_.end())
      peers_.push_back(p);
  std::sort(peers_.begin(), peers_.end());
  counts_.assign(peers_.size() * config_.pushChannelsPerPeer, 0);
}

Communicator::~Communicator() {
  if (started()) stop();
}

void Communicator::registerCallback(Handler handler) {
  if (state_.load() == State::Running)
    throw CommError(CommErrorKind::AlreadyStarted, "callback must be set before start");
  handler_ = std::move(handler);
}

void Communicator::start() {
  if (state_.load() == State::Running)
    throw CommError(CommErrorKind::AlreadyStarted, "communicator already started");
  if (!handler_) throw CommError(CommErrorKind::NoCallback, "no callback registered");
  transport_->attach(channel_, self_, config_.pullWorkerCount, handler_);
  state_.store(State::Running);
}

void Communicator::stop() {
  State s = state_.load();
  if (s == State::Idle)
    throw CommError(CommErrorKind::NotStarted, "communicator was never started");
  if (s == State::Stopped) return;
  state_.store(State::Stopped);
  transport_->detach(channel_, self_);
}

std::size_t Communicator::peerIndex(WorkerId w) const {
  auto it = std::lower_bound(peers_.begin(), peers_.end(), w);
  if (it == peers_.end() || *it != w)
    throw CommError(CommErrorKind::UnknownPeer,
                    "worker " + std::to_string(w) + " is not a peer");
  return static_cast<std::size_t>(it - peers_.begin());
}

void Communicator::send(WorkerId destination, Bytes message) {
  if (destination == self_)
    throw CommError(CommErrorKind::SendToSelf, "cannot send to self");
  const std::size_t peer = peerIndex(destination);
  if (!started()) throw CommError(CommErrorKind::NotStarted, "communicator not started");
  std::size_t channel;
  {
    std::lock_guard lock(rngMutex_);
    channel = std::uniform_int_distribution<std::size_t>(
        0, config_.pushChannelsPerPeer - 1)(rng_);
    ++counts_[peer * config_.pushChannelsPerPeer + channel];
  }
  sent_.fetch_add(1);
  transport_->deliver(channel_, self_, destination, channel, std::move(message));
}

void Communicator::drain() { transport_->drain(); }

std::vector<std::uint64_t> Communicator::channelCounts(WorkerId peer) const {
  const std::size_t p = peerIndex(peer);
  std::lock_guard lock(rngMutex_);
  auto first = counts_.begin() + static_cast<std::ptrdiff_t>(p * config_.pushChannelsPerPeer);
  return {first, first + static_cast<std::ptrdiff_t>(config_.pushChannelsPerPeer)};
}

}  // namespace tstream::comms
