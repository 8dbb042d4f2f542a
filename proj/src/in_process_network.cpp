#include <algorithm>

#include "tstream/comms.hpp"

namespace tstream::comms {

std::shared_ptr<InProcessNetwork> InProcessNetwork::deterministic(
    std::uint64_t seed, std::shared_ptr<ActivityCounter> activity) {
  DelayModel model;
  model.seed = seed;
  return std::shared_ptr<InProcessNetwork>(
      new InProcessNetwork(true, model, std::move(activity)));
}

std::shared_ptr<InProcessNetwork> InProcessNetwork::delayed(
    DelayModel model, std::shared_ptr<ActivityCounter> activity) {
  if (!(model.maxLatency >= 0.0))
    throw CommError(CommErrorKind::InvalidConfig, "latency must be >= 0");
  if (!(model.dropProbability >= 0.0 && model.dropProbability <= 1.0))
    throw CommError(CommErrorKind::InvalidConfig, "drop probability must be in [0, 1]");
  return std::shared_ptr<InProcessNetwork>(
      new InProcessNetwork(false, model, std::move(activity)));
}

InProcessNetwork::InProcessNetwork(bool deterministic, DelayModel model,
                                   std::shared_ptr<ActivityCounter> activity)
    : deterministic_(deterministic),
      model_(model),
      activity_(activity ? std::move(activity) : std::make_shared<ActivityCounter>()),
      rng_(model.seed) {
  if (!deterministic_) scheduler_ = std::thread([this] { schedule(); });
}

InProcessNetwork::~InProcessNetwork() {
  {
    std::lock_guard lock(mutex_);
    stopping_ = true;
  }
  wake_.notify_all();
  if (scheduler_.joinable()) scheduler_.join();
  std::map<std::pair<std::string, WorkerId>, std::shared_ptr<Endpoint>> endpoints;
  {
    std::lock_guard lock(endpointsMutex_);
    endpoints.swap(endpoints_);
  }
  for (auto& [key, ep] : endpoints)
    if (ep->pool) ep->pool->stop();
}

void InProcessNetwork::attach(const std::string& channel, WorkerId self,
                              std::size_t pullWorkers, Handler handler) {
  auto ep = std::make_shared<Endpoint>();
  ep->handler = handler;
  if (!deterministic_)
    ep->pool = std::make_unique<PullPool>(pullWorkers, std::move(handler), activity_);
  std::lock_guard lock(endpointsMutex_);
  endpoints_[{channel, self}] = std::move(ep);
}

void InProcessNetwork::detach(const std::string& channel, WorkerId self) {
  std::shared_ptr<Endpoint> ep;
  {
    std::lock_guard lock(endpointsMutex_);
    auto it = endpoints_.find({channel, self});
    if (it == endpoints_.end()) return;
    ep = std::move(it->second);
    endpoints_.erase(it);
  }
  if (ep->pool) dropped_.fetch_add(ep->pool->stop());
}

void InProcessNetwork::deliver(const std::string& channel, WorkerId from,
                               WorkerId to, std::size_t pushChannel, Bytes message) {
  std::unique_lock lock(mutex_);
  if (deterministic_) {
    QueueKey key{channel, from, to, pushChannel};
    auto& q = queues_[key];
    if (q.empty()) active_.push_back(key);
    q.push_back(std::move(message));
    activity_->begin();
    return;
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (model_.dropProbability > 0.0 && unit(rng_) < model_.dropProbability) {
    dropped_.fetch_add(1);
    return;
  }
  double latency = model_.maxLatency > 0.0 ? unit(rng_) * model_.maxLatency : 0.0;
  Pending p{std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(latency)),
            seq_++, channel, to, std::move(message)};
  heap_.push_back(std::move(p));
  std::push_heap(heap_.begin(), heap_.end(), Later{});
  activity_->begin();
  lock.unlock();
  wake_.notify_one();
}

void InProcessNetwork::dispatch(const std::string& channel, WorkerId to,
                                Bytes message) {
  std::shared_ptr<Endpoint> ep;
  {
    std::lock_guard lock(endpointsMutex_);
    auto it = endpoints_.find({channel, to});
    if (it != endpoints_.end()) ep = it->second;
  }
  if (!ep) {
    dropped_.fetch_add(1);
    activity_->end();
    return;
  }
  delivered_.fetch_add(1);
  if (ep->pool) {
    ep->pool->push(std::move(message));
    return;
  }
  try {
    ep->handler(message);
  } catch (...) {
    activity_->end();
    throw;
  }
  activity_->end();
}

void InProcessNetwork::schedule() {
  std::unique_lock lock(mutex_);
  for (;;) {
    if (stopping_) {
      std::size_t n = heap_.size();
      heap_.clear();
      if (n) {
        dropped_.fetch_add(n);
        activity_->end(n);
      }
      return;
    }
    if (heap_.empty()) {
      wake_.wait(lock);
      continue;
    }
    auto due = heap_.front().due;
    if (std::chrono::steady_clock::now() < due) {
      wake_.wait_until(lock, due);
      continue;
    }
    std::pop_heap(heap_.begin(), heap_.end(), Later{});
    Pending p = std::move(heap_.back());
    heap_.pop_back();
    lock.unlock();
    dispatch(p.channel, p.to, std::move(p.message));
    lock.lock();
  }
}

void InProcessNetwork::drain() {
  if (!deterministic_) {
    activity_->waitIdle();
    return;
  }
  for (;;) {
    std::string channel;
    WorkerId to;
    Bytes msg;
    {
      std::lock_guard lock(mutex_);
      if (active_.empty()) return;
      std::size_t pick =
          std::uniform_int_distribution<std::size_t>(0, active_.size() - 1)(rng_);
      const QueueKey key = active_[pick];
      auto& q = queues_[key];
      msg = std::move(q.front());
      q.pop_front();
      if (q.empty()) {
        active_[pick] = active_.back();
        active_.pop_back();
      }
      channel = key.channel;
      to = key.to;
    }
    dispatch(channel, to, std::move(msg));
  }
}

}  // namespace tstream::comms
