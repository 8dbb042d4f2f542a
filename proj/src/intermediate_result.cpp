#include "tstream/intermediate_result.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace tstream {

bool EdgeRequest::wellFormed() const noexcept {
  return (source || target) && std::isfinite(window.lo) &&
         std::isfinite(window.hi) && window.lo <= window.hi;
}

IntermediateResult::IntermediateResult(
    std::shared_ptr<const query::QueryPlan> plan, const TemporalEdge& first)
    : plan_(std::move(plan)) {
  if (!plan_) throw std::invalid_argument("null plan");
  edges_.reserve(plan_->size());
  edges_.push_back(first);
  expiry_ = first.startTime + plan_->maxExtent();
}

std::vector<EdgeId> IntermediateResult::edgeIds() const {
  std::vector<EdgeId> ids;
  ids.reserve(edges_.size());
  for (const auto& e : edges_) ids.push_back(e.id);
  return ids;
}

std::optional<VertexId> IntermediateResult::nextSource() const {
  const auto& s = plan_->step(edges_.size());
  if (!s.sourceBound) return std::nullopt;
  return plan_->variableValue(s.sourceVar, edges_);
}

std::optional<VertexId> IntermediateResult::nextTarget() const {
  const auto& s = plan_->step(edges_.size());
  if (!s.targetBound) return std::nullopt;
  return plan_->variableValue(s.targetVar, edges_);
}

IndexMode IntermediateResult::nextMode() const {
  const auto& s = plan_->step(edges_.size());
  if (s.sourceBound && s.targetBound) return IndexMode::Both;
  return s.sourceBound ? IndexMode::Source : IndexMode::Target;
}

query::TimeWindow IntermediateResult::nextWindow() const {
  const std::size_t step = edges_.size();
  query::TimeWindow w{-std::numeric_limits<double>::infinity(),
                      std::numeric_limits<double>::infinity()};
  for (std::size_t j = 0; j < step; ++j) {
    auto pw = plan_->window(step, j);
    w.lo = std::max(w.lo, edges_[j].startTime + pw.lo);
    w.hi = std::min(w.hi, edges_[j].startTime + pw.hi);
  }
  return w;
}

IntermediateResult IntermediateResult::extend(const TemporalEdge& e) const {
  IntermediateResult r;
  r.plan_ = plan_;
  r.edges_.reserve(plan_->size());
  r.edges_ = edges_;
  r.edges_.push_back(e);
  r.expiry_ = expiry_;
  return r;
}

EdgeRequest IntermediateResult::request(WorkerId requester) const {
  EdgeRequest req;
  req.source = nextSource();
  req.target = nextTarget();
  req.window = nextWindow();
  req.requester = requester;
  req.expiry = req.window.hi;
  req.queryId = plan_->id();
  req.step = static_cast<std::uint32_t>(edges_.size());
  return req;
}

std::map<std::string, VertexId> IntermediateResult::binding() const {
  std::map<std::string, VertexId> out;
  const auto& vars = plan_->variables();
  for (std::size_t v = 0; v < vars.size(); ++v)
    if (vars[v].step < edges_.size())
      out[vars[v].name] = plan_->variableValue(v, edges_);
  return out;
}

bool IntermediateResult::extendedWith(EdgeId id) const noexcept {
  return std::find(extended_.begin(), extended_.end(), id) != extended_.end();
}

std::string formatMatch(const IntermediateResult& r) {
  std::string out;
  for (const auto& e : r.edges()) {
    if (!out.empty()) out += '\t';
    out += formatEdge(e);
  }
  return out;
}

}  // namespace tstream
