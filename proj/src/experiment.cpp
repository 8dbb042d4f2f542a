#include "tstream/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "tstream/cluster.hpp"
#include "tstream/ingest.hpp"
#include "tstream/keep.hpp"
#include "tstream/sal_parser.hpp"

namespace tstream::bench {

namespace {

std::atomic<bool> g_stop{false};

using Clock = std::chrono::steady_clock;

double seconds(Clock::duration d) { return std::chrono::duration<double>(d).count(); }

}  // namespace

void requestStop() { g_stop.store(true); }
void clearStop() { g_stop.store(false); }

const std::vector<std::string>& ExperimentConfig::transports() {
  static const std::vector<std::string> names{"deterministic", "delayed"};
  return names;
}

void ExperimentConfig::validate() const {
  if (workerCount == 0) throw ConfigError("worker count must be positive");
  if (vertexCount < 2) throw ConfigError("|V| must be at least 2");
  if (edgesPerWorker == 0) throw ConfigError("edges per worker must be positive");
  if (!(ratePerWorker > 0.0) || !std::isfinite(ratePerWorker))
    throw ConfigError("rate per worker must be positive");
  if (!(keepProbability > 0.0 && keepProbability <= 1.0))
    throw ConfigError("kq must satisfy 0 < kq <= 1");
  const auto& t = transports();
  if (std::find(t.begin(), t.end(), transport) == t.end())
    throw ConfigError("unknown transport '" + transport + "'");
  if (!(maxLatency >= 0.0)) throw ConfigError("latency must be >= 0");
  if (!(dropProbability >= 0.0 && dropProbability < 1.0))
    throw ConfigError("drop probability must be in [0, 1)");
  if (!(slackSeconds >= 0.0)) throw ConfigError("slack must be >= 0");
  if (consumeThreads == 0 || pullWorkers == 0)
    throw ConfigError("pool sizes must be positive");
  if (transport == "deterministic" && (maxLatency > 0 || dropProbability > 0))
    throw ConfigError("latency and drops need the delayed transport");
}

std::shared_ptr<MembershipRegistry> loadSets(const std::map<std::string, std::string>& files) {
  auto reg = std::make_shared<MembershipRegistry>();
  for (const auto& [name, path] : files) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read set file " + path);
    std::unordered_set<VertexId> members;
    std::string line;
    while (std::getline(in, line)) {
      auto b = line.find_first_not_of(" \t\r");
      if (b == std::string::npos || line[b] == '#') continue;
      auto e = line.find_last_not_of(" \t\r");
      members.insert(VertexId::intern(line.substr(b, e - b + 1)));
    }
    reg->add(name, std::make_shared<StaticVertexSet>(std::move(members)));
  }
  return reg;
}

std::vector<std::shared_ptr<const query::QueryPlan>> loadPlans(const ExperimentConfig& config) {
  query::PlanOptions o;
  o.injective = config.injective;
  o.sets = loadSets(config.setFiles);
  std::string text = kTriangleQuery;
  o.id = "triangle";
  if (!config.queryFile.empty()) {
    std::ifstream in(config.queryFile);
    if (!in) throw ConfigError("cannot read query file " + config.queryFile);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    o.id = std::filesystem::path(config.queryFile).stem().string();
  }
  auto program = sal::parseProgram(text);
  return {std::make_shared<const query::QueryPlan>(query::plan(program.subgraph.query, o))};
}

ExperimentReport runExperiment(const ExperimentConfig& config) {
  config.validate();
  return runExperiment(config, loadPlans(config));
}

ExperimentReport runExperiment(
    const ExperimentConfig& config,
    const std::vector<std::shared_ptr<const query::QueryPlan>>& plans) {
  config.validate();
  const std::size_t W = config.workerCount;

  ingest::GeneratorConfig g;
  g.vertexPoolSize = config.vertexCount;
  g.edgesPerWorker = config.edgesPerWorker;
  g.ratePerWorker = config.ratePerWorker;
  g.seed = config.seed;
  g.workerCount = W;
  g.maxDuration = config.maxDuration;
  std::vector<std::vector<TemporalEdge>> streams(W);
  for (std::size_t w = 0; w < W; ++w) streams[w] = ingest::generate(g, w);

  ClusterOptions o;
  o.workerCount = W;
  o.store = config.store;
  o.store.keepProbability = config.keepProbability;
  o.store.seed = config.seed;
  o.comm.pullWorkerCount = config.pullWorkers;
  o.deterministic = config.transport == "deterministic";
  o.delay.maxLatency = config.maxLatency;
  o.delay.dropProbability = config.dropProbability;
  o.delay.seed = config.seed;
  o.consumeThreads = config.consumeThreads;
  o.seed = config.seed;

  ExperimentReport r;
  r.config = config;
  r.idealSeconds = config.idealSeconds();

  std::vector<TemporalEdge> all;
  for (const auto& s : streams) all.insert(all.end(), s.begin(), s.end());

  Cluster cluster(o, plans);
  std::atomic<std::uint64_t> ingested{0};
  const auto t0 = Clock::now();
  if (o.deterministic) {
    std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
      return a.startTime < b.startTime;
    });
    for (const auto& e : all) {
      if (g_stop.load(std::memory_order_relaxed)) break;
      cluster.ingest(e);
      ++ingested;
    }
  } else {
    std::vector<std::thread> producers;
    for (std::size_t w = 0; w < W; ++w) {
      producers.emplace_back([&, w] {
        for (const auto& e : streams[w]) {
          if (g_stop.load(std::memory_order_relaxed)) break;
          auto due = t0 + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(e.startTime));
          if (due > Clock::now() + std::chrono::milliseconds(1))
            std::this_thread::sleep_until(due);
          cluster.ingest(e);
          ingested.fetch_add(1, std::memory_order_relaxed);
        }
      });
    }
    for (auto& p : producers) p.join();
  }
  cluster.drain();
  r.wallSeconds = seconds(Clock::now() - t0);
  r.interrupted = g_stop.load();

  r.edgesIngested = ingested.load();
  r.throughput = r.wallSeconds > 0 ? r.edgesIngested / r.wallSeconds : 0.0;
  r.keepingPace = !r.interrupted && r.wallSeconds <= r.idealSeconds + config.slackSeconds;
  r.messagesDropped = cluster.networkDropped();

  auto perWorker = cluster.matches().perWorker();
  for (WorkerId w = 0; w < W; ++w)
    r.workers.push_back({w, cluster.metrics(w), perWorker[w]});
  r.matchesEmitted = cluster.matches().size();
  r.duplicateMatches = cluster.matches().duplicates();

  auto got = cluster.matches().byQuery();
  std::map<std::string, std::uint64_t> emitted;
  for (const auto& e : cluster.matches().entries()) ++emitted[e.query];
  std::map<std::string, oracle::MatchSet> expected;
  if (config.withOracle) {
    expected = expectedMatches(plans, all, config.keepProbability, config.seed);
  }
  std::uint64_t expectedTotal = 0, validTotal = 0, distinctTotal = 0;
  for (const auto& p : plans) {
    QueryReport q;
    q.id = p->id();
    q.emitted = emitted[q.id];
    q.distinct = got[q.id].size();
    distinctTotal += q.distinct;
    if (config.withOracle) {
      const auto& want = expected[q.id];
      std::uint64_t valid = 0;
      for (const auto& m : got[q.id]) valid += want.count(m);
      q.expected = want.size();
      q.valid = valid;
      expectedTotal += want.size();
      validTotal += valid;
    }
    r.queries.push_back(q);
  }
  if (config.withOracle && !r.interrupted) {
    r.expectedMatches = expectedTotal;
    r.recall = expectedTotal ? static_cast<double>(validTotal) / expectedTotal : 1.0;
    r.precision = distinctTotal ? static_cast<double>(validTotal) / distinctTotal : 1.0;
  }
  return r;
}

RateSearch findMaxRate(ExperimentConfig config,
                       const std::vector<std::shared_ptr<const query::QueryPlan>>& plans,
                       double startRate, double factor, std::size_t maxSteps) {
  if (!(startRate > 0) || !(factor > 1)) throw ConfigError("rate grid must grow");
  RateSearch s;
  double rate = startRate;
  for (std::size_t k = 0; k < maxSteps; ++k, rate *= factor) {
    config.ratePerWorker = rate;
    s.trials.push_back(runExperiment(config, plans));
    const auto& t = s.trials.back();
    if (t.interrupted || !t.keepingPace) break;
    s.maxRate = rate;
  }
  return s;
}

nlohmann::json toJson(const ExperimentConfig& c) {
  nlohmann::json sets = nlohmann::json::object();
  for (const auto& [k, v] : c.setFiles) sets[k] = v;
  return {{"worker_count", c.workerCount},
          {"vertex_count", c.vertexCount},
          {"edges_per_worker", c.edgesPerWorker},
          {"rate_per_worker", c.ratePerWorker},
          {"seed", c.seed},
          {"transport", c.transport},
          {"kq", c.keepProbability},
          {"query_file", c.queryFile},
          {"sets", sets},
          {"injective", c.injective},
          {"max_latency", c.maxLatency},
          {"drop_probability", c.dropProbability},
          {"slack_seconds", c.slackSeconds},
          {"max_duration", c.maxDuration},
          {"with_oracle", c.withOracle},
          {"consume_threads", c.consumeThreads},
          {"pull_workers", c.pullWorkers}};
}

namespace {

nlohmann::json metricsJson(const StoreMetrics& m) {
  return {{"edges_consumed", m.edgesConsumed},
          {"remote_edges_received", m.remoteEdgesReceived},
          {"requests_received", m.requestsReceived},
          {"requests_stored", m.requestsStored},
          {"requests_sent", m.requestsSent},
          {"edges_forwarded", m.edgesForwarded},
          {"results_created", m.resultsCreated},
          {"results_expired", m.resultsExpired},
          {"requests_expired", m.requestsExpired},
          {"matches_emitted", m.matchesEmitted},
          {"first_edges_suppressed", m.firstEdgesSuppressed},
          {"messages_dropped", m.messagesDropped}};
}

template <class T>
nlohmann::json optional(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

}  // namespace

nlohmann::json toJson(const ExperimentReport& r) {
  nlohmann::json workers = nlohmann::json::array();
  for (const auto& w : r.workers)
    workers.push_back({{"worker", w.worker}, {"matches", w.matches},
                       {"metrics", metricsJson(w.metrics)}});
  nlohmann::json queries = nlohmann::json::array();
  for (const auto& q : r.queries)
    queries.push_back({{"id", q.id}, {"emitted", q.emitted}, {"distinct", q.distinct},
                       {"expected", optional(q.expected)}, {"valid", optional(q.valid)}});
  return {{"config", toJson(r.config)},
          {"workers", workers},
          {"queries", queries},
          {"aggregate",
           {{"edges_ingested", r.edgesIngested},
            {"matches_emitted", r.matchesEmitted},
            {"duplicate_matches", r.duplicateMatches},
            {"messages_dropped", r.messagesDropped},
            {"expected_matches", optional(r.expectedMatches)},
            {"recall", optional(r.recall)},
            {"precision", optional(r.precision)},
            {"wall_seconds", r.wallSeconds},
            {"ideal_seconds", r.idealSeconds},
            {"throughput", r.throughput},
            {"keeping_pace", r.keepingPace},
            {"interrupted", r.interrupted}}}};
}

nlohmann::json toJson(const RateSearch& s) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : s.trials) trials.push_back(toJson(t));
  return {{"max_rate_per_worker", s.maxRate}, {"trials", trials}};
}

std::string formatTable(const ExperimentReport& r) {
  std::ostringstream os;
  os << std::left << std::setw(8) << "worker" << std::right << std::setw(12) << "consumed"
     << std::setw(12) << "remote" << std::setw(12) << "requests" << std::setw(12)
     << "results" << std::setw(12) << "matches" << '\n';
  for (const auto& w : r.workers)
    os << std::left << std::setw(8) << w.worker << std::right << std::setw(12)
       << w.metrics.edgesConsumed << std::setw(12) << w.metrics.remoteEdgesReceived
       << std::setw(12) << w.metrics.requestsSent << std::setw(12)
       << w.metrics.resultsCreated << std::setw(12) << w.matches << '\n';
  os << std::fixed << std::setprecision(3);
  os << "edges ingested   " << r.edgesIngested << '\n'
     << "matches emitted  " << r.matchesEmitted << " (" << r.duplicateMatches
     << " duplicates)\n";
  if (r.expectedMatches)
    os << "oracle expected  " << *r.expectedMatches << '\n'
       << "recall           " << *r.recall << '\n'
       << "precision        " << *r.precision << '\n';
  os << "wall seconds     " << r.wallSeconds << " (ideal " << r.idealSeconds << ")\n"
     << "throughput       " << std::setprecision(1) << r.throughput << " edges/s\n"
     << "keeping pace     " << (r.keepingPace ? "yes" : "no")
     << (r.interrupted ? " (interrupted)" : "") << '\n';
  return os.str();
}

}  // namespace tstream::bench
