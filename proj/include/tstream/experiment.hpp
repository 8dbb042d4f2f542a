#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "tstream/graph_store.hpp"
#include "tstream/membership.hpp"
#include "tstream/query_plan.hpp"

namespace tstream::bench {

inline constexpr const char* kTriangleQuery = R"({
  x1 e1 x2;
  x2 e2 x3;
  x3 e3 x1;
  starttime(e3) - starttime(e1) <= 10;
  starttime(e1) < starttime(e2);
  starttime(e2) < starttime(e3);
})";

struct ExperimentConfig {
  std::size_t workerCount = 1;
  std::size_t vertexCount = 5000;
  std::size_t edgesPerWorker = 2'500'000;
  double ratePerWorker = 1000.0;
  std::uint64_t seed = 0;
  /// "deterministic" or "delayed".
  std::string transport = "deterministic";
  double keepProbability = 1.0;
  /// Empty means the triangle query.
  std::string queryFile;
  /// Set name -> file of vertex names, for `in` / `not in`.
  std::map<std::string, std::string> setFiles;
  bool injective = false;
  std::string jsonPath;

  double maxLatency = 0.0;
  double dropProbability = 0.0;
  /// Keeping pace means wall <= edgesPerWorker / ratePerWorker + slack.
  double slackSeconds = 15.0;
  double maxDuration = 1.0;
  bool withOracle = false;
  std::size_t consumeThreads = 1;
  std::size_t pullWorkers = 2;
  StoreConfig store{std::size_t{1} << 14, std::size_t{1} << 18, std::size_t{1} << 14};

  static const std::vector<std::string>& transports();
  /// Throws ConfigError.
  void validate() const;
  double idealSeconds() const { return edgesPerWorker / ratePerWorker; }
};

struct WorkerReport {
  std::uint32_t worker = 0;
  StoreMetrics metrics;
  std::uint64_t matches = 0;
};

struct QueryReport {
  std::string id;
  std::uint64_t emitted = 0;
  std::uint64_t distinct = 0;
  std::optional<std::uint64_t> expected;
  std::optional<std::uint64_t> valid;
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<WorkerReport> workers;
  std::vector<QueryReport> queries;
  std::uint64_t edgesIngested = 0;
  std::uint64_t matchesEmitted = 0;
  std::uint64_t duplicateMatches = 0;
  std::uint64_t messagesDropped = 0;
  std::optional<std::uint64_t> expectedMatches;
  std::optional<double> recall;
  std::optional<double> precision;
  double wallSeconds = 0.0;
  double idealSeconds = 0.0;
  double throughput = 0.0;
  bool keepingPace = false;
  bool interrupted = false;
};

/// Plans for the config's query file (or the triangle), sets resolved.
std::vector<std::shared_ptr<const query::QueryPlan>> loadPlans(const ExperimentConfig& config);

std::shared_ptr<MembershipRegistry> loadSets(const std::map<std::string, std::string>& files);

ExperimentReport runExperiment(const ExperimentConfig& config);
ExperimentReport runExperiment(
    const ExperimentConfig& config,
    const std::vector<std::shared_ptr<const query::QueryPlan>>& plans);

struct RateSearch {
  std::vector<ExperimentReport> trials;
  /// Highest tried rate that kept pace; 0 when none did.
  double maxRate = 0.0;
};

/// Tries startRate, startRate * factor, ... until a run falls behind.
RateSearch findMaxRate(ExperimentConfig config,
                       const std::vector<std::shared_ptr<const query::QueryPlan>>& plans,
                       double startRate, double factor = 2.0, std::size_t maxSteps = 16);

/// Asks running experiments to stop feeding edges; the report is still built.
void requestStop();
void clearStop();

nlohmann::json toJson(const ExperimentConfig& config);
nlohmann::json toJson(const ExperimentReport& report);
nlohmann::json toJson(const RateSearch& search);
std::string formatTable(const ExperimentReport& report);

}  // namespace tstream::bench
