#include <algorithm>
#include <csignal>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"
#include "tstream/cluster.hpp"
#include "tstream/experiment.hpp"
#include "tstream/ingest.hpp"
#include "tstream/keep.hpp"
#include "tstream/sal_parser.hpp"

using namespace tstream;

namespace {

enum Exit { kOk = 0, kSyntax = 1, kConfig = 2, kRecall = 3 };

std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> parseSets(const std::vector<std::string>& specs) {
  std::map<std::string, std::string> out;
  for (const auto& s : specs) {
    auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size())
      throw ConfigError("--set expects NAME=FILE, got '" + s + "'");
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

std::shared_ptr<const query::QueryPlan> planFromFile(const std::string& path, bool injective,
                                                      const std::vector<std::string>& sets) {
  bench::ExperimentConfig c;
  c.queryFile = path;
  c.injective = injective;
  c.setFiles = parseSets(sets);
  return bench::loadPlans(c).front();
}

void printMatch(std::ostream& os, const std::string& query, const oracle::Match& m) {
  os << query << ':';
  for (std::size_t i = 0; i < m.size(); ++i) os << (i ? "," : "") << m[i];
  os << '\n';
}

void onSignal(int) { bench::requestStop(); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Streaming temporal subgraph matching"};
  app.require_subcommand(1);

  std::string queryPath, edgesPath, jsonPath, outPath;
  std::vector<std::string> sets;
  bool injective = false, print = false;

  auto* parse = app.add_subcommand("parse", "Parse a SAL program and dump its plan");
  parse->add_option("file", queryPath, "SAL file")->required();

  auto* oracleCmd = app.add_subcommand("oracle", "Enumerate matches of a query over an edge file");
  oracleCmd->add_option("--query", queryPath, "SAL file")->required();
  oracleCmd->add_option("--edges", edgesPath, "netflow CSV")->required();
  oracleCmd->add_option("--set", sets, "NAME=FILE vertex set");
  oracleCmd->add_flag("--injective", injective, "distinct variables bind distinct vertices");
  oracleCmd->add_flag("--print", print, "print every match");

  std::size_t runWorkers = 1;
  int port = -1;
  double runKq = 1.0;
  std::uint64_t runSeed = 0;
  auto* run = app.add_subcommand("run", "Run one query over a file or socket stream");
  run->add_option("--query", queryPath, "SAL file")->required();
  auto* edgesOpt = run->add_option("--edges", edgesPath, "netflow CSV");
  run->add_option("--port", port, "listen for netflow lines on this TCP port")
      ->excludes(edgesOpt);
  run->add_option("--workers", runWorkers, "in-process workers")->check(CLI::PositiveNumber);
  run->add_option("--kq", runKq, "keep probability for first edges");
  run->add_option("--seed", runSeed, "seed");
  run->add_option("--set", sets, "NAME=FILE vertex set");
  run->add_flag("--injective", injective, "distinct variables bind distinct vertices");

  bench::ExperimentConfig cfg;
  std::uint64_t seed = 0;
  double assertRecall = -1;
  bool findMax = false;
  double rateFactor = 2.0;
  std::size_t maxSteps = 16;
  auto* benchCmd = app.add_subcommand("bench", "Run a generated-stream experiment");
  benchCmd->add_option("--seed", seed, "seed")->required();
  benchCmd->add_option("--workers", cfg.workerCount, "worker count");
  benchCmd->add_option("--vertices", cfg.vertexCount, "|V|");
  benchCmd->add_option("--edges-per-worker", cfg.edgesPerWorker, "edges per worker");
  benchCmd->add_option("--rate", cfg.ratePerWorker, "edges per second per worker");
  benchCmd->add_option("--transport", cfg.transport, "deterministic | delayed");
  benchCmd->add_option("--kq", cfg.keepProbability, "keep probability for first edges");
  benchCmd->add_option("--query", cfg.queryFile, "SAL file (default: triangle)");
  benchCmd->add_option("--set", sets, "NAME=FILE vertex set");
  benchCmd->add_flag("--injective", cfg.injective, "distinct variables bind distinct vertices");
  benchCmd->add_option("--latency", cfg.maxLatency, "max uniform message latency, seconds");
  benchCmd->add_option("--drop", cfg.dropProbability, "message drop probability");
  benchCmd->add_option("--slack", cfg.slackSeconds, "keeping-pace allowance, seconds");
  benchCmd->add_option("--max-duration", cfg.maxDuration, "edge durations in [0, this)");
  benchCmd->add_option("--consume-threads", cfg.consumeThreads, "consume threads per worker");
  benchCmd->add_option("--pull-workers", cfg.pullWorkers, "pull threads per channel");
  benchCmd->add_option("--result-slots", cfg.store.resultSlots, "result map slots");
  benchCmd->add_flag("--with-oracle", cfg.withOracle, "compare with the oracle");
  benchCmd->add_option("--json", cfg.jsonPath, "write the JSON report here");
  benchCmd->add_flag("--find-max-rate", findMax, "raise the rate until the run falls behind");
  benchCmd->add_option("--rate-factor", rateFactor, "rate grid factor");
  benchCmd->add_option("--max-steps", maxSteps, "rate grid length");
  benchCmd->add_option("--assert-recall", assertRecall, "exit 3 if recall is below this");

  ingest::GeneratorConfig gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic netflow CSV");
  generate->add_option("--vertices", gen.vertexPoolSize, "|V|");
  generate->add_option("--edges", gen.edgesPerWorker, "edges per worker");
  generate->add_option("--rate", gen.ratePerWorker, "edges per second per worker");
  generate->add_option("--workers", gen.workerCount, "worker streams to merge");
  generate->add_option("--seed", gen.seed, "seed");
  generate->add_option("--out", outPath, "output file (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfig;
  }

  try {
    if (*parse) {
      auto program = sal::parseProgram(readFile(queryPath));
      for (const auto& w : program.warnings)
        std::cerr << w.line << ':' << w.column << ": warning: " << w.message << '\n';
      std::cout << sal::print(program) << '\n';
      query::PlanOptions o;
      auto placeholders = std::make_shared<MembershipRegistry>();
      for (const auto& vc : program.subgraph.query.vertexConstraints)
        placeholders->add(vc.setName, std::make_shared<StaticVertexSet>());
      o.sets = placeholders;
      std::cout << query::plan(program.subgraph.query, o).describe() << '\n';
      return kOk;
    }

    if (*oracleCmd) {
      auto plan = planFromFile(queryPath, injective, sets);
      auto edges = ingest::readEdgeFile(edgesPath);
      auto matches = oracle::enumerateIndexed(*plan, edges);
      if (print)
        for (const auto& m : matches) printMatch(std::cout, plan->id(), m);
      std::cout << matches.size() << " matches over " << edges.size() << " edges\n";
      return kOk;
    }

    if (*run) {
      if (edgesPath.empty() && port < 0) throw ConfigError("run needs --edges or --port");
      KeepSampler(runKq, runSeed);
      auto plan = planFromFile(queryPath, injective, sets);
      ClusterOptions o;
      o.workerCount = runWorkers;
      o.store = {std::size_t{1} << 14, std::size_t{1} << 18, std::size_t{1} << 14, runKq,
                 runSeed};
      o.seed = runSeed;
      Cluster cluster(o, {plan});
      std::size_t printed = 0;
      auto flush = [&] {
        auto entries = cluster.matches().entries();
        for (; printed < entries.size(); ++printed)
          printMatch(std::cout, entries[printed].query, entries[printed].edges);
        std::cout.flush();
      };
      if (!edgesPath.empty()) {
        cluster.run(ingest::readEdgeFile(edgesPath));
        flush();
      } else {
        ingest::SocketLineSource source(static_cast<std::uint16_t>(port));
        std::cerr << "listening on " << source.port() << '\n';
        std::signal(SIGINT, onSignal);
        std::string line;
        EdgeId next = 0;
        while (source.nextLine(line)) {
          if (line.empty() || line[0] == '#' || line.rfind("time", 0) == 0) continue;
          try {
            cluster.ingest(ingest::toEdge(ingest::parseNetflowLine(line), next++));
          } catch (const ingest::MalformedLine& e) {
            std::cerr << "skipped line: " << e.what() << '\n';
          }
          flush();
        }
        cluster.drain();
        flush();
      }
      std::cerr << cluster.totalMetrics().toText();
      return kOk;
    }

    if (*benchCmd) {
      cfg.seed = seed;
      cfg.setFiles = parseSets(sets);
      cfg.validate();
      auto plans = bench::loadPlans(cfg);
      std::signal(SIGINT, onSignal);
      nlohmann::json json;
      std::optional<double> recall;
      if (findMax) {
        auto s = bench::findMaxRate(cfg, plans, cfg.ratePerWorker, rateFactor, maxSteps);
        for (const auto& t : s.trials) {
          std::cout << "rate " << t.config.ratePerWorker << ": wall " << t.wallSeconds
                    << " s, ideal " << t.idealSeconds << " s, "
                    << (t.keepingPace ? "keeping pace" : "fell behind") << '\n';
          if (t.recall) recall = recall ? std::min(*recall, *t.recall) : *t.recall;
        }
        std::cout << "max rate per worker " << s.maxRate << '\n';
        json = bench::toJson(s);
      } else {
        auto r = bench::runExperiment(cfg, plans);
        std::cout << bench::formatTable(r);
        recall = r.recall;
        json = bench::toJson(r);
      }
      if (!cfg.jsonPath.empty()) {
        std::ofstream out(cfg.jsonPath);
        if (!out) throw ConfigError("cannot write " + cfg.jsonPath);
        out << json.dump(2) << '\n';
      }
      if (assertRecall >= 0) {
        if (!recall) throw ConfigError("--assert-recall needs --with-oracle");
        if (*recall < assertRecall) {
          std::cerr << "recall " << *recall << " below " << assertRecall << '\n';
          return kRecall;
        }
      }
      return kOk;
    }

    if (*generate) {
      gen.validate();
      std::vector<TemporalEdge> all;
      for (std::size_t w = 0; w < gen.workerCount; ++w) {
        auto part = ingest::generate(gen, w);
        all.insert(all.end(), part.begin(), part.end());
      }
      std::stable_sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
        return a.startTime < b.startTime;
      });
      std::ofstream file;
      if (!outPath.empty()) {
        file.open(outPath);
        if (!file) throw ConfigError("cannot write " + outPath);
      }
      std::ostream& os = outPath.empty() ? std::cout : file;
      os << "time,duration,srcIp,dstIp,srcPort,dstPort,protocol\n";
      std::mt19937_64 rng(gen.seed);
      for (const auto& e : all) {
        ingest::NetflowTuple t;
        t.timeSeconds = e.startTime;
        t.durationSeconds = e.duration;
        t.sourceIp = e.source.name();
        t.destIp = e.target.name();
        t.sourcePort = static_cast<int>(1024 + rng() % 64000);
        t.destPort = static_cast<int>(rng() % 1024);
        t.protocol = "TCP";
        os << ingest::formatNetflowLine(t) << '\n';
      }
      return kOk;
    }
  } catch (const sal::SyntaxError& e) {
    std::cerr << e.detail() << '\n';
    return kSyntax;
  } catch (const query::PlanError& e) {
    std::cerr << "query: " << e.what() << '\n';
    return kSyntax;
  } catch (const ingest::MalformedLine& e) {
    std::cerr << e.what() << '\n';
    return kSyntax;
  } catch (const ConfigError& e) {
    std::cerr << "config: " << e.what() << '\n';
    return kConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfig;
  }
  return kOk;
}
