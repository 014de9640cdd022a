#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "oracle_loop/bench.hpp"
#include "oracle_loop/error.hpp"
#include "oracle_loop/service.hpp"
#include "oracle_loop/session.hpp"

using namespace oracle_loop;

namespace {

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

std::vector<std::string> splitCommas(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

template <typename T, typename Parse>
std::vector<T> parseList(const std::string& text, Parse parse) {
  std::vector<T> out;
  for (const auto& item : splitCommas(text)) out.push_back(parse(item));
  return out;
}

void printDiagnoses(std::ostream& out, const SessionState& s) {
  out << s.ds.size() << " leading diagnos" << (s.ds.size() == 1 ? "is" : "es")
      << (s.ds.complete ? " (complete)" : "") << ":\n";
  for (std::size_t i = 0; i < s.ds.size(); ++i) {
    out << "  p=" << s.ds.probs[i] << "  {";
    const auto& ids = s.ds.diagnoses[i].axiomIds;
    for (std::size_t k = 0; k < ids.size(); ++k) {
      out << (k ? ", " : "") << ids[k] << ": " << s.kb.axioms[static_cast<std::size_t>(ids[k])].formula.toString();
    }
    out << "}\n";
  }
}

// Reads one answer for q from stdin. "y"/"n" answers the whole query;
// otherwise one t/f token per axiom in presentation order, a prefix allowed.
std::optional<Answer> readAnswer(const Query& q) {
  std::string line;
  while (true) {
    std::cout << "> " << std::flush;
    if (!std::getline(std::cin, line)) return std::nullopt;
    std::istringstream in(line);
    std::vector<std::string> tokens;
    for (std::string t; in >> t;) tokens.push_back(t);
    if (tokens.empty()) continue;
    try {
      if (tokens.size() == 1 && (tokens[0] == "y" || tokens[0] == "n")) {
        return answerFromWhole(q, tokens[0] == "y");
      }
      if (tokens.size() > q.size()) throw AnswerMismatchError("more labels than query axioms");
      std::vector<AxiomLabel> labels;
      for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i] != "t" && tokens[i] != "f") throw AnswerMismatchError("labels are t or f");
        labels.push_back({q.axiomIds[i], tokens[i] == "t"});
      }
      return answerFromLabels(q, std::move(labels));
    } catch (const Error& e) {
      std::cout << e.what() << "\n";
    }
  }
}

int runInteractive(const KnowledgeBase& kb, const SessionConfig& config) {
  SessionState state = newSession(kb, config);
  std::cout << "answer y/n for the whole query, or t/f per axiom in order\n";
  while (!state.finished) {
    printDiagnoses(std::cout, state);
    const auto q = nextQuery(state);
    if (!q) break;
    std::cout << "Query:\n";
    for (const AxiomId id : q->axiomIds) {
      std::cout << "  [" << id << "] " << state.kb.axioms[static_cast<std::size_t>(id)].formula.toString() << "\n";
    }
    const auto answer = readAnswer(*q);
    if (!answer) return 1;
    try {
      state = integrateAnswer(state, *q, *answer);
    } catch (const Error& e) {
      std::cout << "answer rejected: " << e.what() << "\n";
    }
  }
  std::cout << "faulty axioms:";
  for (const AxiomId id : state.result->axiomIds) std::cout << ' ' << id;
  std::cout << "\n#Q=" << state.metrics.numQueries << " #Ax=" << state.metrics.numAxioms << "\n";
  return 0;
}

std::atomic<bool> g_stop{false};

extern "C" void onSignal(int) { g_stop = true; }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive fault localization for propositional knowledge bases"};
  app.set_version_flag("--version", std::string(ORACLE_LOOP_VERSION));
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "Simulated-expert experiments");
  bench->require_subcommand(1);
  auto* benchRun = bench->add_subcommand("run", "Generate scenarios and run the strategy grid");
  std::size_t scenarios = 200;
  std::uint64_t seed = 1;
  std::string grid = "sq,normal", heuristics = "ent,spl", profiles = "qb,min,prag,max", out;
  std::size_t workers = 1, leading = 9;
  bool noTimes = false;
  benchRun->add_option("--scenarios", scenarios, "Number of scenarios")->capture_default_str();
  benchRun->add_option("--seed", seed, "Master seed")->capture_default_str();
  benchRun->add_option("--grid", grid, "Query types")->capture_default_str();
  benchRun->add_option("--heuristics", heuristics, "Heuristics")->capture_default_str();
  benchRun->add_option("--profiles", profiles, "Expert profiles")->capture_default_str();
  benchRun->add_option("--out", out, "Report CSV path")->required();
  benchRun->add_option("--workers", workers, "Parallel workers")->capture_default_str();
  benchRun->add_option("--m", leading, "Leading diagnoses per iteration")->capture_default_str();
  benchRun->add_flag("--no-times", noTimes, "Zero the time columns");

  auto* benchSummarize = bench->add_subcommand("summarize", "Summarize a report CSV");
  std::string reportPath;
  benchSummarize->add_option("report", reportPath, "Report CSV")->required();

  // session
  auto* session = app.add_subcommand("session", "Single debugging session");
  session->require_subcommand(1);
  auto* sessionRun = session->add_subcommand("run", "Run a session on a KB file");
  std::string kbPath, dstar, type = "sq", heuristic = "ent", profile = "prag", probsPath;
  bool timing = false;
  sessionRun->add_option("--kb", kbPath, "KB file")->required();
  sessionRun->add_option("--dstar", dstar, "Faulty axiom ids; simulate the expert instead of asking");
  sessionRun->add_option("--type", type, "sq or normal")->capture_default_str();
  sessionRun->add_option("--heuristic", heuristic, "ent or spl")->capture_default_str();
  sessionRun->add_option("--profile", profile, "qb, min, prag or max")->capture_default_str();
  sessionRun->add_option("--probs", probsPath, "Fault probabilities, idx<TAB>prob per line");
  sessionRun->add_option("--m", leading, "Leading diagnoses per iteration")->capture_default_str();
  sessionRun->add_flag("--timing", timing, "Append selection time to transcript lines");

  // serve
  auto* serve = app.add_subcommand("serve", "HTTP service for live sessions");
  std::optional<std::string> listen;
  std::string uiDir, snapshotPath;
  serve->add_option("--listen", listen, "host:port (else $ORACLE_LOOP_LISTEN, else 127.0.0.1:7171)");
  serve->add_option("--ui-dir", uiDir, "Static files served under /ui");
  serve->add_option("--snapshot", snapshotPath, "Write all sessions as JSON here on shutdown");

  CLI11_PARSE(app, argc, argv);

  try {
    if (benchRun->parsed()) {
      ExperimentGrid g;
      g.queryTypes = parseList<QueryType>(grid, parseQueryType);
      g.heuristics = parseList<HeuristicKind>(heuristics, parseHeuristic);
      g.profiles = parseList<ExpertProfile>(profiles, parseProfile);
      g.leadingCap = leading;
      g.workers = workers;
      const auto batch = generateBatch(scenarios, seed);
      const auto result = runExperiment(batch, g);
      for (const auto& [id, reason] : result.failures) {
        std::cerr << "scenario " << id << " dropped: " << reason << "\n";
      }
      std::ofstream file(out);
      if (!file) throw Error("cannot write " + out);
      const auto rows = result.rows();
      writeReportCsv(file, rows, !noTimes);
      std::cerr << rows.size() << " rows written to " << out << "\n";
      printSummary(std::cout, summarize(rows));
      return result.failures.empty() ? 0 : 2;
    }
    if (benchSummarize->parsed()) {
      std::ifstream file(reportPath);
      if (!file) throw Error("cannot open " + reportPath);
      printSummary(std::cout, summarize(readReportCsv(file)));
      return 0;
    }
    if (sessionRun->parsed()) {
      const KnowledgeBase kb = parseKB(readFile(kbPath));
      SessionConfig config;
      config.queryType = parseQueryType(type);
      config.heuristic = parseHeuristic(heuristic);
      config.leadingCap = leading;
      if (!probsPath.empty()) config.faultProbs = FaultProbabilities::parse(readFile(probsPath), kb.size());
      if (dstar.empty()) return runInteractive(kb, config);

      TargetDiagnosis target;
      target.axiomIds = parseList<AxiomId>(dstar, [](const std::string& s) { return std::stoi(s); });
      std::sort(target.axiomIds.begin(), target.axiomIds.end());
      const auto result = runAutoSession(kb, config, parseProfile(profile), target);
      for (std::size_t i = 0; i < result.history.size(); ++i) {
        std::cout << transcriptLine(i + 1, config.queryType, result.history[i], timing) << "\n";
      }
      std::cout << "result";
      for (const AxiomId id : result.finalDiagnosis.axiomIds) std::cout << ' ' << id;
      std::cout << "\n#Q=" << result.metrics.numQueries << " #Ax=" << result.metrics.numAxioms << "\n";
      return 0;
    }
    if (serve->parsed()) {
      const ListenAddress address = resolveListenAddress(listen);
      SessionService service;
      HttpFrontEnd http(service, uiDir.empty() ? std::nullopt : std::optional<std::string>(uiDir));
      std::signal(SIGINT, onSignal);
      std::signal(SIGTERM, onSignal);
      std::thread watcher([&] {
        while (!g_stop) std::this_thread::sleep_for(std::chrono::milliseconds(100));
        http.stop();
      });
      std::cerr << "listening on " << address.host << ':' << address.port << "\n";
      const bool ok = http.listen(address);
      g_stop = true;
      watcher.join();
      if (!ok) {
        std::cerr << "cannot listen on " << address.host << ':' << address.port << "\n";
        return 1;
      }
      if (!snapshotPath.empty()) {
        std::ofstream file(snapshotPath);
        file << service.snapshotAll().dump(2) << "\n";
      }
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
