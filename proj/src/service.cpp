#include "oracle_loop/service.hpp"

#include <cstdlib>
#include <iomanip>
#include <random>
#include <sstream>

#include "httplib.h"
#include "oracle_loop/error.hpp"

namespace oracle_loop {

using nlohmann::json;

ListenAddress parseListenAddress(const std::string& text) {
  const auto colon = text.rfind(':');
  if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error("listen address must be host:port, got '" + text + "'");
  }
  ListenAddress a;
  a.host = text.substr(0, colon);
  try {
    std::size_t used = 0;
    a.port = std::stoi(text.substr(colon + 1), &used);
    if (used != text.size() - colon - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw Error("bad port in listen address '" + text + "'");
  }
  if (a.port < 0 || a.port > 65535) throw Error("port out of range in '" + text + "'");
  return a;
}

ListenAddress resolveListenAddress(const std::optional<std::string>& flag) {
  if (flag) return parseListenAddress(*flag);
  if (const char* env = std::getenv("ORACLE_LOOP_LISTEN"); env && *env) return parseListenAddress(env);
  return ListenAddress{};
}

namespace {

json errorBody(std::string_view code, const std::string& message) {
  return json{{"code", code}, {"message", message}};
}

SessionService::Response error(int status, std::string_view code, const std::string& message) {
  return {status, errorBody(code, message)};
}

json axiomRefs(const KnowledgeBase& kb, const std::vector<AxiomId>& ids) {
  json out = json::array();
  for (const AxiomId id : ids) {
    out.push_back({{"axiomId", id}, {"text", kb.axioms.at(static_cast<std::size_t>(id)).formula.toString()}});
  }
  return out;
}

json diagnosesJson(const SessionState& s) {
  json out = json::array();
  for (std::size_t i = 0; i < s.ds.size(); ++i) {
    out.push_back({{"axiomIds", s.ds.diagnoses[i].axiomIds},
                   {"axioms", axiomRefs(s.kb, s.ds.diagnoses[i].axiomIds)},
                   {"probability", s.ds.probs[i]}});
  }
  return out;
}

json metricsJson(const Metrics& m) {
  return {{"numQueries", m.numQueries},
          {"numAxioms", m.numAxioms},
          {"computeTimeNanos", m.computeTimeNanos},
          {"perIterationTimes", m.perIterationTimes}};
}

json historyJson(const SessionState& s) {
  json out = json::array();
  for (const auto& h : s.history) {
    json labels = json::array();
    for (const auto& l : h.answer.labels) labels.push_back({{"axiomId", l.id}, {"entailed", l.entailed}});
    out.push_back({{"query", h.query.axiomIds},
                   {"answerKind", toString(h.answer.kind)},
                   {"labels", labels},
                   {"effort", h.answer.effort},
                   {"eliminated", h.eliminated},
                   {"selectionNanos", h.selectionNanos}});
  }
  return out;
}

json resultJson(const SessionState& s) {
  if (!s.result) return nullptr;
  return {{"axiomIds", s.result->axiomIds}, {"axioms", axiomRefs(s.kb, s.result->axiomIds)}};
}

SessionConfig configFrom(const json& body, std::size_t numAxioms) {
  SessionConfig c;
  if (!body.contains("config")) return c;
  const json& j = body.at("config");
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  if (j.contains("queryType")) c.queryType = parseQueryType(j.at("queryType").get<std::string>());
  if (j.contains("heuristic")) c.heuristic = parseHeuristic(j.at("heuristic").get<std::string>());
  if (j.contains("leadingCap")) c.leadingCap = j.at("leadingCap").get<std::size_t>();
  if (j.contains("faultProbabilities")) {
    c.faultProbs = FaultProbabilities::parse(j.at("faultProbabilities").get<std::string>(), numAxioms);
  }
  if (j.contains("randomSeed")) c.randomSeed = j.at("randomSeed").get<std::uint64_t>();
  return c;
}

std::vector<AxiomLabel> labelsFrom(const json& labels) {
  if (!labels.is_array() || labels.empty()) throw std::invalid_argument("labels must be a nonempty array");
  std::vector<AxiomLabel> out;
  for (const auto& item : labels) {
    if (item.is_array() && item.size() == 2) {
      out.push_back({item[0].get<AxiomId>(), item[1].get<bool>()});
    } else if (item.is_object()) {
      out.push_back({item.at("axiomId").get<AxiomId>(), item.at("entailed").get<bool>()});
    } else {
      throw std::invalid_argument("label must be [axiomId, bool] or {axiomId, entailed}");
    }
  }
  return out;
}

}  // namespace

std::shared_ptr<const SessionState> SessionService::Entry::snapshot() const {
  std::lock_guard lock(publish);
  return state;
}

void SessionService::Entry::store(SessionState next) {
  auto fresh = std::make_shared<const SessionState>(std::move(next));
  std::lock_guard lock(publish);
  state = std::move(fresh);
}

std::shared_ptr<SessionService::Entry> SessionService::find(const std::string& id) const {
  std::lock_guard lock(registryMutex_);
  const auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::string SessionService::newId() {
  static thread_local std::mt19937_64 engine{std::random_device{}()};
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << engine() << std::setw(8) << ++counter_;
  return out.str();
}

std::size_t SessionService::sessionCount() const {
  std::lock_guard lock(registryMutex_);
  return sessions_.size();
}

json SessionService::stateDocument(const Entry& entry, const SessionState& s) {
  json axioms = json::array();
  for (const auto& ax : s.kb.axioms) {
    axioms.push_back({{"axiomId", ax.id}, {"text", ax.formula.toString()}, {"source", ax.sourceText}});
  }
  const auto created = std::chrono::duration_cast<std::chrono::milliseconds>(
                           entry.createdAt.time_since_epoch())
                           .count();
  return {{"sessionId", entry.id},
          {"createdAt", created},
          {"config",
           {{"queryType", toString(s.config.queryType)},
            {"heuristic", toString(s.config.heuristic)},
            {"leadingCap", s.config.leadingCap}}},
          {"axioms", axioms},
          {"diagnoses", diagnosesJson(s)},
          {"complete", s.ds.complete},
          {"history", historyJson(s)},
          {"metrics", metricsJson(s.metrics)},
          {"pendingQuery", s.pending ? json(s.pending->query.axiomIds) : json(nullptr)},
          {"finished", s.finished},
          {"result", resultJson(s)}};
}

SessionService::Response SessionService::createSession(const json& body) {
  std::string text;
  try {
    text = body.at("kbText").get<std::string>();
  } catch (const std::exception&) {
    return error(400, "bad_request", "body must contain a string field kbText");
  }
  try {
    KnowledgeBase kb = parseKB(text);
    SessionConfig config = configFrom(body, kb.size());
    SessionState state = newSession(std::move(kb), std::move(config));

    auto entry = std::make_shared<Entry>();
    entry->createdAt = std::chrono::system_clock::now();
    {
      std::lock_guard lock(registryMutex_);
      do {
        entry->id = newId();
      } while (sessions_.count(entry->id));
      sessions_.emplace(entry->id, entry);
    }
    entry->store(std::move(state));
    return {201, {{"sessionId", entry->id}, {"state", stateDocument(*entry, *entry->snapshot())}}};
  } catch (const ParseError& e) {
    json b = errorBody("parse_error", e.what());
    b["line"] = e.line();
    b["column"] = e.column();
    return {400, b};
  } catch (const KbAlreadyValidError& e) {
    return error(422, "kb_valid", e.what());
  } catch (const NoDiagnosisError& e) {
    return error(422, "no_diagnosis", e.what());
  } catch (const Error& e) {
    return error(400, "bad_request", e.what());
  } catch (const json::exception& e) {
    return error(400, "bad_request", e.what());
  } catch (const std::invalid_argument& e) {
    return error(400, "bad_request", e.what());
  }
}

SessionService::Response SessionService::getNextQuery(const std::string& id) {
  const auto entry = find(id);
  if (!entry) return error(404, "unknown_session", "no session " + id);
  std::lock_guard writer(entry->writer);
  const auto current = entry->snapshot();
  if (current->finished) {
    return {200, {{"finished", true}, {"query", json::array()}, {"result", resultJson(*current)}}};
  }
  SessionState next = *current;
  std::optional<Query> q;
  try {
    q = nextQuery(next);
  } catch (const Error& e) {
    return error(500, "internal", e.what());
  }
  json body = {{"finished", false}, {"query", axiomRefs(next.kb, q->axiomIds)}};
  if (!current->pending) entry->store(std::move(next));
  return {200, body};
}

SessionService::Response SessionService::postAnswer(const std::string& id, const json& body) {
  const auto entry = find(id);
  if (!entry) return error(404, "unknown_session", "no session " + id);
  std::unique_lock writer(entry->writer, std::try_to_lock);
  if (!writer.owns_lock()) return error(409, "conflict", "another answer for this session is in flight");

  const auto current = entry->snapshot();
  if (current->finished) return error(409, "no_pending_query", "session already finished");
  if (!current->pending) return error(409, "no_pending_query", "fetch a query before answering");
  const Query& q = current->pending->query;

  Answer answer;
  try {
    if (body.contains("labels")) {
      answer = answerFromLabels(q, labelsFrom(body.at("labels")));
    } else if (body.contains("whole")) {
      std::optional<std::size_t> effort;
      if (body.contains("effort")) effort = body.at("effort").get<std::size_t>();
      answer = answerFromWhole(q, body.at("whole").get<bool>(), effort);
    } else {
      return error(400, "bad_answer", "body must contain labels or whole");
    }
  } catch (const AnswerMismatchError& e) {
    return error(400, "bad_answer", e.what());
  } catch (const json::exception& e) {
    return error(400, "bad_answer", e.what());
  } catch (const std::invalid_argument& e) {
    return error(400, "bad_answer", e.what());
  }

  try {
    SessionState next = integrateAnswer(*current, q, answer);
    const std::size_t eliminated = next.history.back().eliminated;
    entry->store(std::move(next));
    const auto s = entry->snapshot();
    return {200,
            {{"remaining", s->ds.size()},
             {"eliminated", eliminated},
             {"diagnoses", diagnosesJson(*s)},
             {"metrics", metricsJson(s->metrics)},
             {"finished", s->finished},
             {"result", resultJson(*s)}}};
  } catch (const AnswerMismatchError& e) {
    return error(400, "bad_answer", e.what());
  } catch (const NoDiagnosisError& e) {
    return error(422, "contradictory_answers", e.what());
  } catch (const Error& e) {
    return error(500, "internal", e.what());
  }
}

SessionService::Response SessionService::getState(const std::string& id) {
  const auto entry = find(id);
  if (!entry) return error(404, "unknown_session", "no session " + id);
  const auto s = entry->snapshot();
  return {200, stateDocument(*entry, *s)};
}

SessionService::Response SessionService::deleteSession(const std::string& id) {
  std::lock_guard lock(registryMutex_);
  if (sessions_.erase(id) == 0) return error(404, "unknown_session", "no session " + id);
  return {200, {{"deleted", id}}};
}

json SessionService::snapshotAll() const {
  std::vector<std::shared_ptr<Entry>> entries;
  {
    std::lock_guard lock(registryMutex_);
    for (const auto& [id, e] : sessions_) entries.push_back(e);
  }
  json out = json::array();
  for (const auto& e : entries) out.push_back(stateDocument(*e, *e->snapshot()));
  return out;
}

// ---------------------------------------------------------------------------

namespace {

void reply(httplib::Response& res, const SessionService::Response& r) {
  res.status = r.status;
  res.set_content(r.body.dump(), "application/json");
}

std::optional<json> parseBody(const httplib::Request& req, httplib::Response& res) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    reply(res, {400, errorBody("bad_request", std::string("invalid JSON: ") + e.what())});
    return std::nullopt;
  }
}

}  // namespace

HttpFrontEnd::HttpFrontEnd(SessionService& service, std::optional<std::string> uiDir)
    : service_(service), server_(std::make_unique<httplib::Server>()) {
  auto& s = *server_;
  s.Post("/sessions", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parseBody(req, res)) reply(res, service_.createSession(*body));
  });
  s.Get(R"(/sessions/([0-9a-f]+)/query)", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_.getNextQuery(req.matches[1]));
  });
  s.Post(R"(/sessions/([0-9a-f]+)/answer)", [this](const httplib::Request& req, httplib::Response& res) {
    if (auto body = parseBody(req, res)) reply(res, service_.postAnswer(req.matches[1], *body));
  });
  s.Get(R"(/sessions/([0-9a-f]+)/state)", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_.getState(req.matches[1]));
  });
  s.Delete(R"(/sessions/([0-9a-f]+))", [this](const httplib::Request& req, httplib::Response& res) {
    reply(res, service_.deleteSession(req.matches[1]));
  });
  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) {
      res.set_content(errorBody("http_" + std::to_string(res.status), "no such route").dump(),
                      "application/json");
    }
  });
  if (uiDir) s.set_mount_point("/ui", *uiDir);
}

HttpFrontEnd::~HttpFrontEnd() { stop(); }

bool HttpFrontEnd::listen(const ListenAddress& address) {
  return server_->listen(address.host, address.port);
}

int HttpFrontEnd::bindAnyPort(const std::string& host) { return server_->bind_to_any_port(host); }

bool HttpFrontEnd::listenAfterBind() { return server_->listen_after_bind(); }

void HttpFrontEnd::stop() {
  if (server_) server_->stop();
}

bool HttpFrontEnd::isRunning() const { return server_->is_running(); }

}  // namespace oracle_loop
