#pragma once

#include <chrono>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "json.hpp"
#include "oracle_loop/session.hpp"

namespace httplib {
class Server;
}

namespace oracle_loop {

struct ListenAddress {
  std::string host = "127.0.0.1";
  int port = 7171;
};

/// Parses `host:port`.
ListenAddress parseListenAddress(const std::string& text);

/// --listen flag if given, else $ORACLE_LOOP_LISTEN, else 127.0.0.1:7171.
ListenAddress resolveListenAddress(const std::optional<std::string>& flag);

/// In-memory session registry behind the HTTP routes. Transport-free so it
/// can be driven directly from tests.
///
/// Each session has a writer mutex; a POST that finds it held answers 409
/// instead of queueing. Readers copy an immutable snapshot pointer, so a
/// GET never sees a half-applied answer.
class SessionService {
 public:
  struct Response {
    int status = 200;
    nlohmann::json body;
  };

  Response createSession(const nlohmann::json& body);
  Response getNextQuery(const std::string& id);
  Response postAnswer(const std::string& id, const nlohmann::json& body);
  Response getState(const std::string& id);
  Response deleteSession(const std::string& id);

  /// All sessions as state documents, for the shutdown snapshot.
  nlohmann::json snapshotAll() const;

  std::size_t sessionCount() const;

 private:
  struct Entry {
    std::string id;
    std::chrono::system_clock::time_point createdAt;
    std::mutex writer;
    mutable std::mutex publish;
    std::shared_ptr<const SessionState> state;

    std::shared_ptr<const SessionState> snapshot() const;
    void store(SessionState next);
  };

  std::shared_ptr<Entry> find(const std::string& id) const;
  std::string newId();
  static nlohmann::json stateDocument(const Entry& entry, const SessionState& s);

  mutable std::mutex registryMutex_;
  std::unordered_map<std::string, std::shared_ptr<Entry>> sessions_;
  std::uint64_t counter_ = 0;
};

/// Binds the service's routes to an HTTP server:
///   POST /sessions, GET /sessions/{id}/query, POST /sessions/{id}/answer,
///   GET /sessions/{id}/state, DELETE /sessions/{id}
/// plus static files under /ui when a directory is given.
class HttpFrontEnd {
 public:
  explicit HttpFrontEnd(SessionService& service, std::optional<std::string> uiDir = {});
  ~HttpFrontEnd();
  HttpFrontEnd(const HttpFrontEnd&) = delete;
  HttpFrontEnd& operator=(const HttpFrontEnd&) = delete;

  /// Blocks until stop(). Returns false if the address cannot be bound.
  bool listen(const ListenAddress& address);

  /// Binds an ephemeral port and returns it (-1 on failure); serve with
  /// listenAfterBind().
  int bindAnyPort(const std::string& host);
  bool listenAfterBind();

  void stop();
  bool isRunning() const;

 private:
  SessionService& service_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace oracle_loop
