// evb/service.hpp - HTTP+JSON access to models and animation sessions
#pragma once

#include <chrono>
#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "evb/report.hpp"

namespace httplib
{
class Server;
}

namespace evb
{

struct Response
{
  int status = 200;
  Json body;
};

// Routes:
//   GET    /machines                   names and refinement edges
//   GET    /machines/{m}               descriptor
//   POST   /sessions                   {"machine": m} -> 201
//   GET    /sessions/{id}              snapshot
//   DELETE /sessions/{id}
//   POST   /sessions/{id}/fire         {"event": e}
//   POST   /sessions/{id}/perturb      {"variable": v, "value": x}
//   POST   /sessions/{id}/undo
//   GET    /sessions/{id}/trace
//   POST   /scenarios/run              body is the scenario text
//
// Errors are {"error": code, "message": text}: 400 malformed request, 404
// unknown machine, session, event or variable, 409 guard not enabled or
// nothing to undo, 422 type or bounds errors and invalid scenarios.
class Service
{
public:
  using Clock = std::chrono::steady_clock;

  Service(Project project, CheckConfig config, std::chrono::minutes idle_limit = std::chrono::minutes(30));
  ~Service();

  /// Thread-safe. Operations on one session are serialized.
  Response handle(const std::string & method, const std::string & path, const std::string & body);

  /// Drops sessions unused since `now - idle_limit`; returns how many.
  std::size_t evict_idle(Clock::time_point now);
  std::size_t session_count() const;

  /// Binds to host:port (0 picks a free port) and returns the port, or -1
  /// when the port is taken.
  int bind(const std::string & host, int port);
  /// Serves until stop(). Call after bind().
  bool listen();
  void stop();

private:
  struct Entry;

  std::shared_ptr<Entry> find_session(const std::string & id);
  std::shared_ptr<const Model> model(const std::string & machine, const CheckConfig & cfg, bool cache);

  Response machines() const;
  Response machine(const std::string & name);
  Response create_session(const std::string & body);
  Response session_op(const std::string & id, const std::string & op, const std::string & method,
                      const std::string & body);
  Response run_scenario_text(const std::string & body);

  Project project_;
  CheckConfig config_;
  std::chrono::minutes idle_limit_;

  mutable std::mutex mu_;
  std::map<std::string, std::shared_ptr<const Model>> models_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::size_t next_id_ = 1;

  std::unique_ptr<httplib::Server> server_;
};

}  // namespace evb
