// evb/service.cpp - HTTP+JSON access to models and animation sessions
#include "evb/service.hpp"

#include <ctime>
#include <sstream>

#include <httplib.h>

#include "evb/errors.hpp"

namespace evb
{

struct Service::Entry
{
  std::mutex mu;
  std::string id;
  std::string machine;
  std::string created;
  Clock::time_point last_used;
  std::optional<Session> session;
};

namespace
{

Response error(int status, const std::string & code, const std::string & message)
{
  return {status, {{"error", code}, {"message", message}}};
}

int status_for(ErrorCode c)
{
  switch (c) {
    case ErrorCode::UnknownMachine:
    case ErrorCode::UnknownEvent:
    case ErrorCode::UnknownVariable:
      return 404;
    case ErrorCode::GuardNotEnabled:
    case ErrorCode::EmptyHistory:
    case ErrorCode::WellDefinedness:
      return 409;
    case ErrorCode::TypeMismatch:
    case ErrorCode::OutOfBounds:
    case ErrorCode::TypeError:
    case ErrorCode::MissingBound:
    case ErrorCode::InvalidBound:
    case ErrorCode::NonFiniteCarrier:
    case ErrorCode::AxiomViolation:
    case ErrorCode::ScenarioSyntax:
    case ErrorCode::ExplorationCapExceeded:
      return 422;
    default:
      return 500;
  }
}

Response from(const ModelError & e) { return error(status_for(e.code()), error_code_name(e.code()), e.what()); }

std::string utc_now()
{
  const std::time_t t = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::vector<std::string> split_path(const std::string & path)
{
  std::vector<std::string> parts;
  std::string p = path.substr(0, path.find('?'));
  std::istringstream in(p);
  for (std::string s; std::getline(in, s, '/');) {
    if (!s.empty()) parts.push_back(s);
  }
  return parts;
}

// Request bodies are JSON objects; an empty body is an empty object.
std::optional<Json> parse_body(const std::string & body)
{
  if (body.empty()) return Json::object();
  Json j = Json::parse(body, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  return j;
}

std::optional<std::string> string_field(const Json & j, const char * key)
{
  auto it = j.find(key);
  if (it == j.end() || !it->is_string()) return std::nullopt;
  return it->get<std::string>();
}

// Perturbation values may be given as JSON numbers or booleans too.
std::optional<std::string> value_text(const Json & j)
{
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>() ? "TRUE" : "FALSE";
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  return std::nullopt;
}

Json snapshot(const std::string & id, const Session & s)
{
  Json o;
  o["id"] = id;
  o["machine"] = s.model().name();
  o["state"] = state_to_json(s.model(), s.state());
  o["enabled"] = s.enabled_events();
  Json events = Json::array();
  for (const auto & e : s.events()) {
    events.push_back({{"name", e.name},
                      {"kind", e.environment ? "environment" : "model"},
                      {"enabled", e.enabled},
                      {"failing_guards", e.failing_guards}});
  }
  o["events"] = events;
  o["hazards"] = s.hazards();
  o["history_length"] = s.history().size();
  return o;
}

// Optional "bounds": {var: [lo, hi]} and "constants": {name: value} overrides.
std::optional<std::string> apply_overrides(const Json & j, CheckConfig & cfg)
{
  if (auto it = j.find("bounds"); it != j.end()) {
    if (!it->is_object()) return "bounds must be an object";
    for (const auto & [k, v] : it->items()) {
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer()) {
        return "bound for " + k + " must be [lo, hi]";
      }
      cfg.bounds[k] = {v[0].get<Value>(), v[1].get<Value>()};
    }
  }
  if (auto it = j.find("constants"); it != j.end()) {
    if (!it->is_object()) return "constants must be an object";
    for (const auto & [k, v] : it->items()) {
      auto text = value_text(v);
      if (!text) return "constant " + k + " must be a string, number or boolean";
      cfg.constants[k] = *text;
    }
  }
  return std::nullopt;
}

}  // namespace

Service::Service(Project project, CheckConfig config, std::chrono::minutes idle_limit)
    : project_(std::move(project)), config_(std::move(config)), idle_limit_(idle_limit)
{
}

Service::~Service() = default;

std::shared_ptr<const Model> Service::model(const std::string & machine, const CheckConfig & cfg, bool cache)
{
  if (cache) {
    std::lock_guard lock(mu_);
    if (auto it = models_.find(machine); it != models_.end()) return it->second;
  }
  auto m = Model::build(project_, machine, cfg);
  if (cache) {
    std::lock_guard lock(mu_);
    models_.emplace(machine, m);
  }
  return m;
}

std::shared_ptr<Service::Entry> Service::find_session(const std::string & id)
{
  std::lock_guard lock(mu_);
  auto it = sessions_.find(id);
  return it == sessions_.end() ? nullptr : it->second;
}

std::size_t Service::evict_idle(Clock::time_point now)
{
  std::lock_guard lock(mu_);
  std::size_t n = 0;
  for (auto it = sessions_.begin(); it != sessions_.end();) {
    std::unique_lock entry(it->second->mu, std::try_to_lock);
    if (entry.owns_lock() && now - it->second->last_used > idle_limit_) {
      entry.unlock();
      it = sessions_.erase(it);
      ++n;
    } else {
      ++it;
    }
  }
  return n;
}

std::size_t Service::session_count() const
{
  std::lock_guard lock(mu_);
  return sessions_.size();
}

Response Service::handle(const std::string & method, const std::string & path, const std::string & body)
{
  evict_idle(Clock::now());
  const auto parts = split_path(path);
  try {
    if (!parts.empty() && parts[0] == "machines") {
      if (method != "GET" || parts.size() > 2) return error(405, "MethodNotAllowed", method + " " + path);
      return parts.size() == 1 ? machines() : machine(parts[1]);
    }
    if (!parts.empty() && parts[0] == "sessions") {
      if (parts.size() == 1) {
        if (method != "POST") return error(405, "MethodNotAllowed", method + " " + path);
        return create_session(body);
      }
      if (parts.size() <= 3) return session_op(parts[1], parts.size() == 3 ? parts[2] : "", method, body);
    }
    if (parts.size() == 2 && parts[0] == "scenarios" && parts[1] == "run") {
      if (method != "POST") return error(405, "MethodNotAllowed", method + " " + path);
      return run_scenario_text(body);
    }
    return error(404, "NotFound", path);
  } catch (const ModelError & e) {
    return from(e);
  } catch (const std::exception & e) {
    return error(500, "Internal", e.what());
  }
}

Response Service::machines() const
{
  Json o;
  o["machines"] = project_.machine_names();
  Json edges = Json::array();
  for (const auto & name : project_.machine_names()) {
    const auto & fm = project_.machine(name);
    if (fm.abstract_machine) edges.push_back({{"abstract", *fm.abstract_machine}, {"concrete", name}});
  }
  o["refinements"] = edges;
  return {200, o};
}

Response Service::machine(const std::string & name)
{
  if (!project_.has_machine(name)) return error(404, error_code_name(ErrorCode::UnknownMachine), name);
  return {200, machine_descriptor(*model(name, config_, true))};
}

Response Service::create_session(const std::string & body)
{
  auto j = parse_body(body);
  if (!j) return error(400, "BadRequest", "body must be a JSON object");
  auto name = string_field(*j, "machine");
  if (!name) return error(400, "BadRequest", "missing \"machine\"");
  if (!project_.has_machine(*name)) return error(404, error_code_name(ErrorCode::UnknownMachine), *name);

  CheckConfig cfg = config_;
  const bool overridden = j->contains("bounds") || j->contains("constants");
  if (auto why = apply_overrides(*j, cfg)) return error(400, "BadRequest", *why);

  auto entry = std::make_shared<Entry>();
  entry->machine = *name;
  entry->created = utc_now();
  entry->last_used = Clock::now();
  entry->session.emplace(model(*name, cfg, !overridden));
  {
    std::lock_guard lock(mu_);
    entry->id = "s" + std::to_string(next_id_++);
    sessions_.emplace(entry->id, entry);
  }
  Json o = snapshot(entry->id, *entry->session);
  o["created"] = entry->created;
  return {201, o};
}

Response Service::session_op(const std::string & id, const std::string & op, const std::string & method,
                             const std::string & body)
{
  auto entry = find_session(id);
  if (!entry) return error(404, "UnknownSession", id);
  std::lock_guard lock(entry->mu);
  entry->last_used = Clock::now();
  Session & s = *entry->session;

  auto wrong_method = [&] { return error(405, "MethodNotAllowed", method + " /sessions/" + id + "/" + op); };

  if (op.empty()) {
    if (method == "GET") return {200, snapshot(id, s)};
    if (method == "DELETE") {
      std::lock_guard map_lock(mu_);
      sessions_.erase(id);
      return {200, {{"id", id}, {"deleted", true}}};
    }
    return wrong_method();
  }
  if (op == "trace") {
    if (method != "GET") return wrong_method();
    return {200, {{"id", id}, {"machine", entry->machine}, {"trace", trace_to_json(s.model(), s.trace())}}};
  }
  if (method != "POST") return wrong_method();
  auto j = parse_body(body);
  if (!j) return error(400, "BadRequest", "body must be a JSON object");

  if (op == "fire") {
    auto event = string_field(*j, "event");
    if (!event) return error(400, "BadRequest", "missing \"event\"");
    s.fire(*event);
  } else if (op == "perturb") {
    auto var = string_field(*j, "variable");
    auto it = j->find("value");
    std::optional<std::string> value = it == j->end() ? std::nullopt : value_text(*it);
    if (!var || !value) return error(400, "BadRequest", "expected {\"variable\": name, \"value\": value}");
    s.perturb(*var, *value);
  } else if (op == "undo") {
    s.undo();
  } else {
    return error(404, "NotFound", op);
  }
  return {200, snapshot(id, s)};
}

Response Service::run_scenario_text(const std::string & body)
{
  const Scenario sc = parse_scenario(body, "<request>");
  const ScenarioReport r = run_scenario(sc, project_, config_);
  if (r.invalid) {
    Json o = scenario_record(r);
    o["error"] = "InvalidScenario";
    o["message"] = r.reason;
    return {project_.has_machine(sc.machine) ? 422 : 404, o};
  }
  return {200, scenario_record(r)};
}

// ---- HTTP transport --------------------------------------------------------

int Service::bind(const std::string & host, int port)
{
  server_ = std::make_unique<httplib::Server>();
  // The library default adds SO_REUSEPORT, which lets a second server share
  // a busy port; only address reuse is wanted here.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof yes);
  });
  auto route = [this](const httplib::Request & req, httplib::Response & res) {
    const Response r = handle(req.method, req.path, req.body);
    res.status = r.status;
    res.set_content(r.body.dump(), "application/json");
  };
  const std::string any = R"(/.*)";
  server_->Get(any, route);
  server_->Post(any, route);
  server_->Delete(any, route);
  if (port == 0) return server_->bind_to_any_port(host);
  return server_->bind_to_port(host, port) ? port : -1;
}

bool Service::listen() { return server_ && server_->listen_after_bind(); }

void Service::stop()
{
  if (server_) server_->stop();
}

}  // namespace evb
