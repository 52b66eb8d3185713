// evb - command-line front end: check, refine, pos, animate, serve
#include <csignal>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "evb/corpus.hpp"
#include "evb/errors.hpp"
#include "evb/report.hpp"
#include "evb/service.hpp"

namespace fs = std::filesystem;
using namespace evb;

namespace
{

enum Exit { Pass = 0, Failed = 1, Usage = 2, Internal = 3 };

struct Inputs
{
  Project project;
  CheckConfig config;
};

std::string slurp(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ModelError(ErrorCode::UnresolvedReference, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// No paths: the bundled corpus. A directory holding a `manifest` contributes
// its listed units and bounds; other paths contribute every *.ebs file. An
// explicit bounds file (manifest or bounds syntax) takes precedence.
Inputs load_inputs(const std::vector<std::string> & paths, const std::string & bounds_file)
{
  Inputs in;
  in.config = load_corpus().manifest.config;
  if (paths.empty()) {
    in.project = load_corpus().project;
  } else {
    std::vector<std::pair<std::string, std::string>> sources;
    for (const auto & p : paths) {
      if (fs::is_directory(p) && fs::exists(fs::path(p) / "manifest")) {
        const Corpus c = load_corpus_dir(p);
        for (const auto & u : c.manifest.units) sources.emplace_back((fs::path(p) / u).string(), c.text(u));
        in.config = c.manifest.config;
      } else if (fs::is_directory(p)) {
        std::vector<fs::path> found;
        for (const auto & e : fs::recursive_directory_iterator(p)) {
          if (e.is_regular_file() && e.path().extension() == ".ebs") found.push_back(e.path());
        }
        std::sort(found.begin(), found.end());
        for (const auto & f : found) sources.emplace_back(f.string(), slurp(f));
      } else {
        sources.emplace_back(p, slurp(p));
      }
    }
    in.project = load_sources(sources);
  }
  if (!bounds_file.empty()) {
    const std::string text = slurp(bounds_file);
    in.config = {};
    try {
      parse_config(text, in.config, bounds_file);
    } catch (const ModelError &) {
      in.config = parse_manifest(text, bounds_file).config;
    }
  }
  return in;
}

class RecordSink
{
public:
  explicit RecordSink(const std::string & path)
  {
    if (path.empty()) return;
    out_.open(path);
    if (!out_) throw ModelError(ErrorCode::UnresolvedReference, "cannot write " + path);
  }
  void put(const Json & j)
  {
    if (out_.is_open()) out_ << j.dump() << '\n';
  }

private:
  std::ofstream out_;
};

std::string write_trace(const std::string & dir, const std::string & name, const Model & m, const Trace & t)
{
  fs::create_directories(dir);
  const fs::path p = fs::path(dir) / (name + ".jsonl");
  std::ofstream(p) << trace_to_jsonl(m, t);
  return p.string();
}

std::string join(const std::vector<std::string> & v)
{
  std::string s;
  for (const auto & x : v) s += (s.empty() ? "" : ", ") + x;
  return s;
}

// ---- commands --------------------------------------------------------------

int cmd_check(const Inputs & in, const std::string & machine, Mode mode, const std::string & report_path,
              const std::string & trace_dir)
{
  std::vector<std::string> machines;
  if (machine.empty()) {
    machines = in.project.machine_names();
  } else {
    if (!in.project.has_machine(machine)) throw ModelError(ErrorCode::UnknownMachine, machine);
    machines.push_back(machine);
  }

  RecordSink sink(report_path);
  std::cout << std::left << std::setw(22) << "machine" << std::right << std::setw(6) << "POs" << std::setw(11)
            << "discharged" << std::setw(8) << "vacuous" << std::setw(8) << "failed" << std::setw(10) << "states"
            << std::setw(12) << "violations" << std::setw(12) << "unanswered" << std::setw(11) << "deadlocks"
            << std::setw(10) << "ms" << '\n';

  std::size_t total = 0, discharged = 0, vacuous = 0, failed = 0, violations = 0, unanswered = 0, deadlocks = 0;
  std::vector<std::string> notes;
  const auto start = std::chrono::steady_clock::now();
  for (const auto & name : machines) {
    const auto t0 = std::chrono::steady_clock::now();
    auto model = Model::build(in.project, name, in.config);
    const CheckResult r = check_machine(in.project, *model, mode);
    const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

    std::cout << std::left << std::setw(22) << name << std::right << std::setw(6) << r.pos.total << std::setw(11)
              << r.pos.discharged << std::setw(8) << r.pos.vacuous << std::setw(8) << r.pos.failed << std::setw(10)
              << r.reach.states << std::setw(12) << r.reach.violation_count << std::setw(12)
              << r.reach.unanswered_states << std::setw(11) << r.reach.deadlock_states << std::setw(10)
              << std::fixed << std::setprecision(1) << ms << '\n';

    total += r.pos.total;
    discharged += r.pos.discharged;
    vacuous += r.pos.vacuous;
    failed += r.pos.failed;
    violations += r.reach.violation_count;
    unanswered += r.reach.unanswered_states;
    if (mode == Mode::Driven) deadlocks += r.reach.deadlock_states;

    for (const auto & po : r.pos.obligations) {
      sink.put(po_record(*model, po));
      if (po.status == PoStatus::Failed) {
        notes.push_back("obligation " + po.id + " fails at " + model->describe(*po.counterexample));
      }
    }
    sink.put(po_summary(r.pos));
    sink.put(reach_summary(r.reach));
    for (size_t i = 0; i < r.reach.violations.size(); ++i) {
      const auto & v = r.reach.violations[i];
      const auto path = write_trace(trace_dir, name + "-violation-" + std::to_string(i + 1), *model, v.trace);
      notes.push_back(name + " violates " + join(v.invariants) + ", trace " + path);
      sink.put({{"record", "violation"}, {"machine", name}, {"invariants", v.invariants}, {"trace", path}});
    }
    size_t k = 0;
    for (const auto & h : r.reach.hazards) {
      if (h.answered) continue;
      const auto path = write_trace(trace_dir, name + "-unanswered-" + std::to_string(++k), *model, h.trace);
      notes.push_back(name + " does not answer " + join(h.invariants) + ", trace " + path);
      sink.put({{"record", "unanswered"}, {"machine", name}, {"invariants", h.invariants}, {"trace", path}});
    }
    if (mode == Mode::Driven) {
      for (size_t i = 0; i < r.reach.deadlocks.size(); ++i) {
        const auto path =
          write_trace(trace_dir, name + "-deadlock-" + std::to_string(i + 1), *model, r.reach.deadlocks[i]);
        notes.push_back(name + " deadlocks, trace " + path);
      }
    } else if (r.reach.deadlock_states) {
      notes.push_back(name + " has " + std::to_string(r.reach.deadlock_states) +
                      " deadlock state(s) in closed mode (informational)");
    }
    for (const auto & w : r.reach.warnings) notes.push_back(name + ": " + w);
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  std::cout << "\nmode: " << mode_name(mode) << ", obligations bounded by the configured ranges\n";
  std::cout << "obligations: " << total << ", discharged: " << discharged << ", vacuous: " << vacuous << '\n';
  std::cout << "invariant violations: " << violations << ", unanswered hazard states: " << unanswered
            << ", deadlock failures: " << deadlocks << '\n';
  const std::size_t all = failed + violations + unanswered + deadlocks;
  std::cout << "failed: " << all << '\n';
  std::cout << "time: " << std::fixed << std::setprecision(2) << secs << " s\n";
  for (const auto & n : notes) std::cout << "  " << n << '\n';
  return all == 0 ? Pass : Failed;
}

int cmd_refine(const Inputs & in, const std::string & abstract, const std::string & concrete,
               const std::string & report_path)
{
  if (!in.project.has_machine(abstract)) throw ModelError(ErrorCode::UnknownMachine, abstract);
  auto model = Model::build(in.project, concrete, in.config);
  const RefinementReport r = check_refinement(in.project.machine(abstract), *model);
  RecordSink sink(report_path);

  std::cout << abstract << " <- " << concrete << ": " << r.states << " states, " << r.pairs << " event firings\n";
  const std::pair<RefinementCheck, const char *> checks[] = {
    {RefinementCheck::AbstractInvariant, "(a) abstract invariants"},
    {RefinementCheck::GuardStrengthening, "(b) guard strengthening"},
    {RefinementCheck::ActionSimulation, "(c) action simulation"},
    {RefinementCheck::NewEventFrame, "(d) new events keep abstract variables"},
  };
  for (const auto & [c, label] : checks) {
    std::cout << "  " << std::left << std::setw(44) << label << (r.count(c) ? "FAIL" : "pass") << '\n';
  }
  for (const auto & f : r.failures) {
    std::cout << "  " << refinement_check_name(f.check) << (f.event.empty() ? "" : " in " + f.event) << " ("
              << join(f.labels) << ") at " << model->describe(f.witness.last()) << '\n';
    sink.put(refinement_record(*model, f));
  }
  sink.put(refinement_summary(r));
  std::cout << (r.ok() ? "refinement holds" : "refinement fails") << '\n';
  return r.ok() ? Pass : Failed;
}

int cmd_pos(const Inputs & in, const std::string & machine, const std::string & report_path)
{
  auto model = Model::build(in.project, machine, in.config);
  const PoReport r = report(in.project, *model);
  RecordSink sink(report_path);
  for (const auto & po : r.obligations) {
    std::cout << std::left << std::setw(11) << po_status_name(po.status) << po.id;
    if (po.counterexample) std::cout << "  at " << model->describe(*po.counterexample);
    std::cout << '\n';
    sink.put(po_record(*model, po));
  }
  sink.put(po_summary(r));
  std::cout << "total: " << r.total << ", discharged: " << r.discharged << ", vacuous: " << r.vacuous
            << ", failed: " << r.failed << " (" << std::fixed << std::setprecision(1) << r.millis << " ms)\n";
  return r.failed == 0 ? Pass : Failed;
}

int cmd_animate(const Inputs & in, const std::string & file, const std::string & trace_path)
{
  const Scenario sc = parse_scenario(slurp(file), file);
  const ScenarioReport r = run_scenario(sc, in.project, in.config);
  if (r.invalid) {
    std::cerr << file << (r.failed_line ? ":" + std::to_string(r.failed_line) : "") << ": " << r.reason << '\n';
    return Usage;
  }
  const Model & m = *r.model;
  std::cout << "machine " << r.machine << "\n  0 INITIALISATION  " << m.describe(r.trace.initial) << '\n';
  for (size_t i = 0; i < r.trace.steps.size(); ++i) {
    const auto & st = r.trace.steps[i];
    std::cout << "  " << i + 1 << ' ' << (st.kind == StepKind::Perturb ? "perturb " : "") << st.event;
    if (st.kind == StepKind::Environment) std::cout << " [environment]";
    std::cout << "  " << m.describe(st.post) << '\n';
  }
  const std::string out = trace_path.empty() ? fs::path(file).stem().string() + ".trace.jsonl" : trace_path;
  std::ofstream(out) << trace_to_jsonl(m, r.trace);
  std::cout << "trace: " << out << '\n';
  if (r.passed) {
    std::cout << "PASS (" << r.steps_executed << " steps)\n";
    return Pass;
  }
  std::cout << "FAIL at line " << r.failed_line << ": " << r.reason << '\n';
  return Failed;
}

Service * g_service = nullptr;

extern "C" void on_signal(int)
{
  if (g_service) g_service->stop();
}

int cmd_serve(Inputs in, const std::string & host, int port)
{
  Service svc(std::move(in.project), std::move(in.config));
  const int bound = svc.bind(host, port);
  if (bound < 0) {
    std::cerr << "cannot listen on " << host << ":" << port << " (port in use?)\n";
    return Usage;
  }
  g_service = &svc;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  std::cout << "listening on http://" << host << ":" << bound << std::endl;
  svc.listen();
  g_service = nullptr;
  return Pass;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Executable Event-B kernel: obligations, model checking, refinement and animation"};
  app.require_subcommand(1);

  std::vector<std::string> paths;
  std::string bounds, machine, mode_text = "closed", report, trace_dir = "evb-traces", trace_file;
  std::string abstract, concrete, scenario, host = "127.0.0.1";
  int port = 8080;

  auto * check = app.add_subcommand("check", "discharge obligations and explore the state space");
  check->add_option("--machine", machine, "only this machine");
  check->add_option("--mode", mode_text, "closed or driven")->check(CLI::IsMember({"closed", "driven"}));
  check->add_option("--bounds", bounds, "bounds file");
  check->add_option("--report", report, "write line-delimited JSON records here");
  check->add_option("--trace-dir", trace_dir, "directory for counterexample traces");
  check->add_option("paths", paths, "model files or directories (default: bundled corpus)");

  auto * refine = app.add_subcommand("refine", "check that CONCRETE refines ABSTRACT");
  refine->add_option("abstract", abstract)->required();
  refine->add_option("concrete", concrete)->required();
  refine->add_option("paths", paths);
  refine->add_option("--bounds", bounds, "bounds file");
  refine->add_option("--report", report, "write line-delimited JSON records here");

  auto * pos = app.add_subcommand("pos", "list proof obligations and their status");
  pos->add_option("--machine", machine)->required();
  pos->add_option("paths", paths);
  pos->add_option("--bounds", bounds, "bounds file");
  pos->add_option("--report", report, "write line-delimited JSON records here");

  auto * animate = app.add_subcommand("animate", "run a scenario file");
  animate->add_option("scenario", scenario)->required();
  animate->add_option("paths", paths);
  animate->add_option("--bounds", bounds, "bounds file");
  animate->add_option("--trace", trace_file, "trace output (default: <scenario>.trace.jsonl)");

  auto * serve = app.add_subcommand("serve", "serve the HTTP API");
  serve->add_option("--port", port, "0 picks a free port");
  serve->add_option("--host", host);
  serve->add_option("paths", paths);
  serve->add_option("--bounds", bounds, "bounds file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? Pass : Usage;
  }

  try {
    Inputs in = load_inputs(paths, bounds);
    if (check->parsed()) return cmd_check(in, machine, *parse_mode(mode_text), report, trace_dir);
    if (refine->parsed()) return cmd_refine(in, abstract, concrete, report);
    if (pos->parsed()) return cmd_pos(in, machine, report);
    if (animate->parsed()) return cmd_animate(in, scenario, trace_file);
    if (serve->parsed()) return cmd_serve(std::move(in), host, port);
  } catch (const ModelError & e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::ExplorationCapExceeded ? Failed : Usage;
  } catch (const std::exception & e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return Internal;
  }
  return Usage;
}
