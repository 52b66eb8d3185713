// evb/corpus.cpp - the bundled hemodialysis model, its manifest and loaders
#include "evb/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "evb/errors.hpp"
#include "evb/parser.hpp"

namespace evb
{

// Generated at build time from the corpus directory.
extern const std::vector<std::pair<std::string, std::string>> & embedded_corpus_files();

namespace
{

[[noreturn]] void bad(const std::string & file, int line, const std::string & msg)
{
  throw ModelError(ErrorCode::ManifestSyntax, file + ":" + std::to_string(line) + ": " + msg);
}

std::vector<std::string> words(const std::string & line)
{
  std::istringstream in(line);
  std::vector<std::string> out;
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool to_int(const std::string & s, long long & out)
{
  try {
    size_t used = 0;
    out = std::stoll(s, &used);
    return used == s.size();
  } catch (const std::exception &) {
    return false;
  }
}

// Handles the lines shared by manifests and bounds files.
bool config_line(const std::vector<std::string> & w, CheckConfig & cfg, const std::string & file, int line)
{
  if (w[0] == "bound") {
    long long lo = 0;
    long long hi = 0;
    if (w.size() != 4 || !to_int(w[2], lo) || !to_int(w[3], hi)) bad(file, line, "expected: bound <var> <lo> <hi>");
    cfg.bounds[w[1]] = {lo, hi};
    return true;
  }
  if (w[0] == "const") {
    if (w.size() != 3) bad(file, line, "expected: const <name> <value>");
    cfg.constants[w[1]] = w[2];
    return true;
  }
  if (w[0] == "cap") {
    long long n = 0;
    if (w.size() != 2 || !to_int(w[1], n) || n <= 0) bad(file, line, "expected: cap <positive count>");
    cfg.max_states = static_cast<std::size_t>(n);
    return true;
  }
  return false;
}

template <typename F>
void each_line(const std::string & text, F && f)
{
  std::istringstream in(text);
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    auto w = words(raw);
    if (!w.empty()) f(w, raw, line);
  }
}

}  // namespace

void parse_config(const std::string & text, CheckConfig & cfg, const std::string & file)
{
  each_line(text, [&](const std::vector<std::string> & w, const std::string &, int line) {
    if (!config_line(w, cfg, file, line)) bad(file, line, "unknown directive '" + w[0] + "'");
  });
}

Manifest parse_manifest(const std::string & text, const std::string & file)
{
  Manifest m;
  each_line(text, [&](const std::vector<std::string> & w, const std::string & raw, int line) {
    const std::string & k = w[0];
    if (config_line(w, m.config, file, line)) return;
    if (k == "unit") {
      if (w.size() != 2) bad(file, line, "expected: unit <path>");
      m.units.push_back(w[1]);
    } else if (k == "chain") {
      if (w.size() < 3) bad(file, line, "a chain needs at least two machines");
      m.chains.emplace_back(w.begin() + 1, w.end());
    } else if (k == "expect") {
      // expect <machine> <mode> deadlock-free|deadlock-at-init
      if (w.size() != 4) bad(file, line, "expected: expect <machine> <mode> <deadlock verdict>");
      Expectation e;
      e.machine = w[1];
      const auto mode = parse_mode(w[2]);
      if (!mode) bad(file, line, "unknown mode '" + w[2] + "'");
      e.mode = *mode;
      if (w[3] == "deadlock-at-init") {
        e.deadlock_at_init = true;
      } else if (w[3] != "deadlock-free") {
        bad(file, line, "unknown deadlock verdict '" + w[3] + "'");
      }
      m.expectations.push_back(e);
    } else if (k == "vacuity-suspect") {
      if (w.size() < 3) bad(file, line, "expected: vacuity-suspect <machine> <invariant>...");
      auto & v = m.vacuity_suspect[w[1]];
      v.insert(v.end(), w.begin() + 2, w.end());
    } else if (k == "scenario") {
      if (w.size() != 3 || (w[2] != "pass" && w[2] != "fail")) bad(file, line, "expected: scenario <path> pass|fail");
      m.scenarios.push_back({w[1], w[2] == "pass"});
    } else if (k == "mutant") {
      if (w.size() < 4) bad(file, line, "expected: mutant <path> <machine> <failing check>...");
      MutantSpec s{w[1], w[2], {w.begin() + 3, w.end()}};
      for (const auto & c : s.fails) {
        const bool known = c == "pos" || c == "closed" || c == "driven" || c == "refine:abstract-invariant" ||
                           c == "refine:guard-strengthening" || c == "refine:action-simulation" ||
                           c == "refine:new-event-frame";
        if (!known) bad(file, line, "unknown check '" + c + "'");
      }
      m.mutants.push_back(std::move(s));
    } else if (k == "note") {
      m.notes.push_back(raw.substr(raw.find("note") + 4));
    } else {
      bad(file, line, "unknown directive '" + k + "'");
    }
  });
  return m;
}

Project load_sources(const std::vector<std::pair<std::string, std::string>> & files)
{
  std::vector<Unit> units;
  std::string errors;
  for (const auto & [name, text] : files) {
    auto r = parse_source(text, name);
    for (const auto & e : r.errors) errors += (errors.empty() ? "" : "\n") + e.message();
    for (auto & u : r.units) units.push_back(std::move(u));
  }
  if (!errors.empty()) throw ModelError(ErrorCode::MalformedDefinition, errors);
  return Project::resolve(std::move(units));
}

namespace
{

std::string read_file(const std::filesystem::path & p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ModelError(ErrorCode::UnresolvedReference, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

Project load_paths(const std::vector<std::filesystem::path> & paths)
{
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto & p : paths) {
    if (std::filesystem::is_directory(p)) {
      std::vector<std::filesystem::path> found;
      for (const auto & e : std::filesystem::recursive_directory_iterator(p)) {
        if (e.is_regular_file() && e.path().extension() == ".ebs") found.push_back(e.path());
      }
      std::sort(found.begin(), found.end());
      for (const auto & f : found) files.emplace_back(f.string(), read_file(f));
    } else {
      files.emplace_back(p.string(), read_file(p));
    }
  }
  return load_sources(files);
}

const std::string & Corpus::text(const std::string & path) const
{
  auto it = files.find(path);
  if (it == files.end()) throw ModelError(ErrorCode::UnresolvedReference, "corpus has no file " + path);
  return it->second;
}

Project Corpus::with_mutant(const MutantSpec & m) const
{
  std::vector<std::pair<std::string, std::string>> sources;
  for (const auto & u : manifest.units) sources.emplace_back(u, text(u));
  sources.emplace_back(m.file, text(m.file));
  return load_sources(sources);
}

namespace
{

Corpus assemble(std::map<std::string, std::string> files)
{
  auto it = files.find("manifest");
  if (it == files.end()) throw ModelError(ErrorCode::ManifestSyntax, "corpus has no manifest");
  Corpus c{parse_manifest(it->second), Project{}, std::move(files)};
  std::vector<std::pair<std::string, std::string>> sources;
  for (const auto & u : c.manifest.units) sources.emplace_back(u, c.text(u));
  c.project = load_sources(sources);
  return c;
}

}  // namespace

const Corpus & load_corpus()
{
  static const Corpus corpus = [] {
    std::map<std::string, std::string> files;
    for (const auto & [k, v] : embedded_corpus_files()) files[k] = v;
    return assemble(std::move(files));
  }();
  return corpus;
}

Corpus load_corpus_dir(const std::filesystem::path & dir)
{
  std::map<std::string, std::string> files;
  for (const auto & e : std::filesystem::recursive_directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    files[std::filesystem::relative(e.path(), dir).generic_string()] = read_file(e.path());
  }
  return assemble(std::move(files));
}

std::vector<std::string> monitor_events(const FlatMachine & m)
{
  std::vector<std::string> out;
  for (const auto * e : m.model_events()) {
    if (e->action_for("alarm")) out.push_back(e->name);
  }
  return out;
}

}  // namespace evb
