// evb/corpus.hpp - the bundled hemodialysis model, its manifest and loaders
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "evb/checker.hpp"
#include "evb/project.hpp"
#include "evb/semantics.hpp"

namespace evb
{

struct Expectation
{
  std::string machine;
  Mode mode = Mode::Closed;
  bool deadlock_at_init = false;  // otherwise deadlock-free
};

struct MutantSpec
{
  std::string file;
  std::string machine;
  // Checks that fail (pos, closed, driven, refine:<check name>); the rest pass.
  std::vector<std::string> fails;
};

struct ScenarioSpec
{
  std::string file;
  bool pass = true;
};

struct Manifest
{
  std::vector<std::string> units;  // relative paths
  CheckConfig config;
  std::vector<std::vector<std::string>> chains;
  std::vector<Expectation> expectations;
  std::map<std::string, std::vector<std::string>> vacuity_suspect;  // machine -> invariants
  std::vector<ScenarioSpec> scenarios;
  std::vector<MutantSpec> mutants;
  std::vector<std::string> notes;
};

/// Throws ModelError(ManifestSyntax).
Manifest parse_manifest(const std::string & text, const std::string & file = "manifest");

/// Reads `bound`, `const` and `cap` lines into `cfg`; other lines are
/// errors. Throws ModelError(ManifestSyntax).
void parse_config(const std::string & text, CheckConfig & cfg, const std::string & file = "<bounds>");

/// Parses every file and resolves the lot. Parse errors are collected into
/// one ModelError(MalformedDefinition).
Project load_sources(const std::vector<std::pair<std::string, std::string>> & files);

/// Files or directories (every *.ebs below, sorted).
Project load_paths(const std::vector<std::filesystem::path> & paths);

struct Corpus
{
  Manifest manifest;
  Project project;
  std::map<std::string, std::string> files;  // relative path -> text

  const std::string & text(const std::string & path) const;
  /// The corpus units plus one mutant file.
  Project with_mutant(const MutantSpec & m) const;
};

/// The copy compiled into the library.
const Corpus & load_corpus();

/// A corpus directory on disk with a `manifest` file.
Corpus load_corpus_dir(const std::filesystem::path & dir);

/// Model events that assign `alarm`.
std::vector<std::string> monitor_events(const FlatMachine & m);

}  // namespace evb
