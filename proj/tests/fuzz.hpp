// tests/fuzz.hpp - random parser inputs: raw bytes, token soup, damaged corpus files
#pragma once

#include <random>
#include <string>
#include <vector>

#include "evb/corpus.hpp"
#include "evb/errors.hpp"
#include "evb/parser.hpp"
#include "evb/printer.hpp"

namespace fuzz
{

struct Stats
{
  std::size_t inputs = 0;
  std::size_t parsed = 0;
  std::size_t rejected = 0;
  std::vector<std::string> problems;  // crashes, stray spans, broken round trips
};

inline bool span_inside(const evb::SourceSpan & sp, const std::vector<std::size_t> & line_lengths)
{
  if (sp.start.line < 1 || sp.start.column < 1) return false;
  const auto line = static_cast<std::size_t>(sp.start.line);
  // A position just past the last line marks end of input.
  if (line > line_lengths.size() + 1) return false;
  const std::size_t len = line <= line_lengths.size() ? line_lengths[line - 1] : 0;
  return static_cast<std::size_t>(sp.start.column) <= len + 1 && !(sp.end < sp.start);
}

inline std::vector<std::size_t> line_lengths(const std::string & s)
{
  std::vector<std::size_t> out{0};
  for (char c : s) {
    if (c == '\n') out.push_back(0);
    else ++out.back();
  }
  return out;
}

inline Stats run(std::size_t count, std::uint64_t seed)
{
  const auto & corpus = evb::load_corpus();
  std::vector<std::string> seeds;
  for (const auto & [path, text] : corpus.files) {
    if (path.size() > 4 && path.substr(path.size() - 4) == ".ebs") seeds.push_back(text);
  }
  const std::vector<std::string> tokens{
    "MACHINE", "CONTEXT", "EXTENDS", "REFINES", "SEES", "SETS", "CONSTANTS", "AXIOMS", "THEOREMS", "VARIABLES",
    "INVARIANTS", "VARIANT", "EVENTS", "Event", "Where", "Then", "End", "END", "environment", "convergent",
    "&", "|", "=>", "not", "=", "/=", "<", "<=", ">", ">=", "+", "-", "*", "/", ":", "|->", "-->", "{", "}",
    "(", ")", ",", ":=", "partition", "BOOL", "NAT", "TRUE", "FALSE", "x", "inv1", "grd1", "act1", "0",
    "99999999999999999999999", "//", "\n", " ", "\t", "\xff", "\xe2\x88\xa7", "INITIALISATION"};

  std::mt19937_64 rng(seed);
  auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };

  Stats st;
  for (std::size_t i = 0; i < count; ++i) {
    std::string input;
    switch (i % 3) {
      case 0: {
        input.resize(pick(200));
        for (auto & c : input) c = static_cast<char>(pick(256));
        break;
      }
      case 1: {
        for (std::size_t n = pick(60); n > 0; --n) input += tokens[pick(tokens.size())] + " ";
        break;
      }
      default: {
        input = seeds[pick(seeds.size())];
        for (std::size_t n = 1 + pick(4); n > 0 && !input.empty(); --n) {
          const std::size_t at = pick(input.size());
          switch (pick(4)) {
            case 0: input.erase(at, 1 + pick(20)); break;
            case 1: input.insert(at, tokens[pick(tokens.size())]); break;
            case 2: input[at] = static_cast<char>(pick(256)); break;
            default: input.resize(at); break;
          }
        }
      }
    }
    ++st.inputs;
    const std::string tag = "input #" + std::to_string(i);

    evb::ParseResult r;
    try {
      r = evb::parse_source(input, "fuzz");
    } catch (const std::exception & e) {
      st.problems.push_back(tag + " threw: " + e.what());
      continue;
    }
    const auto lens = line_lengths(input);
    for (const auto & e : r.errors) {
      if (!span_inside(e.span, lens)) st.problems.push_back(tag + " span outside input: " + e.message());
    }
    if (!r.ok()) {
      ++st.rejected;
      continue;
    }
    ++st.parsed;
    for (const auto & u : r.units) {
      const auto again = evb::parse_source(evb::pretty_print(u), "printed");
      if (!again.ok() || !evb::structurally_equal(u, again.units.at(0))) {
        st.problems.push_back(tag + " does not survive printing");
      }
    }
    try {
      evb::Project::resolve(r.units);
    } catch (const evb::ModelError &) {
    } catch (const std::exception & e) {
      st.problems.push_back(tag + " resolve threw: " + e.what());
    }
  }
  return st;
}

}  // namespace fuzz
