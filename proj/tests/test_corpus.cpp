// tests/test_corpus.cpp - manifest expectations, mutants and thresholds
#include <gtest/gtest.h>

#include <regex>

#include "evb/animator.hpp"
#include "evb/corpus.hpp"
#include "evb/errors.hpp"
#include "evb/parser.hpp"
#include "evb/printer.hpp"
#include "mutants.hpp"

using namespace evb;

namespace
{

const Corpus & corpus() { return load_corpus(); }

TEST(Corpus, Shape)
{
  const auto & p = corpus().project;
  EXPECT_EQ(p.context_names().size(), 10u);
  EXPECT_EQ(p.machine_names().size(), 11u);
  EXPECT_EQ(p.units().size(), 21u);
  EXPECT_EQ(corpus().manifest.mutants.size(), 10u);
  EXPECT_EQ(corpus().manifest.scenarios.size(), 17u);
}

TEST(Corpus, ChainsMatchRefines)
{
  const auto & edges = corpus().project.refinement_edges();
  size_t linked = 0;
  for (const auto & chain : corpus().manifest.chains) {
    EXPECT_EQ(edges.count(chain.front()), 0u);
    for (size_t i = 1; i < chain.size(); ++i, ++linked) EXPECT_EQ(edges.at(chain[i]), chain[i - 1]);
  }
  EXPECT_EQ(linked, edges.size());
}

TEST(Corpus, ObligationsAllHold)
{
  for (const auto & name : corpus().project.machine_names()) {
    auto m = Model::build(corpus().project, name, corpus().manifest.config);
    const auto r = report(corpus().project, *m);
    EXPECT_EQ(r.failed, 0u) << name;
    EXPECT_GT(r.total, 0u) << name;
  }
}

// A suspect implication can never hold with its antecedent true: its
// antecedent and consequent are jointly unsatisfiable over the whole domain.
TEST(Corpus, VacuitySuspects)
{
  for (const auto & [machine, labels] : corpus().manifest.vacuity_suspect) {
    auto m = Model::build(corpus().project, machine, corpus().manifest.config);
    for (const auto & label : labels) {
      const CompiledPredicate * inv = nullptr;
      for (const auto & i : m->invariants()) {
        if (i.label == label) inv = &i;
      }
      ASSERT_NE(inv, nullptr) << machine << " " << label;
      ASSERT_EQ(inv->body->kind, ExprKind::Implies) << label;
      const auto both = m->compile_predicate(Expr::make(ExprKind::And, inv->body->args));
      const size_t n = m->variables().size();
      State s(n);
      for (size_t i = 0; i < n; ++i) s[i] = m->range(static_cast<int>(i)).lo;
      size_t satisfying = 0;
      for (bool more = true; more;) {
        satisfying += both.holds(s.data());
        more = false;
        for (size_t i = n; i-- > 0;) {
          if (s[i] < m->range(static_cast<int>(i)).hi) {
            ++s[i];
            more = true;
            break;
          }
          s[i] = m->range(static_cast<int>(i)).lo;
        }
      }
      EXPECT_EQ(satisfying, 0u) << machine << " " << label;
    }
  }
}

TEST(Corpus, DiskCopyMatchesEmbedded)
{
  const Corpus disk = load_corpus_dir(std::filesystem::path(EVB_TEST_DIR) / ".." / "corpus");
  EXPECT_TRUE(structurally_equal(disk.project, corpus().project));
  EXPECT_EQ(disk.manifest.units, corpus().manifest.units);
}

TEST(Corpus, PrettyPrintIsStable)
{
  for (const auto & u : corpus().project.units()) {
    const std::string once = pretty_print(u);
    const auto again = parse_or_throw(once);
    ASSERT_EQ(again.size(), 1u);
    EXPECT_EQ(pretty_print(again[0]), once);
  }
}

TEST(Corpus, ScenarioVerdicts)
{
  for (const auto & spec : corpus().manifest.scenarios) {
    const auto r = run_scenario(parse_scenario(corpus().text(spec.file), spec.file), corpus().project,
                                corpus().manifest.config);
    EXPECT_EQ(r.passed, spec.pass) << spec.file << ": " << r.reason;
    EXPECT_FALSE(r.invalid) << spec.file << ": " << r.reason;
  }
}

TEST(Corpus, UnmutatedMachinesPassEverything)
{
  for (const auto & name : corpus().project.machine_names()) {
    const auto out = mutants::evaluate(corpus().project, name, corpus().manifest.config);
    EXPECT_TRUE(out.failed.empty()) << name << ": " << mutants::join(out.failed);
  }
}

class Mutant : public testing::TestWithParam<size_t>
{
};

TEST_P(Mutant, FailsExactlyTheListedChecks)
{
  const auto & mu = corpus().manifest.mutants.at(GetParam());
  const auto out = mutants::evaluate(corpus(), mu);
  const std::set<std::string> expected(mu.fails.begin(), mu.fails.end());
  EXPECT_EQ(mutants::join(out.failed), mutants::join(expected)) << mu.machine;
  for (const auto & p : out.problems) ADD_FAILURE() << p;
}

INSTANTIATE_TEST_SUITE_P(Corpus, Mutant, testing::Range<size_t>(0, 10),
                         [](const testing::TestParamInfo<size_t> & info) {
                           return load_corpus().manifest.mutants.at(info.param).machine;
                         });

// The requirement thresholds appear where the monitors and their
// invariants need them.
TEST(Corpus, ThresholdLiterals)
{
  struct Expect
  {
    const char * machine;
    const char * label_regex;
    const char * text;
  };
  const std::vector<Expect> expects = {
    {"MCP1", "inv7", "fillingBloodVolume > 400"},
    {"MCP1", "fillingBloodVolumeMonitoring/grd1", "fillingBloodVolume > 400"},
    {"MCP2", "inv10", "bloodPumpingTime > 310"},
    {"MCP2", "changeMode/grd2", "bloodPumpingTime > 310"},
    {"MBP0", "inv5", "noFlowDetectionTime > 120"},
    {"MBP0", "noFlowMonitoring/grd2", "noFlowDetectionTime >= 120"},
    {"MBP1", "inv8", "actualBloodFlow < 7 * SetBloodFlow / 10"},
    {"MBP1", "lessBloodFlowMonitoring/grd3", "actualBloodFlow < 7 * SetBloodFlow / 10"},
    {"MTM0", "inv6", "dialysateTemperature > 41"},
    {"MTM0", "disconnectDialyserPreparation/grd2", "dialysateTemperature > 41"},
    {"MTM0", "disconnectDialyserTherapy/grd2", "dialysateTemperature > 41"},
    {"MTM1", "inv8", "dialysateTemperature < 33"},
    {"MTM1", "disconnectDialyserTherapyII/grd2", "dialysateTemperature < 33"},
    {"MTM2", "disconnectDialyserTherapyIII/grd4", "dialysateTemperature > 42"},
    {"MTM3", "disconnectDialyserTherapyIV/grd4", "dialysateTemperature < 33"},
  };
  // Pretty-printed predicates with redundant parentheses dropped.
  auto text_of = [](const ExprPtr & e) { return std::regex_replace(to_text(*e), std::regex("[()]"), ""); };
  for (const auto & x : expects) {
    const auto & m = corpus().project.machine(x.machine);
    std::string label = x.label_regex;
    std::vector<std::string> texts;
    if (auto slash = label.find('/'); slash != std::string::npos) {
      const auto * e = m.find_event(label.substr(0, slash));
      ASSERT_NE(e, nullptr) << label;
      for (const auto & g : e->guards) {
        if (g.label == label.substr(slash + 1)) texts.push_back(text_of(g.body));
      }
    } else {
      for (const auto & inv : m.invariants) {
        if (inv.label == label) texts.push_back(text_of(inv.body));
      }
    }
    ASSERT_EQ(texts.size(), 1u) << x.machine << " " << label;
    EXPECT_NE(texts[0].find(x.text), std::string::npos) << x.machine << " " << label << ": " << texts[0];
  }
}

// Each monitor raises the alarm of its requirement.
TEST(Corpus, AlarmMapping)
{
  const std::map<std::string, std::map<std::string, std::string>> expected = {
    {"MCP0", {{"bloodFlowMonitoring", "ALM382"}}},
    {"MCP1", {{"bloodFlowMonitoring", "ALM382"}, {"fillingBloodVolumeMonitoring", "ALM344"}}},
    {"MCP3", {{"bloodFlowMonitoring", "ALM382"}, {"fillingBloodVolumeMonitoring", "ALM344"},
              {"bloodFlowDirectionMonitoring", "ALM737"}}},
    {"MBP0", {{"noFlowMonitoring", "ALM382"}}},
    {"MBP1", {{"noFlowMonitoring", "ALM382"}, {"lessBloodFlowMonitoring", "ALM755"}}},
    {"MBP2", {{"noFlowMonitoring", "ALM382"}, {"lessBloodFlowMonitoring", "ALM755"},
              {"bloodFlowDirectionMonitoring", "ALM737"}}},
    {"MTM0", {{"disconnectDialyserPreparation", "ALM377"}, {"disconnectDialyserTherapy", "ALM639"}}},
    {"MTM1", {{"disconnectDialyserPreparation", "ALM377"}, {"disconnectDialyserTherapy", "ALM639"},
              {"disconnectDialyserTherapyII", "ALM757"}}},
  };
  for (const auto & [machine, monitors] : expected) {
    const auto & m = corpus().project.machine(machine);
    std::map<std::string, std::string> actual;
    for (const auto & name : monitor_events(m)) {
      actual[name] = to_text(*m.find_event(name)->action_for("alarm")->value);
    }
    EXPECT_EQ(actual, monitors) << machine;
  }
  // Environment events never write the alarm.
  for (const auto & name : corpus().project.machine_names()) {
    for (const auto * e : corpus().project.machine(name).environment_events()) {
      EXPECT_EQ(e->action_for("alarm"), nullptr) << name << " " << e->name;
    }
  }
}

TEST(Corpus, MonitorsCoveredInDrivenMode)
{
  for (const auto & name : corpus().project.machine_names()) {
    auto m = Model::build(corpus().project, name, corpus().manifest.config);
    const auto r = explore(*m, Mode::Driven);
    EXPECT_EQ(r.deadlock_states, 0u) << name;
    for (const auto & monitor : monitor_events(m->machine())) {
      auto it = r.coverage.find(monitor);
      ASSERT_NE(it, r.coverage.end()) << name << " " << monitor;
      EXPECT_GT(it->second, 0u) << name << " " << monitor;
    }
  }
}

}  // namespace
