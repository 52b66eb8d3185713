// evb/obligations.hpp - proof obligations and their bounded discharge
#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evb/semantics.hpp"

namespace evb
{

enum class PoKind { INV, WD, GRD, EQL, VAR, THM };
enum class PoStatus { Pending, Discharged, Failed, Vacuous };

const char * po_kind_name(PoKind k);
const char * po_status_name(PoStatus s);

struct ProofObligation
{
  std::string id;  // Machine/event/label/KIND
  PoKind kind = PoKind::INV;
  std::string event;
  std::string label;
  std::vector<ExprPtr> hypotheses;
  ExprPtr goal;

  PoStatus status = PoStatus::Pending;
  std::optional<State> counterexample;
  std::size_t nodes = 0;  // search nodes spent discharging
};

/// Obligations of a flattened machine. `abstract` is the machine it refines
/// (GRD and EQL need it), or null.
std::vector<ProofObligation> generate_pos(const Model & m, const FlatMachine * abstract);
std::vector<ProofObligation> generate_pos(const Project & p, const Model & m);

/// Enumerates the bounded state space: discharged when the goal holds in
/// every state satisfying the hypotheses, failed with the first violating
/// state (declaration order, values ascending), vacuous when no state
/// satisfies the hypotheses. Throws ExplorationCapExceeded.
PoStatus discharge(ProofObligation & po, const Model & m);

struct PoReport
{
  std::string machine;
  std::size_t total = 0;
  std::size_t discharged = 0;
  std::size_t failed = 0;
  std::size_t vacuous = 0;
  double millis = 0;
  std::vector<ProofObligation> obligations;
};

PoReport report(const Project & p, const Model & m);

/// True when every hypothesis holds and the goal does not (or is not well
/// defined) in `s`. Independent re-check used for counterexample validation.
bool is_counterexample(const ProofObligation & po, const Model & m, const State & s);

}  // namespace evb
