#pragma once

// Scenario files, batch runs and reports.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "byzset/adversary.hpp"
#include "byzset/optbridge.hpp"
#include "byzset/simnet.hpp"

namespace byzset {

enum class Mode {
  Certify,
  CheckRedundancy,
  RunConstrained,
  RunUnconstrained,
  RunAsync,
  RunCentralized,
  Optimize,
  AttackDemo,
};

enum class Property { B, C, ThreeF, D };

std::string mode_name(Mode m);
std::string property_name(Property p);

/// Scenario grammar (one statement per line, `#` comments, `;` also ends a
/// statement):
///   n <count> [f <bound>]     edge <src> <dst>           graph
///   universe <tokens>         agent <id>: <tokens>       set instance
///   domain <lo>..<hi>         agent <id> argmin: <pts>   cost profile
///   f <bound>
///   mode <certify|check_redundancy|run_constrained|run_unconstrained|
///         run_async|run_centralized|optimize|attack_demo>
///   faults <ids or -> | faults sweep_all
///   adversary <name> [args]
///   seed <u64>
///   max_rounds <k>            0 keeps the protocol default
///   schedule synchronous | random_delay <max> | starve <max> <from>:<to>...
///   property <b|c|3f|d>
struct Scenario {
  Mode mode = Mode::Certify;
  std::size_t f = 0;
  std::optional<CommGraph> graph;
  std::optional<SetInstance> instance;
  std::optional<CostProfile> profile;
  std::optional<AgentSet> faults = AgentSet{};  // nullopt = sweep_all
  AdversarySpec adversary;
  std::uint64_t seed = 0;
  std::size_t max_rounds = 0;
  DeliverySchedule schedule;  // schedule.seed is always `seed`
  std::optional<Property> property;

  bool sweep() const { return !faults.has_value(); }
  std::size_t agent_count() const;
  friend bool operator==(const Scenario& a, const Scenario& b);
};

/// Throws ParseError (with a line number) or ValidationError.
Scenario parse_scenario(std::string_view text);
/// Canonical text; parse_scenario(format_scenario(s)) == s.
std::string format_scenario(const Scenario& s);
/// Mode-specific field checks; parse_scenario calls this.
void validate_scenario(const Scenario& s);

struct RunRecord {
  std::uint64_t hash = 0;  // FNV-1a of `replay`
  std::string mode;
  std::string faults;
  std::string adversary;
  std::string outcome;
  bool ok = false;
  std::size_t rounds = 0;
  std::vector<std::pair<std::string, std::string>> details;  // outputs, witnesses
  std::optional<std::uint64_t> digest;                       // transcript digest
  std::string replay;                                        // single-run scenario, `;`-joined

  std::string transcript;  // full dump; kept in memory only, never emitted
  friend bool operator==(const RunRecord& a, const RunRecord& b);
};

struct Report {
  std::vector<RunRecord> records;  // sorted by hash
  std::size_t runs() const { return records.size(); }
  std::size_t failures() const;
  std::size_t max_rounds() const;
};

/// Identity of one sub-run, attached to errors raised inside it.
class SubRunError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The (F, adversary) pairs a scenario expands to: the explicit pair, or every
/// placement with |F| <= f crossed with the catalogue.
std::vector<std::pair<AgentSet, AdversarySpec>> expand_runs(const Scenario& s);
/// The scenario narrowed to one (F, adversary) pair.
Scenario single_run(const Scenario& s, AgentSet faulty, const AdversarySpec& adversary);

/// Runs every sub-run on up to `jobs` threads. Deterministic in the scenario.
Report run_scenario(const Scenario& s, std::size_t jobs = 1);
/// Parses a record's replay text and runs it; the result has one record.
RunRecord replay_record(const RunRecord& r);

enum class ReportFormat { Text, Structured };
std::string emit_report(const Report& r, ReportFormat format);
/// Reads the structured form back. Throws ParseError.
Report parse_report(std::string_view text);

/// 0 when every record is ok, 1 otherwise.
int exit_code(const Report& r);

}  // namespace byzset
