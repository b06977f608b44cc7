#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "credsim/attacks.hpp"
#include "credsim/defenses.hpp"
#include "credsim/scenario.hpp"

namespace credsim {

inline constexpr int kReportSchemaVersion = 1;

struct Outcome {
    TechniqueId technique = TechniqueId::MimikatzSekurlsa;
    std::string status;  // AttackResult::status_label()
    std::size_t plaintext_yield = 0;
    std::size_t hash_yield = 0;
    std::size_t decoy_hits = 0;
    std::size_t events = 0;

    /// Real (non-decoy) records carrying at least one secret.
    std::size_t credential_yield = 0;

    friend bool operator==(const Outcome&, const Outcome&) = default;
};

Outcome summarize(const AttackResult& result, std::size_t detection_events);

/// Canonical one-line form; what "byte-identical outcome" compares.
std::string serialize_outcome(const Outcome& outcome);

struct AttackRun {
    AttackSpec spec;
    Pid attacker_pid = 0;
    AttackResult result;
    Outcome outcome;
};

struct LogonAttemptResult {
    std::string username;
    std::string result;  // "Success" or the error code name
};

struct Report {
    std::string scenario_name;
    std::uint64_t seed = 0;
    Pid lsass_pid = 0;
    std::vector<AttackRun> runs;
    std::vector<LogonAttemptResult> attempts;
    std::optional<LogonAttemptResult> relogin;  // probe after logout
    std::vector<DetectionEvent> event_log;
    std::string final_world_digest;
    std::vector<std::string> violations;  // invariants broken during the run
    std::optional<std::string> error;      // set when the run aborted

    bool ok() const { return !error && violations.empty(); }
};

/// Builds the boot-time world of a fixture: SAM plus lsass.
World build_world(const Fixture& fixture);

/// Install, fixture processes and logons, attacks in order, logout.
/// Module errors are caught and reported in Report::error.
Report run_scenario(const Scenario& scenario);

/// Canonical JSON of the world state, hashed for the report digest.
std::string serialize_world(const World& world);
std::string world_digest(const World& world);

/// Invariant checks used by run_scenario; empty when the world is sound.
std::vector<std::string> check_world_invariants(const World& world);
std::vector<std::string> check_result_invariants(const AttackResult& result, const World& world);

enum class ReportFormat { Text, Json };

std::optional<ReportFormat> report_format_from_string(std::string_view text);

std::string render_report(const Report& report, ReportFormat format);

/// Throws UnknownFormat.
std::string render_report(const Report& report, std::string_view format);

struct PolicyConfig {
    std::string name;
    std::vector<DefensePolicy> policies;
};

struct OutcomeMatrix {
    std::vector<TechniqueId> rows;
    std::vector<PolicyConfig> columns;
    std::vector<Outcome> cells;  // row-major

    const Outcome& at(std::size_t row, std::size_t column) const { return cells.at(row * columns.size() + column); }
    Outcome& at(std::size_t row, std::size_t column) { return cells.at(row * columns.size() + column); }
};

/// Scenario used for one matrix cell: base fixture, the config's policies and
/// a single attack of `technique`.
Scenario cell_scenario(const Scenario& base, TechniqueId technique, const PolicyConfig& config);

/// Runs every (technique, config) cell on a fresh world. `threads` = 0 picks
/// the hardware concurrency; the result does not depend on it.
OutcomeMatrix build_matrix(const Scenario& base, std::span<const PolicyConfig> configs, unsigned threads = 0);

struct MonotonicityViolation {
    TechniqueId technique;
    std::string smaller_config;
    std::string larger_config;
    std::string metric;
    std::size_t smaller_yield = 0;
    std::size_t larger_yield = 0;

    std::string describe() const;
};

/// For every pair of columns D ⊆ D′ (by policy inclusion) and every row,
/// reports each yield metric that grows from D to D′.
std::vector<MonotonicityViolation> check_monotonicity(const OutcomeMatrix& matrix);

/// `[name]` sections holding policy lines; an empty section is the
/// defenseless configuration.
std::vector<PolicyConfig> parse_configs(std::string_view text, const std::set<std::string>& allowlist = {});

/// All subsets of `universe` with at most `max_size` policies, smallest first.
std::vector<PolicyConfig> combine_configs(std::span<const PolicyConfig> singles, std::size_t max_size);

std::string render_matrix(const OutcomeMatrix& matrix, ReportFormat format);

} // namespace credsim
