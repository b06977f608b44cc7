#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "credsim/authcore.hpp"
#include "credsim/procmodel.hpp"

namespace credsim {

enum class TechniqueId { MimikatzSekurlsa, MimikatzLsaDumpInject, ComsvcsMiniDump, ProcdumpMa, TaskmgrDump };

std::span<const TechniqueId> list_techniques();
std::string_view to_string(TechniqueId technique);
std::optional<TechniqueId> technique_from_string(std::string_view text);

/// Keywords a stock mimikatz build is known by; obfuscation removes them.
const std::set<std::string>& known_bad_keywords();

struct BinaryProfile {
    std::string image_path;
    std::set<std::string> signature_keywords;
    bool obfuscated = false;

    friend bool operator==(const BinaryProfile&, const BinaryProfile&) = default;
};

/// Stock binary for each technique (mimikatz carries its keyword).
BinaryProfile default_profile(TechniqueId technique);

/// Renames the image and strips known-bad keywords. Idempotent; the attack
/// behavior of the binary is unchanged.
BinaryProfile obfuscate(const BinaryProfile& profile);

enum class RecordSource { LogonSession, Sam, DumpFile };

std::string_view to_string(RecordSource source);

struct CredentialRecord {
    std::string username;
    std::string domain;
    std::optional<std::string> plaintext;
    NtHash nt_hash;
    RecordSource source = RecordSource::LogonSession;
    std::size_t position = 0;
    std::optional<std::uint32_t> rid;  // SAM records only
    bool is_decoy = false;

    bool has_secret() const { return plaintext.has_value() || nt_hash.present(); }
};

enum class AttackStatus { Succeeded, Partial, Blocked, DetectedAndTerminated };

enum class BlockReason { NoDebugPrivilege, ProtectedProcess, GateClosed, InsufficientIntegrity };

std::string_view to_string(BlockReason reason);

enum class StepKind { PrivilegeDebug, OpenProcess, LoadModule, ApiCall, ReadSessions, SamEnumerate, WriteDump, ParseDump };

struct TraceStep {
    StepKind kind;
    std::string argument;  // e.g. "lsass", "samlib.dll", "LsaOpenPolicy/PolicyDnsDomainInformation"
    bool ok = true;        // false on the step where a gate said no

    std::string label() const;

    friend bool operator==(const TraceStep&, const TraceStep&) = default;
};

struct AttackResult {
    TechniqueId technique = TechniqueId::MimikatzSekurlsa;
    AttackStatus status = AttackStatus::Succeeded;
    std::optional<BlockReason> block_reason;
    std::vector<CredentialRecord> records;
    std::vector<TraceStep> trace;
    // lsadump header
    std::optional<std::string> domain_name;
    std::optional<std::string> domain_sid;
    std::optional<std::string> dump_artifact;

    std::string status_label() const;
};

/// Full, unobstructed trace of a technique.
std::vector<TraceStep> nominal_trace(TechniqueId technique);

AttackResult execute(World& world, TechniqueId technique, Pid attacker, const BinaryProfile& profile);

/// Name-based dispatch; throws UnknownTechnique.
AttackResult execute(World& world, std::string_view technique, Pid attacker, const BinaryProfile& profile);

AttackResult sekurlsa_logonpasswords(World& world, Pid attacker);
AttackResult lsadump_lsa_inject(World& world, Pid attacker);

/// `tool` must be one of the three dump techniques.
AttackResult memory_dump(World& world, Pid attacker, TechniqueId tool);

} // namespace credsim
