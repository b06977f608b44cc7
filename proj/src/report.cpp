#include <cstdio>
#include <sstream>

#include <json.hpp>

#include "credsim/error.hpp"
#include "credsim/harness.hpp"

namespace credsim {

namespace {

using nlohmann::ordered_json;

bool is_mimikatz(TechniqueId t)
{
    return t == TechniqueId::MimikatzSekurlsa || t == TechniqueId::MimikatzLsaDumpInject;
}

std::string rid_hex(std::uint32_t rid)
{
    char buf[16];
    std::snprintf(buf, sizeof buf, "%08x", rid);
    return buf;
}

std::string join_trace(const std::vector<TraceStep>& trace)
{
    std::string out;
    for (const auto& step : trace) {
        if (!out.empty()) {
            out += " > ";
        }
        out += step.label();
        if (!step.ok) {
            out += "!";
        }
    }
    return out.empty() ? "(empty)" : out;
}

void session_block(std::ostream& out, const CredentialRecord& r)
{
    out << "User Name         : " << r.username << "\n"
        << "Domain            : " << r.domain << "\n"
        << "        msv :\n"
        << "         * Username : " << r.username << "\n"
        << "         * Domain   : " << r.domain << "\n"
        << "         * NTLM     : " << (r.nt_hash.present() ? r.nt_hash.hex() : "(null)") << "\n"
        << "        wdigest :\n"
        << "         * Username : " << r.username << "\n"
        << "         * Domain   : " << r.domain << "\n"
        << "         * Password : " << r.plaintext.value_or("(null)") << "\n";
}

void sam_block(std::ostream& out, const CredentialRecord& r)
{
    const std::uint32_t rid = r.rid.value_or(0);
    out << "RID : " << rid_hex(rid) << " (" << rid << ")\n"
        << "User : " << r.username << "\n\n"
        << "* Primary\n";
    if (r.nt_hash.present()) {
        out << "  NTLM : " << r.nt_hash.hex() << "\n"
            << "  LM :\n"
            << "  Hash NTLM: " << r.nt_hash.hex() << "\n";
    } else {
        out << "  NTLM :\n"
            << "  LM :\n";
    }
}

// What the tool prints when `step` is the one that failed.
std::string failure_line(TechniqueId t, const TraceStep& step, std::optional<BlockReason> reason)
{
    switch (step.kind) {
    case StepKind::PrivilegeDebug: return "ERROR kuhl_m_privilege_simple ; RtlAdjustPrivilege (20) c0000061";
    case StepKind::OpenProcess:
        if (t == TechniqueId::MimikatzSekurlsa) {
            return "ERROR kuhl_m_sekurlsa_acquireLSA ; Handle on memory (0x00000005)";
        }
        if (t == TechniqueId::MimikatzLsaDumpInject) {
            return "ERROR kuhl_m_lsadump_lsa_getHandle ; OpenProcess (0x00000005)";
        }
        return "Error opening lsass.exe: Access is denied. (0x00000005)";
    case StepKind::ApiCall:
        if (reason == BlockReason::GateClosed) {
            return "ERROR kuhl_m_lsadump_lsa ; SamConnect c0000022";
        }
        break;
    default: break;
    }
    return "ERROR " + step.label();
}

void render_steps(std::ostream& out, const AttackRun& run, Pid lsass_pid)
{
    const AttackResult& r = run.result;
    const TechniqueId t = r.technique;
    bool command_shown = false;

    auto show_command = [&] {
        if (command_shown) {
            return;
        }
        command_shown = true;
        switch (t) {
        case TechniqueId::MimikatzSekurlsa: out << "mimikatz # sekurlsa::logonpasswords\n"; break;
        case TechniqueId::MimikatzLsaDumpInject: out << "mimikatz # lsadump::lsa /inject\n"; break;
        case TechniqueId::ProcdumpMa:
            out << "> " << run.spec.profile.image_path << " -ma " << lsass_pid << " "
                << r.dump_artifact.value_or("lsass.dmp") << "\n";
            break;
        case TechniqueId::ComsvcsMiniDump:
            out << "> " << run.spec.profile.image_path << " C:\\Windows\\System32\\comsvcs.dll, MiniDump " << lsass_pid
                << " " << r.dump_artifact.value_or("lsass.dmp") << " full\n";
            break;
        case TechniqueId::TaskmgrDump: out << "> Task Manager: lsass.exe > Create dump file\n"; break;
        }
    };

    for (const auto& step : r.trace) {
        if (step.kind == StepKind::PrivilegeDebug) {
            if (is_mimikatz(t)) {
                out << "mimikatz # privilege::debug\n"
                    << (step.ok ? "Privilege '20' OK" : failure_line(t, step, r.block_reason)) << "\n\n";
            } else {
                out << "SeDebugPrivilege " << (step.ok ? "enabled" : "not held") << "\n";
            }
            continue;
        }
        show_command();
        if (!step.ok) {
            if (r.status == AttackStatus::DetectedAndTerminated) {
                out << "[process terminated at " << step.label() << "]\n";
            } else {
                out << failure_line(t, step, r.block_reason) << "\n";
            }
            continue;
        }
        if (step.kind == StepKind::WriteDump && r.dump_artifact) {
            out << "dump written: " << *r.dump_artifact << "\n\n";
        }
        if (step.kind == StepKind::ParseDump && r.dump_artifact) {
            out << "mimikatz # sekurlsa::minidump " << *r.dump_artifact << "\n"
                << "mimikatz # sekurlsa::logonpasswords\n";
        }
    }

    if (r.trace.empty()) {
        out << (r.status == AttackStatus::DetectedAndTerminated ? "[process terminated at launch]"
                                                                : "[not started: integrity too low]")
            << "\n";
    }

    if (r.domain_name) {
        out << "Domain : " << *r.domain_name << " / " << r.domain_sid.value_or("") << "\n";
    }
    for (const auto& rec : r.records) {
        out << "\n";
        if (rec.source == RecordSource::Sam) {
            sam_block(out, rec);
        } else {
            session_block(out, rec);
        }
    }
}

std::string render_text(const Report& report)
{
    std::ostringstream out;
    out << "scenario: " << report.scenario_name << " (seed " << report.seed << ")\n";
    if (report.error) {
        out << "error: " << *report.error << "\n";
    }

    for (std::size_t i = 0; i < report.runs.size(); ++i) {
        const AttackRun& run = report.runs[i];
        out << "\n== attack " << i + 1 << "/" << report.runs.size() << ": " << to_string(run.result.technique)
            << " as " << run.spec.profile.image_path << " (pid " << run.attacker_pid << ")\n\n";
        render_steps(out, run, report.lsass_pid);
        out << "\nstatus  : " << run.result.status_label() << "\ntrace   : " << join_trace(run.result.trace) << "\n"
            << "outcome : " << serialize_outcome(run.outcome) << "\n";
    }

    if (!report.attempts.empty()) {
        out << "\n== logon attempts\n";
        for (const auto& a : report.attempts) {
            out << a.username << " : " << a.result << "\n";
        }
    }
    if (report.relogin) {
        out << "\n== logon after logout\n" << report.relogin->username << " : " << report.relogin->result << "\n";
    }

    out << "\n== detection events\n";
    if (report.event_log.empty()) {
        out << "(none)\n";
    }
    for (const auto& e : report.event_log) {
        out << "#" << e.seq << " [" << e.policy << "] " << to_string(e.kind);
        if (e.subject_pid != 0) {
            out << " pid " << e.subject_pid << " " << e.subject_image;
        }
        out << ": " << e.message << "\n";
    }

    if (!report.violations.empty()) {
        out << "\n== invariant violations\n";
        for (const auto& v : report.violations) {
            out << v << "\n";
        }
    }
    out << "\nworld digest: " << (report.final_world_digest.empty() ? "(none)" : report.final_world_digest) << "\n";
    return out.str();
}

ordered_json outcome_json(const Outcome& o)
{
    return {{"technique", to_string(o.technique)}, {"status", o.status},
            {"plaintext_yield", o.plaintext_yield}, {"hash_yield", o.hash_yield},
            {"credential_yield", o.credential_yield}, {"decoy_hits", o.decoy_hits},
            {"events", o.events}};
}

ordered_json record_json(const CredentialRecord& r)
{
    return {{"position", r.position},
            {"username", r.username},
            {"domain", r.domain},
            {"rid", r.rid ? ordered_json(*r.rid) : ordered_json()},
            {"plaintext", r.plaintext ? ordered_json(*r.plaintext) : ordered_json()},
            {"nt_hash", r.nt_hash.present() ? ordered_json(r.nt_hash.hex()) : ordered_json()},
            {"source", to_string(r.source)},
            {"decoy", r.is_decoy}};
}

ordered_json detection_json(const DetectionEvent& e)
{
    return {{"seq", e.seq},           {"policy", e.policy},   {"kind", to_string(e.kind)},
            {"subject_pid", e.subject_pid}, {"subject_image", e.subject_image}, {"message", e.message}};
}

ordered_json attempt_json(const LogonAttemptResult& a)
{
    return {{"username", a.username}, {"result", a.result}};
}

std::string render_json(const Report& report)
{
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["scenario"] = report.scenario_name;
    j["seed"] = report.seed;

    ordered_json runs = ordered_json::array();
    for (const auto& run : report.runs) {
        ordered_json r = outcome_json(run.outcome);
        r["attacker"] = {{"pid", run.attacker_pid},
                         {"image", run.spec.profile.image_path},
                         {"obfuscated", run.spec.profile.obfuscated}};
        r["block_reason"] =
            run.result.block_reason ? ordered_json(to_string(*run.result.block_reason)) : ordered_json();
        ordered_json trace = ordered_json::array();
        for (const auto& step : run.result.trace) {
            trace.push_back({{"step", step.label()}, {"ok", step.ok}});
        }
        r["trace"] = std::move(trace);
        ordered_json records = ordered_json::array();
        for (const auto& rec : run.result.records) {
            records.push_back(record_json(rec));
        }
        r["records"] = std::move(records);
        r["domain"] = run.result.domain_name
                          ? ordered_json{{"name", *run.result.domain_name}, {"sid", run.result.domain_sid.value_or("")}}
                          : ordered_json();
        r["dump_artifact"] = run.result.dump_artifact ? ordered_json(*run.result.dump_artifact) : ordered_json();
        runs.push_back(std::move(r));
    }
    j["outcomes"] = std::move(runs);

    ordered_json attempts = ordered_json::array();
    for (const auto& a : report.attempts) {
        attempts.push_back(attempt_json(a));
    }
    j["logon_attempts"] = std::move(attempts);
    j["relogin"] = report.relogin ? attempt_json(*report.relogin) : ordered_json();

    ordered_json events = ordered_json::array();
    for (const auto& e : report.event_log) {
        events.push_back(detection_json(e));
    }
    j["events"] = std::move(events);
    j["final_world_digest"] = report.final_world_digest;
    j["violations"] = report.violations;
    j["error"] = report.error ? ordered_json(*report.error) : ordered_json();
    return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

} // namespace

std::optional<ReportFormat> report_format_from_string(std::string_view text)
{
    if (text == "text") {
        return ReportFormat::Text;
    }
    if (text == "json") {
        return ReportFormat::Json;
    }
    return std::nullopt;
}

std::string render_report(const Report& report, ReportFormat format)
{
    return format == ReportFormat::Json ? render_json(report) : render_text(report);
}

std::string render_report(const Report& report, std::string_view format)
{
    auto f = report_format_from_string(format);
    if (!f) {
        throw Error(Errc::UnknownFormat, "unknown report format '" + std::string(format) + "'");
    }
    return render_report(report, *f);
}

} // namespace credsim
