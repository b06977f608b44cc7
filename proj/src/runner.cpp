#include <algorithm>

#include <json.hpp>

#include "credsim/error.hpp"
#include "credsim/harness.hpp"

namespace credsim {

Outcome summarize(const AttackResult& result, std::size_t detection_events)
{
    Outcome o;
    o.technique = result.technique;
    o.status = result.status_label();
    o.events = detection_events;
    for (const auto& r : result.records) {
        if (r.is_decoy) {
            ++o.decoy_hits;
            continue;
        }
        o.plaintext_yield += r.plaintext ? 1 : 0;
        o.hash_yield += r.nt_hash.present() ? 1 : 0;
        o.credential_yield += r.has_secret() ? 1 : 0;
    }
    return o;
}

std::string serialize_outcome(const Outcome& o)
{
    return std::string(to_string(o.technique)) + " status=" + o.status +
           " plaintext_yield=" + std::to_string(o.plaintext_yield) + " hash_yield=" + std::to_string(o.hash_yield) +
           " decoy_hits=" + std::to_string(o.decoy_hits) + " events=" + std::to_string(o.events);
}

World build_world(const Fixture& fixture)
{
    SamDatabase sam(fixture.domain_name, fixture.domain_sid);
    for (const auto& a : fixture.accounts) {
        sam.add(UserAccount::with_password(a.rid, a.username,
                                           a.password ? std::optional<std::string_view>(*a.password) : std::nullopt,
                                           a.groups));
    }
    World world(std::move(sam), fixture.lsass_path.empty() ? std::string(kDefaultLsassPath) : fixture.lsass_path);
    world.credentials().set_use_logon_credential(fixture.use_logon_credential);
    return world;
}

namespace {

LogonAttemptResult try_logon(World& world, const std::string& username, const std::string& password,
                             LogonOrigin origin = LogonOrigin::Interactive)
{
    try {
        authenticate(world, username, password, origin);
        return {username, "Success"};
    } catch (const Error& e) {
        return {username, std::string(to_string(e.code()))};
    }
}

bool is_prefix(const std::vector<TraceStep>& trace, const std::vector<TraceStep>& nominal)
{
    if (trace.size() > nominal.size()) {
        return false;
    }
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (trace[i].label() != nominal[i].label()) {
            return false;
        }
    }
    return true;
}

} // namespace

std::vector<std::string> check_result_invariants(const AttackResult& result, const World& world)
{
    std::vector<std::string> out;
    const std::string who(to_string(result.technique));

    if (!result.records.empty() && result.status != AttackStatus::Succeeded && result.status != AttackStatus::Partial) {
        out.push_back(who + ": records present with status " + result.status_label());
    }
    if ((result.status == AttackStatus::Blocked || result.status == AttackStatus::DetectedAndTerminated) &&
        !result.trace.empty() && result.trace.back().ok) {
        out.push_back(who + ": stopped run does not end at its blocking step");
    }
    if (!is_prefix(result.trace, nominal_trace(result.technique))) {
        out.push_back(who + ": trace is not a prefix of the nominal trace");
    }
    if (result.records.size() > world.sam().size() + world.credentials().sessions().size()) {
        out.push_back(who + ": more records than accounts plus sessions");
    }

    bool opened = false;
    for (const auto& step : result.trace) {
        if (step.kind == StepKind::OpenProcess && step.ok) {
            opened = true;
        }
        if ((step.kind == StepKind::ReadSessions || step.kind == StepKind::WriteDump) && !opened) {
            out.push_back(who + ": memory read without an lsass handle");
        }
    }
    return out;
}

std::vector<std::string> check_world_invariants(const World& world)
{
    std::vector<std::string> out;
    const auto& sessions = world.credentials().sessions();

    bool seen_real = false;
    for (const auto& s : sessions) {
        if (s.is_decoy && seen_real) {
            out.push_back("decoy session " + s.username + " behind a real session");
        }
        seen_real = seen_real || !s.is_decoy;
        if (s.is_decoy != (s.origin == LogonOrigin::SpawnedWithLogon)) {
            out.push_back("session " + std::to_string(s.session_id) + ": decoy flag disagrees with origin");
        }
        if (s.wdigest_plaintext && !s.cached_nt_hash.present() && !s.is_decoy) {
            out.push_back("session " + std::to_string(s.session_id) + ": plaintext without hash");
        }
        if (!world.credentials().use_logon_credential() && !s.is_decoy && s.wdigest_plaintext) {
            out.push_back("session " + std::to_string(s.session_id) + ": plaintext cached with WDigest off");
        }
    }

    for (std::size_t i = 1; i < world.detections().size(); ++i) {
        if (world.detections()[i].seq <= world.detections()[i - 1].seq) {
            out.push_back("detection sequence numbers not strictly increasing");
        }
    }
    for (const auto& [pid, p] : world.processes()) {
        if (p.image_name != basename_of(p.image_path)) {
            out.push_back("pid " + std::to_string(pid) + ": image name does not match path");
        }
        if (p.token.integrity_level_index < 0 || p.token.integrity_level_index > 3) {
            out.push_back("pid " + std::to_string(pid) + ": integrity level out of range");
        }
    }
    return out;
}

std::string serialize_world(const World& world)
{
    using nlohmann::ordered_json;
    ordered_json j;
    j["sam"] = world.sam().serialize();

    ordered_json sessions = ordered_json::array();
    for (const auto& s : world.credentials().sessions()) {
        sessions.push_back({{"id", s.session_id},
                            {"user", s.username},
                            {"domain", s.domain},
                            {"origin", to_string(s.origin)},
                            {"plaintext", s.wdigest_plaintext ? ordered_json(*s.wdigest_plaintext) : ordered_json()},
                            {"nt_hash", s.cached_nt_hash.hex()},
                            {"decoy", s.is_decoy}});
    }
    j["credentials"] = {{"use_logon_credential", world.credentials().use_logon_credential()},
                        {"credential_guard", world.credentials().credential_guard()},
                        {"sessions", std::move(sessions)}};

    ordered_json processes = ordered_json::array();
    for (const auto& [pid, p] : world.processes()) {
        processes.push_back({{"pid", pid},
                             {"image", p.image_path},
                             {"user", p.token.user},
                             {"integrity", p.token.integrity_level_index},
                             {"debug_enabled", p.token.privilege_enabled(kSeDebugPrivilege)},
                             {"ppl", p.protection == Protection::Ppl},
                             {"modules", p.loaded_modules},
                             {"alive", p.alive}});
    }
    j["processes"] = std::move(processes);

    ordered_json ports = ordered_json::array();
    for (const auto& port : world.ports()) {
        ordered_json gate;
        if (port.gate) {
            gate = {{"integrity", port.gate->integrity_level_index ? ordered_json(*port.gate->integrity_level_index)
                                                                   : ordered_json()},
                    {"restore_on_logout", port.gate->restore_on_logout}};
        }
        ports.push_back({{"name", port.name}, {"owner", port.owner_pid}, {"gate", gate}});
    }
    j["ports"] = std::move(ports);

    const SystemPolicy& policy = world.policy();
    j["policy"] = {{"restricted_admin_rdp", policy.restricted_admin_rdp},
                   {"ntlm_disabled", policy.ntlm_disabled},
                   {"debug_allowed_groups", std::vector<std::string>(policy.debug_allowed_groups.begin(),
                                                                     policy.debug_allowed_groups.end())},
                   {"locked_out", world.locked_out()}};

    ordered_json events = ordered_json::array();
    for (const auto& e : world.event_log()) {
        events.push_back({e.seq, to_string(e.kind), e.pid, e.detail});
    }
    j["events"] = std::move(events);

    ordered_json detections = ordered_json::array();
    for (const auto& d : world.detections()) {
        detections.push_back({d.seq, d.policy, to_string(d.kind), d.subject_pid, d.message});
    }
    j["detections"] = std::move(detections);

    ordered_json artifacts = ordered_json::array();
    for (const auto& a : world.artifacts()) {
        artifacts.push_back({{"name", a.name}, {"writer", a.writer_pid}, {"sessions", a.snapshot.size()}});
    }
    j["artifacts"] = std::move(artifacts);
    // passwords are arbitrary bytes; bad UTF-8 becomes U+FFFD rather than throwing
    return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::string world_digest(const World& world)
{
    return to_hex(md4(serialize_world(world)));
}

Report run_scenario(const Scenario& scenario)
{
    Report report;
    report.scenario_name = scenario.name;
    report.seed = scenario.seed;

    try {
        validate(scenario);
        const Fixture& f = scenario.fixture;
        World world = build_world(f);
        report.lsass_pid = world.lsass_pid();
        install(world, scenario.policies, scenario.prompts);

        for (const auto& p : f.processes) {
            spawn_process(world, p.image_path, p.user);
        }
        for (const auto& logon : f.logons) {
            authenticate(world, logon.username, *f.find_account(logon.username)->password, logon.origin);
        }
        for (const auto& attempt : f.attempts) {
            report.attempts.push_back(try_logon(world, attempt.username, attempt.password));
        }

        for (const auto& spec : scenario.attacks) {
            const std::size_t before = world.detections().size();
            const ProcessDescriptor attacker =
                spawn_process(world, spec.profile.image_path, f.attacker_user, spec.profile.signature_keywords);
            AttackResult result = execute(world, spec.technique, attacker.pid, spec.profile);

            for (auto& v : check_result_invariants(result, world)) {
                report.violations.push_back(std::move(v));
            }
            Outcome outcome = summarize(result, world.detections().size() - before);
            report.runs.push_back({spec, attacker.pid, std::move(result), std::move(outcome)});
        }

        logout(world);
        if (!f.logons.empty()) {
            const auto& first = f.logons.front();
            report.relogin = try_logon(world, first.username, *f.find_account(first.username)->password, first.origin);
        }

        for (auto& v : check_world_invariants(world)) {
            report.violations.push_back(std::move(v));
        }
        report.event_log = world.detections();
        report.final_world_digest = world_digest(world);
    } catch (const Error& e) {
        report.error = e.what();
    }
    return report;
}

} // namespace credsim
