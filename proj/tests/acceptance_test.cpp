// Standalone acceptance check: one PASS/FAIL line per criterion, nonzero
// exit if any fails. Runs under ctest as its own entry.
#include <algorithm>
#include <chrono>
#include <filesystem>
#include <functional>
#include <iostream>

#include "credsim/error.hpp"
#include "md4_oracle.hpp"
#include "support.hpp"

using namespace credsim;
using namespace testing_support;

namespace {

// Collects the first failed expectation of a criterion.
struct Check {
    std::string failure;
    void expect(bool cond, const std::string& what)
    {
        if (!cond && failure.empty()) {
            failure = what;
        }
    }
};

Report run(const std::string& scn)
{
    Report r = run_scenario(load_scenario(scenario_path(scn)));
    if (!r.ok()) {
        throw std::runtime_error(scn + ": " + r.error.value_or("invariant violation: " + r.violations.front()));
    }
    return r;
}

std::string golden(const std::string& name)
{
    return read_file(std::string(CREDSIM_GOLDEN_DIR) + "/" + name);
}

const AttackRun* find_run(const Report& r, TechniqueId t, bool obfuscated = false)
{
    for (const auto& run : r.runs) {
        if (run.result.technique == t && run.spec.profile.obfuscated == obfuscated) {
            return &run;
        }
    }
    return nullptr;
}

std::size_t count_kind(const std::vector<DetectionEvent>& events, DetectionKind kind)
{
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [&](const DetectionEvent& e) { return e.kind == kind; }));
}

void c1(Check& c)
{
    const Report r = run("sekurlsa.scn");
    const std::string text = render_report(r, ReportFormat::Text);
    const AttackRun* run = find_run(r, TechniqueId::MimikatzSekurlsa);
    c.expect(run && run->result.status == AttackStatus::Succeeded, "sekurlsa did not succeed");
    bool plain = false;
    for (const auto& rec : run ? run->result.records : std::vector<CredentialRecord>{}) {
        plain = plain || (rec.username == "mainuser" && rec.plaintext == std::string(kMainPassword));
    }
    c.expect(plain, "no mainuser record with plaintext");
    c.expect(text.find("Privilege '20' OK") != std::string::npos, "missing Privilege '20' OK");
    c.expect(text == golden("sekurlsa.txt"), "text report differs from golden");
}

void c2(Check& c)
{
    const Report r = run("lsadump.scn");
    const AttackRun* run = find_run(r, TechniqueId::MimikatzLsaDumpInject);
    c.expect(run != nullptr, "no lsadump run");
    if (!run) {
        return;
    }
    std::vector<std::uint32_t> rids;
    for (const auto& rec : run->result.records) {
        rids.push_back(rec.rid.value_or(0));
    }
    c.expect(rids == std::vector<std::uint32_t>{503, 1001, 504}, "RID order is not 503, 1001, 504");
    c.expect(!run->result.records.empty() && !run->result.records[0].nt_hash.present(), "DefaultAccount NTLM not blank");
    const std::string header = run->result.domain_name.value_or("") + " / " + run->result.domain_sid.value_or("");
    c.expect(header == "DESKTOP-K0FU6JD / S-1-5-21-328600537-1725431280-3419747997", "domain header: " + header);
    c.expect(render_report(r, ReportFormat::Text) == golden("lsadump.txt"), "text report differs from golden");
}

void c3(Check& c)
{
    const Report honey = run("honey_token.scn");
    const Report base = run("baseline.scn");
    const AttackRun* sek = find_run(honey, TechniqueId::MimikatzSekurlsa);
    c.expect(sek && !sek->result.records.empty(), "no sekurlsa records");
    if (!sek || sek->result.records.empty()) {
        return;
    }
    const auto& first = sek->result.records[0];
    c.expect(first.is_decoy && first.username == "test" && first.domain == "test" && first.plaintext == "test",
             "(a) record[0] is not the test/test decoy with plaintext test");
    bool main_later = false;
    for (const auto& rec : sek->result.records) {
        main_later = main_later || (rec.username == "mainuser" && rec.position >= 1);
    }
    c.expect(main_later, "(b) mainuser not present at position >= 1");
    const AttackRun* a = find_run(honey, TechniqueId::MimikatzLsaDumpInject);
    const AttackRun* b = find_run(base, TechniqueId::MimikatzLsaDumpInject);
    c.expect(a && b && a->outcome.hash_yield == b->outcome.hash_yield,
             "(c) lsadump hash_yield differs from the defenseless run");
}

void c4(Check& c)
{
    World w = default_world();
    install(w, {HoneyToken{}});
    const auto before = count_kind(w.detections(), DetectionKind::DecoyLogonAttempt);
    bool failed = false;
    try {
        authenticate(w, "test", "anything at all");
    } catch (const Error&) {
        failed = true;
    }
    c.expect(failed, "authentication as the decoy succeeded");
    c.expect(count_kind(w.detections(), DetectionKind::DecoyLogonAttempt) - before == 1,
             "expected exactly one DecoyLogonAttempt");
}

void c5(Check& c)
{
    const Report r = run("allowlist.scn");
    c.expect(count_kind(r.event_log, DetectionKind::ProcessWarning) == 1, "expected exactly one ProcessWarning");

    const Scenario s = load_scenario(scenario_path("allowlist.scn"));
    World w = build_world(s.fixture);
    install(w, s.policies);
    for (const auto& path : s.allowlist) {
        spawn_process(w, path, "mainuser");
    }
    c.expect(!s.allowlist.empty() && w.detections().empty(), "allowlisted spawns raised events");
}

void c6(Check& c)
{
    const Report r = run("api_hook.scn");
    for (TechniqueId t : {TechniqueId::MimikatzSekurlsa, TechniqueId::MimikatzLsaDumpInject}) {
        const AttackRun* plain = find_run(r, t, false);
        const AttackRun* obf = find_run(r, t, true);
        c.expect(plain && obf, std::string(to_string(t)) + ": missing run");
        if (!plain || !obf) {
            continue;
        }
        c.expect(plain->result.status == AttackStatus::DetectedAndTerminated && plain->result.records.empty(),
                 std::string(to_string(t)) + ": not terminated with zero records");
        c.expect(serialize_outcome(plain->outcome) == serialize_outcome(obf->outcome),
                 std::string(to_string(t)) + ": obfuscated outcome differs");
    }
}

void c7(Check& c)
{
    const Report keep = run("alpc_block.scn");
    const Report restore = run("alpc_block_restore.scn");
    const AttackRun* lsa = find_run(keep, TechniqueId::MimikatzLsaDumpInject);
    const AttackRun* sek = find_run(keep, TechniqueId::MimikatzSekurlsa);
    c.expect(lsa && lsa->result.status == AttackStatus::Blocked &&
                 lsa->result.block_reason == BlockReason::GateClosed && !lsa->result.trace.empty() &&
                 lsa->result.trace.back().kind == StepKind::ApiCall &&
                 lsa->result.trace.back().argument.starts_with("SamConnect"),
             "lsadump not Blocked(GateClosed) at SamConnect");
    const Report base = run("baseline.scn");
    const AttackRun* sek0 = find_run(base, TechniqueId::MimikatzSekurlsa);
    c.expect(sek && sek0 && sek->outcome == sek0->outcome, "sekurlsa affected by the gate");
    c.expect(keep.relogin && keep.relogin->result == "SystemLockedOut", "no lockout without restore");
    c.expect(restore.relogin && restore.relogin->result == "Success", "logon fails with restore");
}

void c8(Check& c)
{
    const Report off = run("wdigest.scn");
    const Report base = run("baseline.scn");
    for (const auto& run : off.runs) {
        const AttackRun* ref = find_run(base, run.result.technique);
        const std::string t(to_string(run.result.technique));
        c.expect(run.outcome.plaintext_yield == 0, t + ": plaintext recovered");
        c.expect(ref && ref->outcome.hash_yield == run.outcome.hash_yield, t + ": hash yield changed");
    }
    c.expect(find_run(off, TechniqueId::MimikatzSekurlsa) && find_run(off, TechniqueId::MimikatzLsaDumpInject),
             "scenario lacks one of the two paths");
}

void c9(Check& c)
{
    const Report ppl = run("ppl.scn");
    c.expect(ppl.runs.size() == list_techniques().size(), "ppl scenario does not cover every technique");
    for (const auto& run : ppl.runs) {
        const auto& res = run.result;
        c.expect(res.status == AttackStatus::Blocked && res.block_reason == BlockReason::ProtectedProcess &&
                     !res.trace.empty() && res.trace.back().kind == StepKind::OpenProcess,
                 std::string(to_string(res.technique)) + ": not blocked at OpenProcess");
    }
    const Report cg = run("credential_guard.scn");
    for (const auto& run : cg.runs) {
        c.expect(run.result.status == AttackStatus::Partial && run.outcome.credential_yield == 0,
                 std::string(to_string(run.result.technique)) + ": not Partial with zero secrets");
    }
}

void c10(Check& c)
{
    const auto start = std::chrono::steady_clock::now();
    const auto singles = parse_configs(read_file(scenario_path("singles.configs")));
    const auto configs = combine_configs(singles, 2);
    const OutcomeMatrix m = build_matrix(load_scenario(scenario_path("baseline.scn")), configs);
    const auto violations = check_monotonicity(m);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    c.expect(violations.empty(), violations.empty() ? "" : violations.front().describe());
    c.expect(secs < 10.0, "matrix took " + std::to_string(secs) + " s");
    std::cout << "  matrix: " << m.cells.size() << " runs in " << secs << " s, " << violations.size()
              << " violations\n";

    for (const auto& [pw, hex] : std::vector<std::pair<std::string, std::string>>{
             {"test", "0cb6948805f797bf2a82807973b89537"}, {"", "31d6cfe0d16ae931b73c59d7e0c089c0"}}) {
        c.expect(nt_hash_of(pw).hex() == hex && oracle::ntlm_hex(pw) == hex, "NT hash of '" + pw + "'");
    }

    std::size_t scenarios = 0;
    for (const auto& entry : std::filesystem::directory_iterator(CREDSIM_SCENARIO_DIR)) {
        if (entry.path().extension() != ".scn") {
            continue;
        }
        ++scenarios;
        const Scenario s = load_scenario(entry.path().string());
        const Report a = run_scenario(s);
        const Report b = run_scenario(s);
        c.expect(render_report(a, ReportFormat::Json) == render_report(b, ReportFormat::Json) &&
                     render_report(a, ReportFormat::Text) == render_report(b, ReportFormat::Text),
                 entry.path().filename().string() + ": runs differ");
    }
    c.expect(scenarios > 0, "no bundled scenarios found");
}

} // namespace

int main()
{
    const std::vector<std::pair<const char*, std::function<void(Check&)>>> criteria = {
        {"baseline sekurlsa recovers mainuser plaintext; golden match", c1},
        {"baseline lsadump RIDs, blank DefaultAccount, domain header; golden match", c2},
        {"honey token: decoy first, mainuser later, hashes unchanged", c3},
        {"decoy logon: one DecoyLogonAttempt and a failed logon", c4},
        {"allowlist monitor: one ProcessWarning, none for allowlisted", c5},
        {"API hook terminates both mimikatz paths; obfuscation changes nothing", c6},
        {"ALPC gate: SamConnect closed, sekurlsa untouched, lockout vs restore", c7},
        {"WDigest off: no plaintext, hash yields unchanged", c8},
        {"PPL blocks every technique at OpenProcess; Credential Guard gives empty Partial", c9},
        {"monotonicity over pair configs, MD4 oracle vectors, determinism", c10},
    };

    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Check c;
        try {
            criteria[i].second(c);
        } catch (const std::exception& e) {
            c.failure = std::string("exception: ") + e.what();
        }
        const bool ok = c.failure.empty();
        failed += !ok;
        std::cout << (ok ? "PASS" : "FAIL") << " criterion " << i + 1 << ": " << criteria[i].first;
        if (!ok) {
            std::cout << " -- " << c.failure;
        }
        std::cout << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
