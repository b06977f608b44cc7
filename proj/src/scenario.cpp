#include "credsim/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "credsim/error.hpp"
#include "text.hpp"

namespace credsim {

namespace {

struct Arg {
    std::optional<std::string> key;
    std::string value;
};

// Comma-separated arguments; `key=value` only when `key` is one the policy
// understands, so passwords may still contain '='.
std::vector<Arg> split_args(std::string_view args, std::initializer_list<std::string_view> keys)
{
    std::vector<Arg> out;
    for (auto& piece : text::split(args, ',')) {
        const auto eq = piece.find('=');
        if (eq != std::string::npos) {
            const std::string key(text::trim(std::string_view(piece).substr(0, eq)));
            if (std::find(keys.begin(), keys.end(), key) != keys.end()) {
                out.push_back({key, std::string(text::trim(std::string_view(piece).substr(eq + 1)))});
                continue;
            }
        }
        out.push_back({std::nullopt, piece});
    }
    return out;
}

bool parse_bool(const std::string& value)
{
    if (value == "true" || value == "on" || value == "yes") {
        return true;
    }
    if (value == "false" || value == "off" || value == "no") {
        return false;
    }
    throw Error(Errc::ParseError, "expected true/false, got '" + value + "'");
}

std::optional<bool> parse_pin(const std::string& value)
{
    if (value == "any") {
        return std::nullopt;
    }
    return parse_bool(value);
}

std::set<std::string> list_of(const std::string& value)
{
    std::set<std::string> out;
    for (auto& item : text::split(value, ';')) {
        if (!item.empty()) {
            out.insert(std::move(item));
        }
    }
    return out;
}

std::string join(const std::set<std::string>& items, char sep = ';')
{
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) {
            out += sep;
        }
        out += item;
    }
    return out;
}

template <class Int>
Int parse_int(std::string_view text, std::string_view what)
{
    Int value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw Error(Errc::ParseError, "invalid " + std::string(what) + " '" + std::string(text) + "'");
    }
    return value;
}

void reject_args(std::string_view keyword, std::string_view args)
{
    if (!text::trim(args).empty()) {
        throw Error(Errc::ParseError, std::string(keyword) + " takes no arguments");
    }
}

void positional_only(const std::vector<Arg>& args, std::size_t max, std::string_view keyword)
{
    const auto count = std::count_if(args.begin(), args.end(), [](const Arg& a) { return !a.key; });
    if (static_cast<std::size_t>(count) > max) {
        throw Error(Errc::ParseError, "too many arguments for " + std::string(keyword));
    }
}

DefensePolicy parse_policy(std::string_view keyword, std::string_view args, const std::set<std::string>& allowlist)
{
    if (keyword == "honey_token") {
        HoneyToken p;
        std::vector<std::string*> slots{&p.username, &p.domain, &p.password};
        std::size_t next = 0;
        for (auto& a : split_args(args, {"agent"})) {
            if (a.key) {
                p.agent_path = a.value;
            } else if (next < slots.size()) {
                *slots[next++] = a.value;
            } else {
                throw Error(Errc::ParseError, "honey_token takes username, domain, password");
            }
        }
        return p;
    }
    if (keyword == "allowlist_monitor") {
        AllowlistMonitor p;
        p.trusted_full_paths = allowlist;
        auto parsed = split_args(args, {});
        positional_only(parsed, 1, keyword);
        if (!parsed.empty()) {
            if (parsed[0].value == "terminate") {
                p.action = MonitorAction::Terminate;
            } else if (parsed[0].value != "warn") {
                throw Error(Errc::ParseError, "allowlist_monitor action must be warn or terminate");
            }
        }
        return p;
    }
    if (keyword == "lsass_api_hook") {
        LsassApiHook p;
        for (auto& a : split_args(args, {"functions", "modules", "trusted"})) {
            if (!a.key) {
                if (a.value == "prompt") {
                    p.action = HookAction::Prompt;
                } else if (a.value != "terminate") {
                    throw Error(Errc::ParseError, "lsass_api_hook action must be terminate or prompt");
                }
            } else if (*a.key == "functions") {
                p.watched_functions.clear();
                for (const auto& name : list_of(a.value)) {
                    const auto fn = api_function_from_string(name);
                    if (!fn) {
                        throw Error(Errc::ParseError, "unknown API function '" + name + "'");
                    }
                    p.watched_functions.insert(*fn);
                }
            } else if (*a.key == "modules") {
                p.watched_modules = list_of(a.value);
            } else {
                p.trusted_paths = list_of(a.value);
            }
        }
        return p;
    }
    if (keyword == "alpc_block") {
        AlpcBlock p;
        for (auto& a : split_args(args, {"restore_on_logout", "integrity", "privilege_enabled", "enabled_by_default"})) {
            if (!a.key) {
                throw Error(Errc::ParseError, "alpc_block takes key=value arguments only");
            }
            if (*a.key == "restore_on_logout") {
                p.gate.restore_on_logout = parse_bool(a.value);
            } else if (*a.key == "integrity") {
                if (a.value == "any") {
                    p.gate.integrity_level_index.reset();
                } else {
                    const int level = parse_int<int>(a.value, "integrity level");
                    if (level < 0 || level > 3) {
                        throw Error(Errc::ParseError, "integrity level must be 0..3 or any");
                    }
                    p.gate.integrity_level_index = level;
                }
            } else if (*a.key == "privilege_enabled") {
                p.gate.privilege_enabled = parse_pin(a.value);
            } else {
                p.gate.enabled_by_default = parse_pin(a.value);
            }
        }
        return p;
    }
    if (keyword == "debug_privilege_restriction") {
        DebugPrivilegeRestriction p;
        for (auto& a : split_args(args, {"groups"})) {
            for (auto& g : a.key ? list_of(a.value) : std::set<std::string>{a.value}) {
                p.allowed_groups.insert(g);
            }
        }
        return p;
    }
    if (keyword == "protected_users") {
        ProtectedUsers p;
        for (auto& a : split_args(args, {})) {
            p.members.insert(a.value);
        }
        return p;
    }
    if (keyword == "signature_scan") {
        SignatureScan p;
        auto parsed = split_args(args, {});
        if (!parsed.empty()) {
            p.keywords.clear();
            for (auto& a : parsed) {
                p.keywords.insert(a.value);
            }
        }
        return p;
    }
    if (keyword == "wdigest_disable") {
        reject_args(keyword, args);
        return WDigestDisable{};
    }
    if (keyword == "ppl_enable") {
        reject_args(keyword, args);
        return PplEnable{};
    }
    if (keyword == "credential_guard") {
        reject_args(keyword, args);
        return CredentialGuard{};
    }
    if (keyword == "restricted_admin_rdp") {
        reject_args(keyword, args);
        return RestrictedAdminRdp{};
    }
    if (keyword == "disable_lm_ntlm") {
        reject_args(keyword, args);
        return DisableLmNtlm{};
    }
    throw Error(Errc::ParseError, "unknown policy '" + std::string(keyword) + "'");
}

std::pair<std::string_view, std::string_view> split_key_value(std::string_view line)
{
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
        return {text::trim(line), {}};
    }
    return {text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1))};
}

std::string_view optional_text(const std::optional<bool>& pin)
{
    return !pin ? "any" : (*pin ? "true" : "false");
}

enum class Section { None, Fixture, Accounts, Allowlist, Policies, Attacks, Prompts };

Section section_from(std::string_view name)
{
    static const std::map<std::string_view, Section> sections = {
        {"fixture", Section::Fixture},   {"accounts", Section::Accounts}, {"allowlist", Section::Allowlist},
        {"policies", Section::Policies}, {"attacks", Section::Attacks},   {"prompts", Section::Prompts},
    };
    auto it = sections.find(name);
    return it == sections.end() ? Section::None : it->second;
}

class ScenarioParser {
public:
    Scenario parse(std::string_view text)
    {
        std::size_t line_no = 0;
        std::size_t start = 0;
        while (start <= text.size()) {
            const auto end = text.find('\n', start);
            const auto raw = text.substr(start, end == std::string_view::npos ? std::string_view::npos : end - start);
            ++line_no;
            try {
                handle(text::trim(raw), line_no);
            } catch (const Error& e) {
                if (e.code() == Errc::ParseError && !e.line()) {
                    throw Error(Errc::ParseError, e.message(), line_no);
                }
                throw;
            }
            if (end == std::string_view::npos) {
                break;
            }
            start = end + 1;
        }

        for (const auto& [line, text_line] : policy_lines_) {
            try {
                scenario_.policies.push_back(parse_policy_line(text_line, scenario_.allowlist));
            } catch (const Error& e) {
                throw Error(Errc::ParseError, e.message(), line);
            }
        }
        validate(scenario_);
        return std::move(scenario_);
    }

private:
    void handle(std::string_view line, std::size_t line_no)
    {
        if (line.empty() || line.front() == '#') {
            return;
        }
        if (line.front() == '[') {
            if (line.back() != ']') {
                throw Error(Errc::ParseError, "unterminated section header", line_no);
            }
            const auto name = text::trim(line.substr(1, line.size() - 2));
            section_ = section_from(name);
            if (section_ == Section::None) {
                throw Error(Errc::ParseError, "unknown section [" + std::string(name) + "]", line_no);
            }
            if (!seen_sections_.insert(section_).second) {
                throw Error(Errc::ParseError, "duplicate section [" + std::string(name) + "]", line_no);
            }
            return;
        }

        switch (section_) {
        case Section::None: throw Error(Errc::ParseError, "content outside of a section", line_no);
        case Section::Fixture: fixture_line(line); break;
        case Section::Accounts: account_line(line); break;
        case Section::Allowlist: scenario_.allowlist.insert(std::string(line)); break;
        case Section::Policies: policy_lines_.emplace_back(line_no, std::string(line)); break;
        case Section::Attacks: attack_line(line); break;
        case Section::Prompts: prompt_line(line); break;
        }
    }

    void single(std::string_view key)
    {
        if (!single_keys_.insert(std::string(key)).second) {
            throw Error(Errc::ParseError, "duplicate key '" + std::string(key) + "'");
        }
    }

    void fixture_line(std::string_view line)
    {
        auto [key, value] = split_key_value(line);
        Fixture& f = scenario_.fixture;
        if (key == "name") {
            single(key);
            scenario_.name = std::string(value);
        } else if (key == "seed") {
            single(key);
            scenario_.seed = parse_int<std::uint64_t>(value, "seed");
        } else if (key == "domain") {
            single(key);
            f.domain_name = std::string(value);
        } else if (key == "domain_sid") {
            single(key);
            f.domain_sid = std::string(value);
        } else if (key == "lsass") {
            single(key);
            f.lsass_path = std::string(value);
        } else if (key == "attacker") {
            single(key);
            f.attacker_user = std::string(value);
        } else if (key == "wdigest") {
            single(key);
            f.use_logon_credential = parse_bool(std::string(value));
        } else if (key == "process") {
            auto parts = text::split(value, ',');
            if (parts.size() != 2 || parts[0].empty() || parts[1].empty()) {
                throw Error(Errc::ParseError, "process = <image path>, <user>");
            }
            f.processes.push_back({parts[0], parts[1]});
        } else if (key == "logon") {
            auto parts = text::split(value, ',');
            if (parts.empty() || parts.size() > 2 || parts[0].empty()) {
                throw Error(Errc::ParseError, "logon = <user>[, <origin>]");
            }
            LogonSeed seed{parts[0], LogonOrigin::Interactive};
            if (parts.size() == 2) {
                const auto origin = logon_origin_from_string(parts[1]);
                if (!origin || *origin == LogonOrigin::SpawnedWithLogon) {
                    throw Error(Errc::ParseError, "logon origin must be Interactive, Service or RemoteRdp");
                }
                seed.origin = *origin;
            }
            f.logons.push_back(std::move(seed));
        } else if (key == "attempt") {
            const auto comma = value.find(',');
            if (comma == std::string_view::npos) {
                throw Error(Errc::ParseError, "attempt = <user>, <password>");
            }
            f.attempts.push_back(
                {std::string(text::trim(value.substr(0, comma))), std::string(text::trim(value.substr(comma + 1)))});
        } else {
            throw Error(Errc::ParseError, "unknown fixture key '" + std::string(key) + "'");
        }
    }

    void account_line(std::string_view line)
    {
        auto parts = text::split(line, ',');
        if (parts.size() < 3 || parts.size() > 4) {
            throw Error(Errc::ParseError, "account line must be rid,username,password|-,groups");
        }
        AccountSeed seed;
        seed.rid = parse_int<std::uint32_t>(parts[0], "rid");
        seed.username = parts[1];
        if (seed.username.empty()) {
            throw Error(Errc::ParseError, "empty username");
        }
        if (parts[2] != "-") {
            seed.password = parts[2];
        }
        if (parts.size() == 4) {
            for (auto& g : list_of(parts[3])) {
                seed.groups.insert(g);
            }
        }
        scenario_.fixture.accounts.push_back(std::move(seed));
    }

    void attack_line(std::string_view line)
    {
        auto [key, value] = split_key_value(line);
        const auto technique = technique_from_string(key);
        if (!technique) {
            throw Error(Errc::ParseError, "unknown technique '" + std::string(key) + "'");
        }
        AttackSpec spec{*technique, default_profile(*technique)};
        bool want_obfuscation = false;
        bool first = true;
        for (auto& a : split_args(value, {"keywords"})) {
            if (a.key) {
                spec.profile.signature_keywords = list_of(a.value);
            } else if (a.value == "obfuscate") {
                want_obfuscation = true;
            } else if (first && !a.value.empty()) {
                spec.profile.image_path = a.value;
            } else {
                throw Error(Errc::ParseError, "unexpected attack option '" + a.value + "'");
            }
            first = false;
        }
        if (want_obfuscation) {
            spec.profile = obfuscate(spec.profile);
        }
        scenario_.attacks.push_back(std::move(spec));
    }

    void prompt_line(std::string_view line)
    {
        auto [key, value] = split_key_value(line);
        const auto function = api_function_from_string(key);
        if (!function) {
            throw Error(Errc::ParseError, "unknown API function '" + std::string(key) + "'");
        }
        if (value != "allow" && value != "deny") {
            throw Error(Errc::ParseError, "prompt answer must be allow or deny");
        }
        scenario_.prompts[*function] = value == "allow" ? PromptAnswer::Allow : PromptAnswer::Deny;
    }

    Scenario scenario_;
    Section section_ = Section::None;
    std::set<Section> seen_sections_;
    std::set<std::string> single_keys_;
    std::vector<std::pair<std::size_t, std::string>> policy_lines_;
};

} // namespace

const AccountSeed* Fixture::find_account(std::string_view username) const
{
    for (const auto& a : accounts) {
        if (a.username == username) {
            return &a;
        }
    }
    return nullptr;
}

DefensePolicy parse_policy_line(std::string_view line, const std::set<std::string>& allowlist)
{
    auto [keyword, args] = split_key_value(line);
    return parse_policy(keyword, args, allowlist);
}

std::string format_policy(const DefensePolicy& policy)
{
    std::ostringstream out;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            out << policy_keywords()[policy.index()];
            if constexpr (std::is_same_v<T, HoneyToken>) {
                out << " = " << p.username << ", " << p.domain << ", " << p.password;
                if (p.agent_path != kDefaultHoneyAgentPath) {
                    out << ", agent=" << p.agent_path;
                }
            } else if constexpr (std::is_same_v<T, AllowlistMonitor>) {
                out << " = " << (p.action == MonitorAction::Terminate ? "terminate" : "warn");
            } else if constexpr (std::is_same_v<T, LsassApiHook>) {
                std::set<std::string> functions;
                for (auto f : p.watched_functions) {
                    functions.insert(std::string(to_string(f)));
                }
                out << " = " << (p.action == HookAction::Prompt ? "prompt" : "terminate")
                    << ", functions=" << join(functions) << ", modules=" << join(p.watched_modules);
                if (!p.trusted_paths.empty()) {
                    out << ", trusted=" << join(p.trusted_paths);
                }
            } else if constexpr (std::is_same_v<T, AlpcBlock>) {
                out << " = restore_on_logout=" << (p.gate.restore_on_logout ? "true" : "false") << ", integrity="
                    << (p.gate.integrity_level_index ? std::to_string(*p.gate.integrity_level_index) : "any")
                    << ", privilege_enabled=" << optional_text(p.gate.privilege_enabled)
                    << ", enabled_by_default=" << optional_text(p.gate.enabled_by_default);
            } else if constexpr (std::is_same_v<T, DebugPrivilegeRestriction>) {
                out << " = groups=" << join(std::set<std::string>(p.allowed_groups.begin(), p.allowed_groups.end()));
            } else if constexpr (std::is_same_v<T, ProtectedUsers>) {
                out << " = " << join(p.members, ',');
            } else if constexpr (std::is_same_v<T, SignatureScan>) {
                out << " = " << join(p.keywords, ',');
            }
        },
        policy);
    std::string s = out.str();
    // "protected_users = " with no members
    while (!s.empty() && (s.back() == ' ' || s.back() == '=')) {
        s.pop_back();
    }
    return s;
}

void validate(const Scenario& scenario)
{
    const Fixture& f = scenario.fixture;
    auto fail = [](const std::string& message) { throw Error(Errc::ValidationError, message); };

    if (f.lsass_path.empty()) {
        fail("fixture has no lsass process (set 'lsass = <path>')");
    }
    if (scenario.attacks.empty()) {
        fail("the [attacks] section lists no attack");
    }
    std::set<std::uint32_t> rids;
    std::set<std::string> users;
    for (const auto& a : f.accounts) {
        if (!rids.insert(a.rid).second) {
            fail("duplicate rid " + std::to_string(a.rid));
        }
        if (!users.insert(a.username).second) {
            fail("duplicate account '" + a.username + "'");
        }
    }
    if (f.attacker_user.empty()) {
        fail("fixture names no attacker user");
    }
    if (!f.find_account(f.attacker_user)) {
        fail("attacker user '" + f.attacker_user + "' has no account");
    }
    for (const auto& logon : f.logons) {
        const AccountSeed* account = f.find_account(logon.username);
        if (!account || !account->password) {
            fail("logon user '" + logon.username + "' needs an account with a password");
        }
    }
    std::set<std::size_t> kinds;
    for (const auto& p : scenario.policies) {
        if (!kinds.insert(p.index()).second) {
            fail(std::string(policy_name(p)) + " listed twice");
        }
        if (const auto* pu = std::get_if<ProtectedUsers>(&p)) {
            for (const auto& m : pu->members) {
                if (!f.find_account(m)) {
                    fail("protected_users member '" + m + "' has no account");
                }
            }
        }
    }
}

Scenario parse_scenario(std::string_view text)
{
    return ScenarioParser{}.parse(text);
}

Scenario load_scenario(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::Io, "cannot open " + path);
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_scenario(buffer.str());
}

} // namespace credsim
