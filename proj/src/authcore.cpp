#include "credsim/authcore.hpp"

#include <algorithm>
#include <sstream>

#include "credsim/error.hpp"
#include "credsim/procmodel.hpp"

namespace credsim {

std::string NtHash::hex() const
{
    return bytes_ ? to_hex(*bytes_) : std::string{};
}

NtHash nt_hash_of(std::string_view password)
{
    return NtHash{md4(utf8_to_utf16le(password))};
}

UserAccount UserAccount::with_password(std::uint32_t rid, std::string username,
                                       std::optional<std::string_view> password,
                                       std::set<std::string, std::less<>> groups)
{
    UserAccount account;
    account.rid = rid;
    account.username = std::move(username);
    account.nt_hash = password ? nt_hash_of(*password) : NtHash::absent();
    account.groups = std::move(groups);
    return account;
}

void SamDatabase::add(UserAccount account)
{
    if (find_rid(account.rid)) {
        throw Error(Errc::DuplicateAccount, "rid " + std::to_string(account.rid) + " already present");
    }
    if (find_user(account.username)) {
        throw Error(Errc::DuplicateAccount, "user '" + account.username + "' already present");
    }
    accounts_.push_back(std::move(account));
}

const UserAccount* SamDatabase::find_rid(std::uint32_t rid) const
{
    auto it = std::find_if(accounts_.begin(), accounts_.end(), [&](const auto& a) { return a.rid == rid; });
    return it == accounts_.end() ? nullptr : &*it;
}

const UserAccount* SamDatabase::find_user(std::string_view username) const
{
    auto it = std::find_if(accounts_.begin(), accounts_.end(), [&](const auto& a) { return a.username == username; });
    return it == accounts_.end() ? nullptr : &*it;
}

UserAccount* SamDatabase::find_user(std::string_view username)
{
    return const_cast<UserAccount*>(std::as_const(*this).find_user(username));
}

std::string SamDatabase::serialize() const
{
    std::ostringstream out;
    out << "domain " << domain_name_ << ' ' << domain_sid_ << '\n';
    for (const auto& a : accounts_) {
        out << a.rid << ' ' << a.username << " nt=" << a.nt_hash.hex() << " lm=" << a.lm_hash.hex() << " groups=";
        bool first = true;
        for (const auto& g : a.groups) {
            out << (first ? "" : ";") << g;
            first = false;
        }
        out << '\n';
    }
    return out.str();
}

std::vector<SamEntry> sam_enumerate(const SamDatabase& db)
{
    std::vector<SamEntry> out;
    out.reserve(db.size());
    for (const auto& a : db.accounts()) {
        out.push_back({a.rid, a.username, a.nt_hash});
    }
    return out;
}

std::string_view to_string(LogonOrigin origin)
{
    switch (origin) {
    case LogonOrigin::Interactive: return "Interactive";
    case LogonOrigin::SpawnedWithLogon: return "SpawnedWithLogon";
    case LogonOrigin::Service: return "Service";
    case LogonOrigin::RemoteRdp: return "RemoteRdp";
    }
    return "Unknown";
}

std::optional<LogonOrigin> logon_origin_from_string(std::string_view text)
{
    for (auto o : {LogonOrigin::Interactive, LogonOrigin::SpawnedWithLogon, LogonOrigin::Service,
                   LogonOrigin::RemoteRdp}) {
        if (to_string(o) == text) {
            return o;
        }
    }
    return std::nullopt;
}

void CredentialStore::set_use_logon_credential(bool enabled)
{
    use_logon_credential_ = enabled;
    if (!enabled) {
        for (auto& s : sessions_) {
            if (!s.is_decoy) {
                s.wdigest_plaintext.reset();
            }
        }
    }
}

const LogonSession& CredentialStore::add_real(LogonSession session)
{
    session.session_id = next_session_id_++;
    session.is_decoy = false;
    if (!use_logon_credential_) {
        session.wdigest_plaintext.reset();
    }
    sessions_.push_back(std::move(session));
    return sessions_.back();
}

const LogonSession& CredentialStore::add_decoy(LogonSession session)
{
    session.session_id = next_session_id_++;
    session.is_decoy = true;
    // Newest decoy first; every decoy stays ahead of the real sessions.
    sessions_.insert(sessions_.begin(), std::move(session));
    return sessions_.front();
}

std::size_t CredentialStore::decoy_count() const
{
    return static_cast<std::size_t>(
        std::count_if(sessions_.begin(), sessions_.end(), [](const auto& s) { return s.is_decoy; }));
}

std::vector<LogonSession> read_logon_sessions(const CredentialStore& store)
{
    std::vector<LogonSession> view = store.sessions();
    if (store.credential_guard()) {
        for (auto& s : view) {
            s.wdigest_plaintext.reset();
            s.cached_nt_hash = NtHash::absent();
        }
    }
    return view;
}

LogonSession authenticate(World& world, std::string_view username, std::string_view password, LogonOrigin origin)
{
    if (origin == LogonOrigin::SpawnedWithLogon) {
        throw Error(Errc::ValidationError, "SpawnedWithLogon sessions come only from create_process_with_logon");
    }
    const std::string& domain = world.sam().domain_name();
    world.log(WorldEvent::Kind::LogonAttempt, 0, std::string(username));

    // The tripwire sees the attempt before anything can reject it.
    if (const Monitor* monitor = world.monitor()) {
        world.enforce(monitor->logon_attempted(username, domain, world), 0);
    }

    if (world.locked_out()) {
        throw Error(Errc::SystemLockedOut, "SAM connection settings were not restored; login impossible");
    }

    const UserAccount* account = world.sam().find_user(username);
    if (!account) {
        throw Error(Errc::UnknownUser, "no SAM entry for '" + std::string(username) + "'");
    }
    const NtHash entered = nt_hash_of(password);
    if (!account->nt_hash.present() || entered != account->nt_hash) {
        throw Error(Errc::BadPassword, "hash mismatch for '" + std::string(username) + "'");
    }

    const bool protected_user = account->in_group(kProtectedUsers);
    const bool keep_hash = !protected_user && !world.policy().ntlm_disabled;
    const bool restricted_rdp = origin == LogonOrigin::RemoteRdp && world.policy().restricted_admin_rdp;
    const bool keep_plaintext =
        world.credentials().use_logon_credential() && !protected_user && !restricted_rdp && keep_hash;

    LogonSession session;
    session.username = account->username;
    session.domain = domain;
    session.origin = origin;
    if (keep_plaintext) {
        session.wdigest_plaintext = std::string(password);
    }
    session.cached_nt_hash = keep_hash ? entered : NtHash::absent();
    return world.credentials().add_real(std::move(session));
}

} // namespace credsim
