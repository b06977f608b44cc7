#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "credsim/md4.hpp"

namespace credsim {

class World;

inline constexpr std::string_view kLocalAdministrators = "LocalAdministrators";
inline constexpr std::string_view kProtectedUsers = "ProtectedUsers";

/// 16-byte NT hash, or Absent for accounts without a password.
class NtHash {
public:
    NtHash() = default;
    explicit NtHash(const Md4Digest& bytes) : bytes_(bytes) {}

    static NtHash absent() { return NtHash{}; }

    bool present() const noexcept { return bytes_.has_value(); }
    const std::optional<Md4Digest>& bytes() const noexcept { return bytes_; }

    /// 32 lowercase hex characters, or an empty string when Absent.
    std::string hex() const;

    friend bool operator==(const NtHash&, const NtHash&) = default;

private:
    std::optional<Md4Digest> bytes_;
};

/// MD4 over the UTF-16LE encoding of the password.
NtHash nt_hash_of(std::string_view password);

struct UserAccount {
    std::uint32_t rid = 0;
    std::string username;
    NtHash nt_hash;
    NtHash lm_hash;  // never populated; kept for transcript layout
    std::set<std::string, std::less<>> groups;

    bool in_group(std::string_view group) const { return groups.contains(group); }

    static UserAccount with_password(std::uint32_t rid, std::string username,
                                     std::optional<std::string_view> password,
                                     std::set<std::string, std::less<>> groups = {});
};

/// Local account store. Accounts keep insertion order, which is also the
/// enumeration order.
class SamDatabase {
public:
    SamDatabase() = default;
    SamDatabase(std::string domain_name, std::string domain_sid)
        : domain_name_(std::move(domain_name)), domain_sid_(std::move(domain_sid)) {}

    const std::string& domain_name() const noexcept { return domain_name_; }
    const std::string& domain_sid() const noexcept { return domain_sid_; }

    /// Throws DuplicateAccount if the rid or the username is already taken.
    void add(UserAccount account);

    const UserAccount* find_rid(std::uint32_t rid) const;
    const UserAccount* find_user(std::string_view username) const;
    UserAccount* find_user(std::string_view username);

    const std::vector<UserAccount>& accounts() const noexcept { return accounts_; }
    std::size_t size() const noexcept { return accounts_.size(); }

    /// Canonical text form (one line per account); used for digests and for
    /// checking that no plaintext ever reaches the store.
    std::string serialize() const;

private:
    std::string domain_name_;
    std::string domain_sid_;
    std::vector<UserAccount> accounts_;
};

struct SamEntry {
    std::uint32_t rid = 0;
    std::string username;
    NtHash nt_hash;
};

/// Every account in store order. Decoys never live here.
std::vector<SamEntry> sam_enumerate(const SamDatabase& db);

enum class LogonOrigin { Interactive, SpawnedWithLogon, Service, RemoteRdp };

std::string_view to_string(LogonOrigin origin);
std::optional<LogonOrigin> logon_origin_from_string(std::string_view text);

struct LogonSession {
    std::uint64_t session_id = 0;
    std::string username;
    std::string domain;
    LogonOrigin origin = LogonOrigin::Interactive;
    std::optional<std::string> wdigest_plaintext;
    NtHash cached_nt_hash;
    bool is_decoy = false;
};

/// Logon sessions held by LSASS. Decoys sit in front (newest first), real
/// sessions are appended behind them.
class CredentialStore {
public:
    const std::vector<LogonSession>& sessions() const noexcept { return sessions_; }

    bool use_logon_credential() const noexcept { return use_logon_credential_; }
    bool credential_guard() const noexcept { return credential_guard_; }

    /// Turning WDigest caching off also scrubs plaintext from real sessions.
    void set_use_logon_credential(bool enabled);
    void set_credential_guard(bool enabled) { credential_guard_ = enabled; }

    const LogonSession& add_real(LogonSession session);
    const LogonSession& add_decoy(LogonSession session);

    std::size_t decoy_count() const;

private:
    std::vector<LogonSession> sessions_;
    std::uint64_t next_session_id_ = 1;
    bool use_logon_credential_ = true;
    bool credential_guard_ = false;
};

/// What a memory reader sees. With Credential Guard on, every secret is
/// returned as Absent.
std::vector<LogonSession> read_logon_sessions(const CredentialStore& store);

/// Checks the hash of `password` against the SAM entry and, on success,
/// records a new logon session. Throws UnknownUser, BadPassword or
/// SystemLockedOut.
LogonSession authenticate(World& world, std::string_view username, std::string_view password,
                          LogonOrigin origin = LogonOrigin::Interactive);

} // namespace credsim
