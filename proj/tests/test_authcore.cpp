#include <gtest/gtest.h>

#include "credsim/error.hpp"
#include "support.hpp"

using namespace credsim;
using namespace testing_support;

namespace {

Errc code_of(auto&& fn)
{
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no credsim::Error thrown";
    return Errc::Io;
}

} // namespace

TEST(NtHash, AbsentHasEmptyHex)
{
    EXPECT_FALSE(NtHash::absent().present());
    EXPECT_EQ(NtHash::absent().hex(), "");
    EXPECT_EQ(nt_hash_of("test").hex(), kTestHash);
}

TEST(UserAccount, NoPasswordMeansAbsentHash)
{
    const auto a = UserAccount::with_password(503, "DefaultAccount", std::nullopt);
    EXPECT_FALSE(a.nt_hash.present());
    const auto b = UserAccount::with_password(1001, "mainuser", kMainPassword, {"LocalAdministrators"});
    EXPECT_EQ(b.nt_hash.hex(), kMainHash);
    EXPECT_TRUE(b.in_group("LocalAdministrators"));
    EXPECT_FALSE(b.lm_hash.present());
}

TEST(SamDatabase, KeepsInsertionOrderAndRejectsDuplicates)
{
    SamDatabase db(kDomain, kSid);
    db.add(UserAccount::with_password(503, "DefaultAccount", std::nullopt));
    db.add(UserAccount::with_password(1001, "mainuser", kMainPassword));
    db.add(UserAccount::with_password(504, "WDAGUtilityAccount", "x"));

    const auto entries = sam_enumerate(db);
    ASSERT_EQ(entries.size(), 3u);
    EXPECT_EQ(entries[0].rid, 503u);
    EXPECT_EQ(entries[1].rid, 1001u);
    EXPECT_EQ(entries[2].rid, 504u);

    EXPECT_EQ(code_of([&] { db.add(UserAccount::with_password(1001, "other", "x")); }), Errc::DuplicateAccount);
    EXPECT_EQ(code_of([&] { db.add(UserAccount::with_password(2000, "mainuser", "x")); }), Errc::DuplicateAccount);
    EXPECT_EQ(db.size(), 3u);
    EXPECT_NE(db.find_rid(504), nullptr);
    EXPECT_EQ(db.find_user("nobody"), nullptr);
}

TEST(SamDatabase, SerializationHoldsHashesNotPasswords)
{
    SamDatabase db(kDomain, kSid);
    db.add(UserAccount::with_password(1001, "mainuser", kMainPassword));
    const std::string text = db.serialize();
    EXPECT_NE(text.find(kMainHash), std::string::npos);
    EXPECT_EQ(text.find(kMainPassword), std::string::npos);
}

TEST(LogonOrigin, RoundTrips)
{
    for (auto o : {LogonOrigin::Interactive, LogonOrigin::SpawnedWithLogon, LogonOrigin::Service,
                   LogonOrigin::RemoteRdp}) {
        EXPECT_EQ(logon_origin_from_string(to_string(o)), o);
    }
    EXPECT_FALSE(logon_origin_from_string("Batch"));
}

TEST(CredentialStore, DecoysGoInFrontNewestFirst)
{
    CredentialStore store;
    LogonSession real{0, "mainuser", kDomain, LogonOrigin::Interactive, "pw", nt_hash_of("pw"), false};
    store.add_real(real);
    LogonSession d1{0, "first", "d", LogonOrigin::SpawnedWithLogon, "a", nt_hash_of("a"), true};
    LogonSession d2{0, "second", "d", LogonOrigin::SpawnedWithLogon, "b", nt_hash_of("b"), true};
    store.add_decoy(d1);
    store.add_decoy(d2);

    ASSERT_EQ(store.sessions().size(), 3u);
    EXPECT_EQ(store.sessions()[0].username, "second");
    EXPECT_EQ(store.sessions()[1].username, "first");
    EXPECT_EQ(store.sessions()[2].username, "mainuser");
    EXPECT_EQ(store.decoy_count(), 2u);
}

TEST(CredentialStore, TurningWDigestOffScrubsRealPlaintextOnly)
{
    CredentialStore store;
    store.add_real({0, "mainuser", kDomain, LogonOrigin::Interactive, "pw", nt_hash_of("pw"), false});
    store.add_decoy({0, "test", "test", LogonOrigin::SpawnedWithLogon, "test", nt_hash_of("test"), true});
    store.set_use_logon_credential(false);
    EXPECT_TRUE(store.sessions()[0].wdigest_plaintext);
    EXPECT_FALSE(store.sessions()[1].wdigest_plaintext);
    EXPECT_TRUE(store.sessions()[1].cached_nt_hash.present());
}

TEST(CredentialStore, CredentialGuardRedactsReads)
{
    CredentialStore store;
    store.add_real({0, "mainuser", kDomain, LogonOrigin::Interactive, "pw", nt_hash_of("pw"), false});
    store.set_credential_guard(true);
    const auto seen = read_logon_sessions(store);
    ASSERT_EQ(seen.size(), 1u);
    EXPECT_EQ(seen[0].username, "mainuser");
    EXPECT_FALSE(seen[0].wdigest_plaintext);
    EXPECT_FALSE(seen[0].cached_nt_hash.present());
    // the store itself still holds them
    EXPECT_TRUE(store.sessions()[0].wdigest_plaintext);
}

TEST(Authenticate, SuccessCachesHashAndPlaintext)
{
    World w = build_world(default_fixture());
    const auto s = authenticate(w, "mainuser", kMainPassword);
    EXPECT_EQ(s.cached_nt_hash.hex(), kMainHash);
    EXPECT_EQ(s.wdigest_plaintext, std::optional<std::string>(kMainPassword));
    EXPECT_FALSE(s.is_decoy);
    EXPECT_EQ(w.credentials().sessions().size(), 1u);
}

TEST(Authenticate, FailuresLeaveNoSession)
{
    World w = build_world(default_fixture());
    EXPECT_EQ(code_of([&] { authenticate(w, "ghost", "x"); }), Errc::UnknownUser);
    EXPECT_EQ(code_of([&] { authenticate(w, "mainuser", "wrong"); }), Errc::BadPassword);
    // no password on the account: nothing matches, not even the empty string
    EXPECT_EQ(code_of([&] { authenticate(w, "DefaultAccount", ""); }), Errc::BadPassword);
    EXPECT_TRUE(w.credentials().sessions().empty());
}

TEST(Authenticate, WDigestOffKeepsHashOnly)
{
    Fixture f = default_fixture();
    f.use_logon_credential = false;
    World w = build_world(f);
    const auto s = authenticate(w, "mainuser", kMainPassword);
    EXPECT_FALSE(s.wdigest_plaintext);
    EXPECT_TRUE(s.cached_nt_hash.present());
}

TEST(Authenticate, ProtectedUsersCacheNothing)
{
    World w = build_world(default_fixture());
    w.sam().find_user("mainuser")->groups.insert(std::string(kProtectedUsers));
    const auto s = authenticate(w, "mainuser", kMainPassword);
    EXPECT_FALSE(s.wdigest_plaintext);
    EXPECT_FALSE(s.cached_nt_hash.present());
}

TEST(Authenticate, RestrictedAdminRdpDropsPlaintextForRdpOnly)
{
    World w = build_world(default_fixture());
    w.policy().restricted_admin_rdp = true;
    EXPECT_FALSE(authenticate(w, "mainuser", kMainPassword, LogonOrigin::RemoteRdp).wdigest_plaintext);
    EXPECT_TRUE(authenticate(w, "mainuser", kMainPassword, LogonOrigin::Interactive).wdigest_plaintext);
}

TEST(Authenticate, NtlmDisabledCachesNothing)
{
    World w = build_world(default_fixture());
    w.policy().ntlm_disabled = true;
    const auto s = authenticate(w, "mainuser", kMainPassword);
    EXPECT_FALSE(s.cached_nt_hash.present());
    EXPECT_FALSE(s.wdigest_plaintext);
}

TEST(Authenticate, LockedOutRejectsEvenCorrectPassword)
{
    World w = build_world(default_fixture());
    w.set_locked_out(true);
    EXPECT_EQ(code_of([&] { authenticate(w, "mainuser", kMainPassword); }), Errc::SystemLockedOut);
}

TEST(Authenticate, SpawnedWithLogonIsNotAnAuthenticationOrigin)
{
    World w = build_world(default_fixture());
    EXPECT_EQ(code_of([&] { authenticate(w, "mainuser", kMainPassword, LogonOrigin::SpawnedWithLogon); }),
              Errc::ValidationError);
}

TEST(Authenticate, EveryAttemptIsLogged)
{
    World w = build_world(default_fixture());
    const auto before = w.event_log().size();
    EXPECT_ANY_THROW(authenticate(w, "ghost", "x"));
    authenticate(w, "mainuser", kMainPassword);
    ASSERT_EQ(w.event_log().size(), before + 2);
    EXPECT_EQ(w.event_log().back().kind, WorldEvent::Kind::LogonAttempt);
}

TEST(Error, CarriesCodeLineAndMessage)
{
    const Error e(Errc::ParseError, "bad thing", 7);
    EXPECT_EQ(e.code(), Errc::ParseError);
    EXPECT_EQ(e.line(), std::optional<std::size_t>(7));
    EXPECT_EQ(e.message(), "bad thing");
    EXPECT_NE(std::string(e.what()).find("line 7"), std::string::npos);
    EXPECT_EQ(to_string(Errc::SystemLockedOut), "SystemLockedOut");
}
