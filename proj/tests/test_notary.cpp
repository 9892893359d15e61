#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "auditshare/errors.hpp"
#include "auditshare/fsio.hpp"
#include "auditshare/notary.hpp"

using namespace auditshare;
using auditshare::ot::ChoiceVector;
using auditshare::ot::MsgPair;

namespace {

struct Fixture {
    std::vector<std::pair<Bytes, Bytes>> msgs;
    SendingTree tree;
    ChoiceVector choices;
    std::vector<Bytes> received;
    SessionId sid{};

    explicit Fixture(uint8_t tag, size_t n = 16, const char* marker = "") {
        sid.fill(tag);
        DetRng rng(tag, "fixture");
        msgs.resize(n);
        choices.bits.resize(n);
        for (size_t i = 0; i < n; ++i) {
            msgs[i].first.resize(64);
            msgs[i].second.resize(64);
            rng.fill(msgs[i].first.data(), 64);
            rng.fill(msgs[i].second.data(), 64);
            for (size_t k = 0; marker[k] && k < 64; ++k) {
                msgs[i].first[k] = uint8_t(marker[k]);
                msgs[i].second[k] = uint8_t(marker[k]);
            }
            choices.bits[i] = rng.bit();
            received.push_back(choices.bits[i] ? msgs[i].second : msgs[i].first);
        }
        std::vector<MsgPair> views;
        for (const auto& m : msgs) views.push_back({m.first, m.second});
        tree = build_sending_tree(views);
    }

    void register_steps(Notary& notary, const std::string& rid = "R1") const {
        notary.on_tree_nodes(sid, rid, tree.leaf_hashes);
        notary.on_choices(sid, rid, choices);
    }
};

}  // namespace

TEST_CASE("honest session certifies and the signature verifies") {
    DetRng rng(1, "notary");
    Notary notary(NotaryConfig{}, rng);
    Fixture fx(1);
    fx.register_steps(notary);

    CertifyResult res = notary.certify(fx.sid, "R1", build_receiving_root(fx.received));
    REQUIRE(certified(res));
    const auto& cert = std::get<SharingCertificate>(res);
    CHECK(verify_certificate(cert, notary.public_key()));
    CHECK(cert.session_id == fx.sid);
    CHECK(cert.receiver_id == "R1");

    // round trip through the record encoding
    SharingCertificate back = SharingCertificate::deserialize(cert.serialize());
    CHECK(back.signed_bytes() == cert.signed_bytes());
    CHECK(verify_certificate(back, notary.public_key()));

    // forged signature is rejected
    SharingCertificate forged = cert;
    forged.notary_signature[0] ^= 1;
    CHECK(!verify_certificate(forged, notary.public_key()));
}

TEST_CASE("tampered received message yields VerificationFailure") {
    DetRng rng(2, "notary");
    Notary notary(NotaryConfig{}, rng);
    Fixture fx(2);
    fx.register_steps(notary);

    auto received = fx.received;
    received[7][13] ^= 0x20;  // one flipped byte in one message
    CertifyResult res = notary.certify(fx.sid, "R1", build_receiving_root(received));
    REQUIRE(!certified(res));
    CHECK(std::get<VerificationFailure>(res).reason == "receiving root mismatch");
}

TEST_CASE("step replay and out-of-order steps") {
    DetRng rng(3, "notary");
    Notary notary(NotaryConfig{}, rng);
    Fixture fx(3);

    // step 2 before step 1
    CHECK_THROWS_AS(notary.on_choices(fx.sid, "R1", fx.choices), AuditError);
    // step 3 before step 2
    notary.on_tree_nodes(fx.sid, "R1", fx.tree.leaf_hashes);
    CHECK_THROWS_AS(notary.certify(fx.sid, "R1", build_receiving_root(fx.received)), AuditError);

    notary.on_choices(fx.sid, "R1", fx.choices);
    CertifyResult res = notary.certify(fx.sid, "R1", build_receiving_root(fx.received));
    CHECK(certified(res));

    // replay of step 3 after certification
    try {
        notary.certify(fx.sid, "R1", build_receiving_root(fx.received));
        CHECK(false);
    } catch (const AuditError& e) {
        CHECK(e.code() == Err::OutOfOrderProtocol);
    }
}

TEST_CASE("choice length mismatch rejected at commit") {
    DetRng rng(4, "notary");
    Notary notary(NotaryConfig{}, rng);
    Fixture fx(4);
    notary.on_tree_nodes(fx.sid, "R1", fx.tree.leaf_hashes);
    ChoiceVector wrong;
    wrong.bits.assign(fx.choices.size() + 1, 0);
    try {
        notary.on_choices(fx.sid, "R1", wrong);
        CHECK(false);
    } catch (const AuditError& e) {
        CHECK(e.code() == Err::LengthMismatch);
    }
}

TEST_CASE("disclose_keys: credential gate and field decryption") {
    DetRng rng(5, "notary");
    Notary notary(NotaryConfig{}, rng);
    REQUIRE(notary.initial_credential().has_value());
    Bytes credential = *notary.initial_credential();

    Fixture fx(5);
    fx.register_steps(notary);
    ReceivingTreeRoot recv_root = build_receiving_root(fx.received);
    CertifyResult res = notary.certify(fx.sid, "R1", recv_root);
    REQUIRE(certified(res));
    const auto& cert = std::get<SharingCertificate>(res);

    Bytes wrong = credential;
    wrong[0] ^= 1;
    CHECK_THROWS_AS(notary.disclose_keys(fx.sid, wrong), AuditError);
    SessionId unknown{};
    unknown.fill(0xEE);
    CHECK_THROWS_AS(notary.disclose_keys(unknown, credential), AuditError);

    AeadKey key = notary.disclose_keys(fx.sid, credential);
    CHECK(decrypt_certified_root(cert, key) == fx.tree.root);
    ChoiceVector choices = decrypt_certified_choices(cert, key);
    CHECK(choices.bits == fx.choices.bits);

    // decrypted choices re-derive the certified receiving root
    CHECK(derive_receiving_root(fx.tree, choices) == recv_root);

    // wrong key does not open the seals
    AeadKey bad{};
    CHECK_THROWS_AS(decrypt_certified_root(cert, bad), AuditError);
}

TEST_CASE("notary state holds no payload bytes (zero-knowledge audit)") {
    DetRng rng(6, "notary");
    Notary notary(NotaryConfig{}, rng);
    const char* marker = "SECRET_PAYLOAD_MARKER_XYZ";
    Fixture fx(6, 8, marker);
    fx.register_steps(notary);
    CertifyResult res = notary.certify(fx.sid, "R1", build_receiving_root(fx.received));
    REQUIRE(certified(res));

    Bytes snapshot = notary.state_snapshot();
    std::string hay(snapshot.begin(), snapshot.end());
    CHECK(hay.find(marker) == std::string::npos);
    // sanity: the marker does sit inside every message
    std::string m0(fx.msgs[0].first.begin(), fx.msgs[0].first.end());
    CHECK(m0.find(marker) == 0);
}

TEST_CASE("notary persistence: store file and key reload") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "auditshare-notary-test";
    fs::remove_all(dir);
    fs::create_directories(dir);
    NotaryConfig cfg;
    cfg.store_path = (dir / "notary.store").string();
    cfg.keys_path = (dir / "notary.keys").string();

    Fixture fx(7);
    Bytes credential;
    std::array<uint8_t, 32> pk;
    Bytes cert_bytes;
    {
        DetRng rng(7, "notary");
        Notary notary(cfg, rng);
        credential = *notary.initial_credential();
        pk = notary.public_key();
        fx.register_steps(notary);
        CertifyResult res = notary.certify(fx.sid, "R1", build_receiving_root(fx.received));
        REQUIRE(certified(res));
        cert_bytes = std::get<SharingCertificate>(res).serialize();
    }
    // a fresh notary process loads the keys and can still disclose
    DetRng rng2(8, "notary");
    Notary reloaded(cfg, rng2);
    CHECK(reloaded.public_key() == pk);
    CHECK(!reloaded.initial_credential().has_value());
    AeadKey key = reloaded.disclose_keys(fx.sid, credential);
    SharingCertificate cert = SharingCertificate::deserialize(cert_bytes);
    CHECK(decrypt_certified_root(cert, key) == fx.tree.root);

    // the store grew by one certificate record
    Bytes store = read_file(cfg.store_path);
    CHECK(store.size() > cert_bytes.size());
}
