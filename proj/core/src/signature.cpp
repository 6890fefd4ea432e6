#include "edsc/signature.hpp"

#include <cstring>

#include "edsc/codec.hpp"
#include "edsc/hash.hpp"

namespace edsc {

namespace {

Bytes with_prefix(std::string_view prefix, std::initializer_list<const Bytes*> parts) {
    Bytes buf(prefix.begin(), prefix.end());
    for (const Bytes* p : parts) buf.insert(buf.end(), p->begin(), p->end());
    return buf;
}

class DeskScheme final : public SignatureScheme {
public:
    KeyPair keypair_from_seed(const Bytes& seed) const override {
        Bytes material(seed);
        HashDigest sec = sha256(with_prefix("edsc.key", {&material}));
        Bytes secret(sec.bytes.begin(), sec.bytes.end());
        HashDigest pub = sha256(with_prefix("edsc.pub", {&secret}));
        return KeyPair{Bytes(pub.bytes.begin(), pub.bytes.end()), secret};
    }

    Bytes sign(const Bytes& secret_key, const HashDigest& digest) const override {
        Bytes dig(digest.bytes.begin(), digest.bytes.end());
        HashDigest mac = sha256(with_prefix("edsc.mac", {&secret_key, &dig}));
        Bytes sig(secret_key);
        sig.insert(sig.end(), mac.bytes.begin(), mac.bytes.end());
        return sig;
    }

    bool verify(const Bytes& public_key, const HashDigest& digest,
                const Bytes& signature) const override {
        if (signature.size() != 64 || public_key.size() != 32) return false;
        Bytes secret(signature.begin(), signature.begin() + 32);
        HashDigest pub = sha256(with_prefix("edsc.pub", {&secret}));
        if (!std::equal(pub.bytes.begin(), pub.bytes.end(), public_key.begin())) return false;
        Bytes dig(digest.bytes.begin(), digest.bytes.end());
        HashDigest mac = sha256(with_prefix("edsc.mac", {&secret, &dig}));
        return std::equal(mac.bytes.begin(), mac.bytes.end(), signature.begin() + 32);
    }
};

}  // namespace

const SignatureScheme& desk_scheme() {
    static const DeskScheme scheme;
    return scheme;
}

Bytes make_signature_blob(const SignatureScheme& scheme, const KeyPair& key,
                          const HashDigest& digest) {
    Writer w;
    w.put_bytes(key.public_key);
    w.put_bytes(scheme.sign(key.secret_key, digest));
    return std::move(w).take();
}

bool verify_signature_blob(const SignatureScheme& scheme, const Address& expected_signer,
                           const HashDigest& digest, const Bytes& blob) {
    try {
        Reader r(blob);
        Bytes pub = r.get_bytes();
        Bytes sig = r.get_bytes();
        r.expect_end();
        if (address_of_key(pub) != expected_signer) return false;
        return scheme.verify(pub, digest, sig);
    } catch (const DecodeError&) {
        return false;
    }
}

}  // namespace edsc
