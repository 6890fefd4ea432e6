// ECDSA/secp256k1 backend on OpenSSL. Uses the pre-3.0 EC_KEY interface,
// which is the only stable way to build a key pair from a caller-supplied
// scalar without a provider round-trip.
#define OPENSSL_SUPPRESS_DEPRECATED

#include <openssl/bn.h>
#include <openssl/ec.h>
#include <openssl/ecdsa.h>
#include <openssl/obj_mac.h>

#include <memory>
#include <stdexcept>

#include "edsc/hash.hpp"
#include "edsc/signature.hpp"

namespace edsc {

namespace {

struct BnDeleter {
    void operator()(BIGNUM* p) const { BN_free(p); }
};
using BnPtr = std::unique_ptr<BIGNUM, BnDeleter>;

struct EcKeyDeleter {
    void operator()(EC_KEY* p) const { EC_KEY_free(p); }
};
using EcKeyPtr = std::unique_ptr<EC_KEY, EcKeyDeleter>;

EcKeyPtr key_from_secret(const Bytes& secret) {
    if (secret.size() != 32) return nullptr;
    EcKeyPtr key(EC_KEY_new_by_curve_name(NID_secp256k1));
    if (!key) return nullptr;
    BnPtr priv(BN_bin2bn(secret.data(), static_cast<int>(secret.size()), nullptr));
    if (!priv || BN_is_zero(priv.get())) return nullptr;
    const EC_GROUP* group = EC_KEY_get0_group(key.get());
    if (EC_KEY_set_private_key(key.get(), priv.get()) != 1) return nullptr;
    EC_POINT* pub = EC_POINT_new(group);
    if (!pub) return nullptr;
    if (EC_POINT_mul(group, pub, priv.get(), nullptr, nullptr, nullptr) != 1) {
        EC_POINT_free(pub);
        return nullptr;
    }
    EC_KEY_set_public_key(key.get(), pub);
    EC_POINT_free(pub);
    return key;
}

EcKeyPtr key_from_public(const Bytes& public_key) {
    EcKeyPtr key(EC_KEY_new_by_curve_name(NID_secp256k1));
    if (!key) return nullptr;
    const EC_GROUP* group = EC_KEY_get0_group(key.get());
    EC_POINT* pt = EC_POINT_new(group);
    if (!pt) return nullptr;
    if (EC_POINT_oct2point(group, pt, public_key.data(), public_key.size(), nullptr) != 1) {
        EC_POINT_free(pt);
        return nullptr;
    }
    EC_KEY_set_public_key(key.get(), pt);
    EC_POINT_free(pt);
    return key;
}

class Secp256k1Scheme final : public SignatureScheme {
public:
    KeyPair keypair_from_seed(const Bytes& seed) const override {
        // Hash the seed into a scalar; re-hash on the (cosmically unlikely)
        // zero / out-of-range result so derivation is total.
        Bytes material(seed);
        for (int attempt = 0; attempt < 16; ++attempt) {
            HashDigest h = sha256(material);
            Bytes secret(h.bytes.begin(), h.bytes.end());
            EcKeyPtr key = key_from_secret(secret);
            if (key && EC_KEY_check_key(key.get()) == 1) {
                const EC_GROUP* group = EC_KEY_get0_group(key.get());
                const EC_POINT* pub = EC_KEY_get0_public_key(key.get());
                Bytes out(33);
                size_t n = EC_POINT_point2oct(group, pub, POINT_CONVERSION_COMPRESSED,
                                              out.data(), out.size(), nullptr);
                if (n == 33) return KeyPair{out, secret};
            }
            material.assign(h.bytes.begin(), h.bytes.end());
        }
        throw std::runtime_error("secp256k1 key derivation failed");
    }

    Bytes sign(const Bytes& secret_key, const HashDigest& digest) const override {
        EcKeyPtr key = key_from_secret(secret_key);
        if (!key) throw std::runtime_error("secp256k1 sign: bad secret key");
        unsigned int sig_len = static_cast<unsigned int>(ECDSA_size(key.get()));
        Bytes sig(sig_len);
        if (ECDSA_sign(0, digest.bytes.data(), static_cast<int>(digest.bytes.size()), sig.data(),
                       &sig_len, key.get()) != 1)
            throw std::runtime_error("secp256k1 sign failed");
        sig.resize(sig_len);
        return sig;
    }

    bool verify(const Bytes& public_key, const HashDigest& digest,
                const Bytes& signature) const override {
        EcKeyPtr key = key_from_public(public_key);
        if (!key) return false;
        return ECDSA_verify(0, digest.bytes.data(), static_cast<int>(digest.bytes.size()),
                            signature.data(), static_cast<int>(signature.size()),
                            key.get()) == 1;
    }
};

}  // namespace

const SignatureScheme& secp256k1_scheme() {
    static const Secp256k1Scheme scheme;
    return scheme;
}

}  // namespace edsc
