#include "edsc/hash.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

namespace edsc {

std::string to_hex(const uint8_t* data, size_t len) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    out.reserve(len * 2);
    for (size_t i = 0; i < len; ++i) {
        out.push_back(digits[data[i] >> 4]);
        out.push_back(digits[data[i] & 0xf]);
    }
    return out;
}

static int hex_val(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

std::optional<Bytes> from_hex(std::string_view hex) {
    if (hex.size() >= 2 && hex[0] == '0' && (hex[1] == 'x' || hex[1] == 'X')) hex.remove_prefix(2);
    if (hex.size() % 2 != 0) return std::nullopt;
    Bytes out;
    out.reserve(hex.size() / 2);
    for (size_t i = 0; i < hex.size(); i += 2) {
        int hi = hex_val(hex[i]), lo = hex_val(hex[i + 1]);
        if (hi < 0 || lo < 0) return std::nullopt;
        out.push_back(static_cast<uint8_t>(hi << 4 | lo));
    }
    return out;
}

std::optional<Address> Address::from_hex(std::string_view text) {
    auto raw = edsc::from_hex(text);
    if (!raw || raw->size() != 20) return std::nullopt;
    Address a;
    std::memcpy(a.bytes.data(), raw->data(), 20);
    return a;
}

std::optional<HashDigest> HashDigest::from_hex(std::string_view text) {
    auto raw = edsc::from_hex(text);
    if (!raw || raw->size() != 32) return std::nullopt;
    HashDigest h;
    std::memcpy(h.bytes.data(), raw->data(), 32);
    return h;
}

HashDigest sha256(std::span<const uint8_t> data) {
    HashDigest out;
    unsigned int len = 0;
    if (!EVP_Digest(data.data(), data.size(), out.bytes.data(), &len, EVP_sha256(), nullptr) ||
        len != 32)
        throw std::runtime_error("sha256 failed");
    return out;
}

HashDigest sha256(const Bytes& data) { return sha256(std::span<const uint8_t>(data)); }

HashDigest sha256(std::string_view data) {
    return sha256(std::span<const uint8_t>(reinterpret_cast<const uint8_t*>(data.data()),
                                           data.size()));
}

Address derive_event_id(const Address& creator, const Bytes& definition_bytes) {
    Bytes buf;
    buf.reserve(20 + definition_bytes.size());
    buf.insert(buf.end(), creator.bytes.begin(), creator.bytes.end());
    buf.insert(buf.end(), definition_bytes.begin(), definition_bytes.end());
    HashDigest h = sha256(buf);
    Address a;
    std::memcpy(a.bytes.data(), h.bytes.data(), 20);
    return a;
}

Address address_of_key(const Bytes& public_key) {
    HashDigest h = sha256(public_key);
    Address a;
    std::memcpy(a.bytes.data(), h.bytes.data(), 20);
    return a;
}

HashDigest merkle_root(std::vector<HashDigest> leaves) {
    if (leaves.empty()) return sha256(std::span<const uint8_t>{});
    while (leaves.size() > 1) {
        if (leaves.size() % 2 != 0) leaves.push_back(leaves.back());
        std::vector<HashDigest> next;
        next.reserve(leaves.size() / 2);
        for (size_t i = 0; i < leaves.size(); i += 2) {
            uint8_t buf[64];
            std::memcpy(buf, leaves[i].bytes.data(), 32);
            std::memcpy(buf + 32, leaves[i + 1].bytes.data(), 32);
            next.push_back(sha256(std::span<const uint8_t>(buf, 64)));
        }
        leaves = std::move(next);
    }
    return leaves[0];
}

}  // namespace edsc
