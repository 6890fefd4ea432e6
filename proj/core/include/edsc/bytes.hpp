#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace edsc {

using Bytes = std::vector<uint8_t>;

std::string to_hex(const uint8_t* data, size_t len);
inline std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }
std::optional<Bytes> from_hex(std::string_view hex);

/// 160-bit account / event identifier. Rendered as lowercase hex with 0x prefix.
struct Address {
    std::array<uint8_t, 20> bytes{};

    auto operator<=>(const Address&) const = default;

    std::string to_hex() const { return "0x" + edsc::to_hex(bytes.data(), bytes.size()); }
    static std::optional<Address> from_hex(std::string_view text);
    bool is_zero() const {
        for (uint8_t b : bytes)
            if (b != 0) return false;
        return true;
    }
};

/// 256-bit digest. Only ever produced by edsc::sha256.
struct HashDigest {
    std::array<uint8_t, 32> bytes{};

    auto operator<=>(const HashDigest&) const = default;

    std::string to_hex() const { return edsc::to_hex(bytes.data(), bytes.size()); }
    static std::optional<HashDigest> from_hex(std::string_view text);
};

}  // namespace edsc
