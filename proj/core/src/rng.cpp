#include "edsc/rng.hpp"

#include <cstring>

#include "edsc/hash.hpp"

namespace edsc {

Rng Rng::substream(uint64_t root_seed, std::string_view name) {
    Bytes buf(8);
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<uint8_t>(root_seed >> (8 * i));
    buf.insert(buf.end(), name.begin(), name.end());
    HashDigest h = sha256(buf);
    uint64_t derived = 0;
    std::memcpy(&derived, h.bytes.data(), 8);
    return Rng(derived);
}

}  // namespace edsc
