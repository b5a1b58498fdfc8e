// SPDX-License-Identifier: Apache-2.0
#include <openssl/sha.h>

#include "bhfr/types.hpp"

namespace bhfr {

std::string to_hex(const Digest& d) {
    static constexpr char kHex[] = "0123456789abcdef";
    std::string s;
    s.reserve(64);
    for (auto b : d) {
        s.push_back(kHex[b >> 4]);
        s.push_back(kHex[b & 0xF]);
    }
    return s;
}

Digest sha256(std::span<const std::uint8_t> bytes) {
    Digest d{};
    SHA256(bytes.data(), bytes.size(), d.data());
    return d;
}

Digest sha256(const std::string& text) {
    return sha256(std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace bhfr
