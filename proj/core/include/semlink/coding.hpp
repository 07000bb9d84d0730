#pragma once

#include <cstddef>

#include "semlink/quant.hpp"

namespace semlink {

enum class CodeVariant { identity, hamming74 };

struct ChannelCode {
    CodeVariant variant = CodeVariant::identity;

    double rate() const { return variant == CodeVariant::hamming74 ? 4.0 / 7.0 : 1.0; }
    // Coded length for a payload of n information bits (includes the
    // zero-padding needed to fill the last block).
    size_t coded_length(size_t n) const {
        if (variant == CodeVariant::identity) return n;
        return 7 * ((n + 3) / 4);
    }
};

// identity: passthrough. hamming74: zero-pad to a multiple of 4, then map
// each 4-bit block to its 7-bit codeword.
BitVec channel_encode(const BitVec& bits, const ChannelCode& code);

// identity: passthrough truncated to orig_len. hamming74: syndrome decoding
// corrects up to one flipped bit per 7-bit block; padding stripped.
BitVec channel_decode(const BitVec& bits, const ChannelCode& code, size_t orig_len);

} // namespace semlink
