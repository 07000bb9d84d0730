#include "semlink/coding.hpp"

#include <stdexcept>

namespace semlink {

namespace {

// Codeword layout [p1 p2 d0 p3 d1 d2 d3] with parity bits at positions
// 1, 2 and 4 (1-based), so the syndrome is the 1-based error position.
void encode_block(const uint8_t* d, uint8_t* c) {
    uint8_t p1 = uint8_t(d[0] ^ d[1] ^ d[3]);
    uint8_t p2 = uint8_t(d[0] ^ d[2] ^ d[3]);
    uint8_t p3 = uint8_t(d[1] ^ d[2] ^ d[3]);
    c[0] = p1;
    c[1] = p2;
    c[2] = d[0];
    c[3] = p3;
    c[4] = d[1];
    c[5] = d[2];
    c[6] = d[3];
}

void decode_block(const uint8_t* in, uint8_t* d) {
    uint8_t c[7];
    for (int i = 0; i < 7; ++i) c[i] = uint8_t(in[i] & 1);
    int s1 = c[0] ^ c[2] ^ c[4] ^ c[6];
    int s2 = c[1] ^ c[2] ^ c[5] ^ c[6];
    int s3 = c[3] ^ c[4] ^ c[5] ^ c[6];
    int pos = s1 + 2 * s2 + 4 * s3;
    if (pos > 0) c[pos - 1] ^= 1;
    d[0] = c[2];
    d[1] = c[4];
    d[2] = c[5];
    d[3] = c[6];
}

} // namespace

BitVec channel_encode(const BitVec& bits, const ChannelCode& code) {
    if (code.variant == CodeVariant::identity) return bits;
    BitVec padded = bits;
    while (padded.size() % 4 != 0) padded.push_back(0);
    BitVec out(padded.size() / 4 * 7);
    for (size_t b = 0; b < padded.size() / 4; ++b) {
        encode_block(padded.data() + 4 * b, out.data() + 7 * b);
    }
    return out;
}

BitVec channel_decode(const BitVec& bits, const ChannelCode& code, size_t orig_len) {
    if (code.variant == CodeVariant::identity) {
        if (bits.size() < orig_len)
            throw std::invalid_argument("channel_decode: fewer bits than orig_len");
        return BitVec(bits.begin(), bits.begin() + long(orig_len));
    }
    if (bits.size() % 7 != 0)
        throw std::invalid_argument("channel_decode: hamming74 input not a multiple of 7");
    BitVec data(bits.size() / 7 * 4);
    for (size_t b = 0; b < bits.size() / 7; ++b) {
        decode_block(bits.data() + 7 * b, data.data() + 4 * b);
    }
    if (data.size() < orig_len)
        throw std::invalid_argument("channel_decode: decoded fewer bits than orig_len");
    data.resize(orig_len);
    return data;
}

} // namespace semlink
