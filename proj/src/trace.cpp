#include "chaincheck/trace.hpp"

#include "chaincheck/util.hpp"

namespace chaincheck {

static constexpr uint8_t kMagic[4] = {'D', 'C', 'T', 'R'};
static constexpr uint8_t kVersion = 1;
static constexpr uint8_t kPacketTnt = 0x01;
static constexpr uint8_t kPacketTip = 0x02;
static constexpr uint8_t kPacketFup = 0x03;

std::vector<uint8_t> encode_trace(const TraceHeader& header,
                                  const std::vector<TraceEvent>& events) {
    std::vector<uint8_t> out;
    out.insert(out.end(), kMagic, kMagic + 4);
    put_u8(out, kVersion);
    put_u64(out, header.base);
    put_u64(out, header.entry);

    for (const TraceEvent& ev : events) {
        switch (ev.kind) {
        case TraceEvent::Kind::Tnt: {
            if (ev.bits.empty() || ev.bits.size() > kMaxTntBitsPerPacket)
                throw TraceError(TraceError::Kind::TooManyTntBits, out.size(),
                                 "TNT packet must carry 1..6 bits, got " +
                                     std::to_string(ev.bits.size()));
            put_u8(out, kPacketTnt);
            put_u8(out, static_cast<uint8_t>(ev.bits.size()));
            uint8_t bits = 0;
            for (size_t i = 0; i < ev.bits.size(); ++i)
                if (ev.bits[i]) bits |= static_cast<uint8_t>(1u << i);   // LSB oldest
            put_u8(out, bits);
            break;
        }
        case TraceEvent::Kind::Tip:
            put_u8(out, kPacketTip);
            put_u64(out, ev.address);
            break;
        case TraceEvent::Kind::Fup:
            put_u8(out, kPacketFup);
            put_u64(out, ev.address);
            break;
        }
    }
    return out;
}

DecodedTrace decode_trace(const std::vector<uint8_t>& bytes) {
    constexpr size_t kHeaderSize = 4 + 1 + 8 + 8;
    if (bytes.size() < kHeaderSize)
        throw TraceError(TraceError::Kind::TruncatedPacket, bytes.size(),
                         "trace shorter than header");
    for (int i = 0; i < 4; ++i)
        if (bytes[static_cast<size_t>(i)] != kMagic[i])
            throw TraceError(TraceError::Kind::BadMagic, 0, "bad trace magic");
    if (bytes[4] != kVersion)
        throw TraceError(TraceError::Kind::BadMagic, 4,
                         "unsupported trace version " + std::to_string(bytes[4]));

    DecodedTrace out;
    out.header.base = get_u64(bytes, 5);
    out.header.entry = get_u64(bytes, 13);

    size_t off = kHeaderSize;
    while (off < bytes.size()) {
        const uint8_t type = bytes[off];
        switch (type) {
        case kPacketTnt: {
            if (off + 3 > bytes.size())
                throw TraceError(TraceError::Kind::TruncatedPacket, off, "truncated TNT packet");
            const uint8_t count = bytes[off + 1];
            if (count == 0 || count > kMaxTntBitsPerPacket)
                throw TraceError(TraceError::Kind::BadTntCount, off,
                                 "TNT bit count out of range: " + std::to_string(count));
            const uint8_t raw = bytes[off + 2];
            std::vector<bool> bits(count);
            for (uint8_t i = 0; i < count; ++i) bits[i] = (raw >> i) & 1u;
            out.events.push_back(TraceEvent::tnt(std::move(bits)));
            off += 3;
            break;
        }
        case kPacketTip:
        case kPacketFup: {
            if (off + 9 > bytes.size())
                throw TraceError(TraceError::Kind::TruncatedPacket, off, "truncated address packet");
            const uint64_t addr = get_u64(bytes, off + 1);
            out.events.push_back(type == kPacketTip ? TraceEvent::tip(addr)
                                                    : TraceEvent::fup(addr));
            off += 9;
            break;
        }
        default:
            throw TraceError(TraceError::Kind::UnknownPacketType, off,
                             "unknown packet type byte " + std::to_string(type));
        }
    }
    return out;
}

} // namespace chaincheck
