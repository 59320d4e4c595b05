// Simplified branch-trace packet format, a stand-in for hardware
// processor-trace capture. Three packet kinds survive from the real thing:
// TNT (taken/not-taken bits for conditional branches), TIP (destination of
// an indirect branch) and FUP (asynchronous event address, decoded but
// ignored downstream).
//
// Wire format, all little-endian:
//   header:  magic "DCTR", u8 version=1, u64 base, u64 entry
//   packets: 0x01 count:u8 bits:u8   TNT, low `count` bits valid, LSB oldest
//            0x02 addr:u64           TIP
//            0x03 addr:u64           FUP

#ifndef CHAINCHECK_TRACE_HPP
#define CHAINCHECK_TRACE_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace chaincheck {

constexpr size_t kMaxTntBitsPerPacket = 6;

struct TraceEvent {
    enum class Kind : uint8_t { Tnt, Tip, Fup };

    Kind kind = Kind::Tip;
    std::vector<bool> bits;   // Tnt only; oldest first
    uint64_t address = 0;     // Tip/Fup only; absolute runtime address

    static TraceEvent tnt(std::vector<bool> b) {
        TraceEvent e;
        e.kind = Kind::Tnt;
        e.bits = std::move(b);
        return e;
    }
    static TraceEvent tip(uint64_t addr) {
        TraceEvent e;
        e.kind = Kind::Tip;
        e.address = addr;
        return e;
    }
    static TraceEvent fup(uint64_t addr) {
        TraceEvent e;
        e.kind = Kind::Fup;
        e.address = addr;
        return e;
    }

    bool operator==(const TraceEvent&) const = default;
};

struct TraceHeader {
    uint64_t base = 0;    // module load address at record time
    uint64_t entry = 0;   // absolute address of the first executed gadget

    bool operator==(const TraceHeader&) const = default;
};

struct TraceError : std::runtime_error {
    enum class Kind {
        TooManyTntBits,
        BadMagic,
        TruncatedPacket,
        UnknownPacketType,
        BadTntCount,
    };

    Kind kind;
    size_t offset;   // byte offset for decode errors

    TraceError(Kind k, size_t off, const std::string& msg)
        : std::runtime_error(msg), kind(k), offset(off) {}
};

std::vector<uint8_t> encode_trace(const TraceHeader& header,
                                  const std::vector<TraceEvent>& events);

struct DecodedTrace {
    TraceHeader header;
    std::vector<TraceEvent> events;
};

// Exact inverse of encode_trace.
DecodedTrace decode_trace(const std::vector<uint8_t>& bytes);

} // namespace chaincheck

#endif
