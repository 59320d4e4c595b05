// Instruction-listing ingestion: parse a disassembly listing document into
// typed instructions, classify branch kinds, and segment the listing into
// gadgets (a gadget runs from the instruction after a branch up to and
// including the next branch instruction).

#ifndef CHAINCHECK_LISTING_HPP
#define CHAINCHECK_LISTING_HPP

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace chaincheck {

enum class BranchKind : uint8_t {
    None = 0,
    DirectUnconditional,
    DirectConditional,
    IndirectCall,
    IndirectJump,
    Return,
};

// Return / IndirectCall / IndirectJump; these are the transfers whose targets
// are runtime values and hence reported via TIP packets.
inline bool is_indirect(BranchKind k) {
    return k == BranchKind::Return || k == BranchKind::IndirectCall ||
           k == BranchKind::IndirectJump;
}

inline bool is_direct(BranchKind k) {
    return k == BranchKind::DirectUnconditional || k == BranchKind::DirectConditional;
}

const char* branch_kind_name(BranchKind k);
std::optional<BranchKind> branch_kind_from_name(const std::string& name);

struct Instruction {
    uint64_t address = 0;
    std::vector<uint8_t> bytes;       // 1..15 bytes
    std::string mnemonic;
    std::string operands;
    BranchKind branch = BranchKind::None;
    std::optional<uint64_t> target;   // present iff direct branch
    uint32_t section = 0;             // dense section index, in listing order
};

struct Gadget {
    uint32_t id = 0;                  // dense, in address order
    uint64_t start = 0;               // address of the first member instruction
    std::vector<uint8_t> bytes;       // concatenated member instruction bytes
    BranchKind terminator = BranchKind::None;
    std::optional<uint64_t> direct_target;
    uint32_t section = 0;
};

struct ListingError : std::runtime_error {
    enum class Kind { MalformedLine, NonMonotonicAddress, OverlongInstruction, EmptyListing };

    Kind kind;
    size_t line;

    ListingError(Kind k, size_t line_no, const std::string& msg)
        : std::runtime_error(msg), kind(k), line(line_no) {}
};

struct ParsedListing {
    std::vector<Instruction> instructions;   // sorted by address, per section
    std::vector<std::string> section_names;
};

// Deterministic mnemonic/operand-shape -> BranchKind mapping. Register or
// memory operands on call/jmp are indirect, immediates direct; unknown
// mnemonics are non-branches.
BranchKind classify_branch(const std::string& mnemonic, const std::string& operands);

// Parses a UTF-8 listing document: one JSON object per line with keys
// `addr` (integer or "0x..." string), `bytes` (even-length lowercase hex),
// `mn`, optional `ops`, `target` (direct branches only), `section`
// (default "text"). `#` lines are comments. Addresses must be strictly
// increasing; contiguity gaps start new sections.
ParsedListing parse_listing(const std::string& document);

struct SegmentResult {
    std::vector<Gadget> gadgets;
    uint64_t dropped_tail_instructions = 0;  // non-branch tails at section ends
    uint64_t dropped_tail_bytes = 0;
};

// Splits instructions into gadgets. Every branch instruction terminates
// exactly one gadget; section breaks reset segmentation; trailing non-branch
// instructions of a section are dropped and counted.
SegmentResult segment_gadgets(const std::vector<Instruction>& instructions);

} // namespace chaincheck

#endif
