#include "chaincheck/listing.hpp"

#include <json.hpp>

#include <algorithm>
#include <array>
#include <cctype>
#include <sstream>
#include <unordered_map>

namespace chaincheck {

const char* branch_kind_name(BranchKind k) {
    switch (k) {
    case BranchKind::None: return "none";
    case BranchKind::DirectUnconditional: return "jmp";
    case BranchKind::DirectConditional: return "jcc";
    case BranchKind::IndirectCall: return "icall";
    case BranchKind::IndirectJump: return "ijmp";
    case BranchKind::Return: return "ret";
    }
    return "none";
}

std::optional<BranchKind> branch_kind_from_name(const std::string& name) {
    static const std::unordered_map<std::string, BranchKind> table = {
        {"none", BranchKind::None},
        {"jmp", BranchKind::DirectUnconditional},
        {"jcc", BranchKind::DirectConditional},
        {"icall", BranchKind::IndirectCall},
        {"ijmp", BranchKind::IndirectJump},
        {"ret", BranchKind::Return},
    };
    const auto it = table.find(name);
    if (it == table.end()) return std::nullopt;
    return it->second;
}

namespace {

// Conditional jumps (Jcc family). Direct by construction on x86.
bool is_conditional_mnemonic(const std::string& mn) {
    static const std::array<const char*, 34> cond = {
        "ja", "jae", "jb", "jbe", "jc", "jcxz", "jecxz", "jrcxz", "je", "jg",
        "jge", "jl", "jle", "jna", "jnae", "jnb", "jnbe", "jnc", "jne", "jng",
        "jnge", "jnl", "jnle", "jno", "jnp", "jns", "jnz", "jo", "jp", "jpe",
        "jpo", "js", "jz", "loop",
    };
    return std::find_if(cond.begin(), cond.end(), [&](const char* c) { return mn == c; }) !=
           cond.end();
}

// Operand shape: immediates start with a digit (or 0x); anything else
// (register name, memory bracket, AT&T star) is a runtime value.
bool operand_is_immediate(const std::string& ops) {
    for (char c : ops) {
        if (std::isspace(static_cast<unsigned char>(c))) continue;
        if (c == '*' || c == '[' || c == '%') return false;
        return std::isdigit(static_cast<unsigned char>(c)) != 0;
    }
    return false;
}

} // namespace

BranchKind classify_branch(const std::string& mnemonic, const std::string& operands) {
    if (mnemonic.empty()) return BranchKind::None;
    if (mnemonic == "ret" || mnemonic == "retq" || mnemonic == "retn")
        return BranchKind::Return;
    if (mnemonic == "jmp" || mnemonic == "jmpq")
        return operand_is_immediate(operands) ? BranchKind::DirectUnconditional
                                              : BranchKind::IndirectJump;
    if (mnemonic == "call" || mnemonic == "callq")
        return operand_is_immediate(operands) ? BranchKind::DirectUnconditional
                                              : BranchKind::IndirectCall;
    if (is_conditional_mnemonic(mnemonic)) return BranchKind::DirectConditional;
    return BranchKind::None;
}

namespace {

uint64_t parse_address_field(const nlohmann::json& v, size_t line_no) {
    if (v.is_number_unsigned()) return v.get<uint64_t>();
    if (v.is_number_integer()) {
        const int64_t s = v.get<int64_t>();
        if (s < 0)
            throw ListingError(ListingError::Kind::MalformedLine, line_no,
                               "negative address");
        return static_cast<uint64_t>(s);
    }
    if (v.is_string()) {
        const std::string s = v.get<std::string>();
        try {
            size_t pos = 0;
            const uint64_t r = std::stoull(s, &pos, 0);
            if (pos != s.size()) throw std::invalid_argument("trailing characters");
            return r;
        } catch (const std::exception&) {
            throw ListingError(ListingError::Kind::MalformedLine, line_no,
                               "unparseable address: " + s);
        }
    }
    throw ListingError(ListingError::Kind::MalformedLine, line_no, "addr must be int or string");
}

} // namespace

ParsedListing parse_listing(const std::string& document) {
    ParsedListing out;
    std::istringstream in(document);
    std::string line;
    size_t line_no = 0;

    std::string current_section_name;
    uint32_t section_index = 0;
    bool have_prev = false;
    uint64_t prev_end = 0;   // address just past the previous instruction

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;

        nlohmann::json obj;
        try {
            obj = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception&) {
            throw ListingError(ListingError::Kind::MalformedLine, line_no, "invalid JSON line");
        }
        if (!obj.is_object() || !obj.contains("addr") || !obj.contains("bytes") ||
            !obj.contains("mn"))
            throw ListingError(ListingError::Kind::MalformedLine, line_no,
                               "missing addr/bytes/mn");

        Instruction ins;
        ins.address = parse_address_field(obj["addr"], line_no);
        if (!obj["bytes"].is_string())
            throw ListingError(ListingError::Kind::MalformedLine, line_no, "bytes must be string");
        try {
            ins.bytes = parse_hex_bytes(obj["bytes"].get<std::string>());
        } catch (const std::invalid_argument& e) {
            throw ListingError(ListingError::Kind::MalformedLine, line_no, e.what());
        }
        if (ins.bytes.size() > 15)
            throw ListingError(ListingError::Kind::OverlongInstruction, line_no,
                               "instruction longer than 15 bytes");
        if (!obj["mn"].is_string())
            throw ListingError(ListingError::Kind::MalformedLine, line_no, "mn must be string");
        ins.mnemonic = obj["mn"].get<std::string>();
        if (obj.contains("ops")) {
            if (!obj["ops"].is_string())
                throw ListingError(ListingError::Kind::MalformedLine, line_no,
                                   "ops must be string");
            ins.operands = obj["ops"].get<std::string>();
        }

        ins.branch = classify_branch(ins.mnemonic, ins.operands);
        if (obj.contains("target")) {
            if (!is_direct(ins.branch))
                throw ListingError(ListingError::Kind::MalformedLine, line_no,
                                   "target given for a non-direct branch");
            ins.target = parse_address_field(obj["target"], line_no);
        } else if (is_direct(ins.branch)) {
            throw ListingError(ListingError::Kind::MalformedLine, line_no,
                               "direct branch requires a target field");
        }

        std::string section_name = "text";
        if (obj.contains("section")) {
            if (!obj["section"].is_string())
                throw ListingError(ListingError::Kind::MalformedLine, line_no,
                                   "section must be string");
            section_name = obj["section"].get<std::string>();
        }

        if (have_prev && ins.address < prev_end)
            throw ListingError(ListingError::Kind::NonMonotonicAddress, line_no,
                               "addresses must be strictly increasing");

        // A named section change or an address gap starts a new section.
        const bool section_break =
            !have_prev || section_name != current_section_name || ins.address != prev_end;
        if (section_break) {
            out.section_names.push_back(section_name);
            section_index = static_cast<uint32_t>(out.section_names.size() - 1);
            current_section_name = section_name;
        }
        ins.section = section_index;

        prev_end = ins.address + ins.bytes.size();
        have_prev = true;
        out.instructions.push_back(std::move(ins));
    }

    return out;
}

SegmentResult segment_gadgets(const std::vector<Instruction>& instructions) {
    if (instructions.empty())
        throw ListingError(ListingError::Kind::EmptyListing, 0, "empty listing");

    SegmentResult res;
    Gadget cur;
    bool open = false;
    uint32_t current_section = instructions.front().section;
    uint64_t open_count = 0;

    // Open gadget at a section end never gets a terminator: drop and count.
    auto drop_open_tail = [&] {
        res.dropped_tail_instructions += open_count;
        res.dropped_tail_bytes += cur.bytes.size();
        open = false;
    };

    for (const Instruction& ins : instructions) {
        if (ins.section != current_section) {
            if (open) drop_open_tail();
            current_section = ins.section;
        }
        if (!open) {
            cur = Gadget{};
            cur.start = ins.address;
            cur.section = ins.section;
            open = true;
            open_count = 0;
        }
        cur.bytes.insert(cur.bytes.end(), ins.bytes.begin(), ins.bytes.end());
        ++open_count;
        if (ins.branch != BranchKind::None) {
            cur.terminator = ins.branch;
            cur.direct_target = ins.target;
            cur.id = static_cast<uint32_t>(res.gadgets.size());
            res.gadgets.push_back(std::move(cur));
            open = false;
        }
    }
    if (open) drop_open_tail();
    return res;
}

} // namespace chaincheck
