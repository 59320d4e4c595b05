// Trace replay over a CFG. A cursor tracks the gadget currently executing:
// direct unconditional transfers follow their static successor, conditional
// transfers consume queued TNT bits in order (taken = branch target, not
// taken = fall-through), and the cursor parks on indirect-terminated gadgets
// until a TIP names the destination. CFG refinement and the detector share
// this replay, so both resolve a TIP's source gadget identically.

#ifndef CHAINCHECK_REPLAY_HPP
#define CHAINCHECK_REPLAY_HPP

#include "chaincheck/cfg.hpp"
#include "chaincheck/encode.hpp"
#include "chaincheck/trace.hpp"

#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

namespace chaincheck {

enum class StepStatus : uint8_t {
    Ok,
    MissingStaticSuccessor,   // direct flow with no resolvable successor
    CursorNotAtIndirect,      // TIP arrived while cursor owed direct flow
    UnresolvableTipTarget,    // TIP address maps to no gadget start
};

class TraceCursor {
public:
    TraceCursor(const Cfg& cfg, const OffsetTable& table, uint64_t runtime_base,
                uint32_t entry_gadget);

    uint32_t position() const { return cursor_; }
    size_t pending_tnt_bits() const { return tnt_queue_.size(); }

    // Queues bits and advances through any direct flow they unlock.
    StepStatus on_tnt(const std::vector<bool>& bits);

    struct TipResult {
        StepStatus status = StepStatus::Ok;
        uint32_t src = 0;   // gadget executing the indirect branch
        uint32_t dst = 0;   // valid when status is Ok
        uint64_t offset = 0;   // addr - base, for diagnostics
    };

    // Resolves a TIP destination, reports the (src,dst) transfer, moves the
    // cursor, and advances. On failure the cursor stays put.
    TipResult on_tip(uint64_t address);

    // Every gadget the cursor has occupied, in order (entry included).
    const std::vector<uint32_t>& visited() const { return visited_; }
    void record_visits(bool on) { record_ = on; }

private:
    StepStatus advance();
    void move_to(uint32_t id);

    const Cfg& cfg_;
    const OffsetTable& table_;
    uint64_t base_;
    uint32_t cursor_;
    std::deque<bool> tnt_queue_;
    std::vector<uint32_t> visited_;
    bool record_ = false;
};

// Replays a decoded trace against the CFG and returns a copy with every
// indirect transfer added as a TraceWitnessed edge. Monotone: the output
// edge set is a superset of the input's. Throws CfgError
// (UnresolvableTipTarget) when a TIP maps to no gadget start.
Cfg refine_cfg(const Cfg& cfg, const DecodedTrace& trace, const OffsetTable& table);

} // namespace chaincheck

#endif
