// Gadget-level control-flow graph. Static construction wires direct-branch
// and conditional fall-through edges; refinement adds indirect edges
// witnessed by TIP packets in a recorded trace. Node addresses are stored as
// offsets from the module base so traces recorded at a different load
// address compose with the static listing.

#ifndef CHAINCHECK_CFG_HPP
#define CHAINCHECK_CFG_HPP

#include "chaincheck/listing.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace chaincheck {

enum class EdgeOrigin : uint8_t {
    StaticDirect = 0,
    StaticFallthrough,
    TraceWitnessed,
};

const char* edge_origin_name(EdgeOrigin o);

struct CfgError : std::runtime_error {
    enum class Kind {
        DuplicateGadgetStart,
        UnknownGadgetId,
        UnresolvableTipTarget,
        BadDocument,
    };

    Kind kind;

    CfgError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

struct CfgNode {
    uint32_t id = 0;
    uint64_t start_offset = 0;          // gadget start address - base
    BranchKind terminator = BranchKind::None;
    std::optional<uint64_t> direct_target_offset;
    std::vector<uint8_t> bytes;
};

struct Edge {
    uint32_t src = 0;
    uint32_t dst = 0;
    EdgeOrigin origin = EdgeOrigin::StaticDirect;
};

// Diagnostics from static construction; the paper-level CFG cannot represent
// mid-gadget entry, so such targets produce no edge and are only counted.
struct CfgBuildStats {
    uint64_t unresolved_direct_targets = 0;   // target not at any gadget start
    uint64_t missing_fallthrough = 0;         // conditional at section end
};

class Cfg {
public:
    Cfg() = default;

    uint64_t base() const { return base_; }
    size_t node_count() const { return nodes_.size(); }
    size_t edge_count() const { return edge_total_; }

    const CfgNode& node(uint32_t id) const {
        check_id(id);
        return nodes_[id];
    }

    const std::vector<CfgNode>& nodes() const { return nodes_; }

    std::optional<uint32_t> node_at_offset(uint64_t offset) const {
        const auto it = by_offset_.find(offset);
        if (it == by_offset_.end()) return std::nullopt;
        return it->second;
    }

    // Successors of src, sorted by destination id.
    const std::vector<Edge>& successors(uint32_t id) const {
        check_id(id);
        return adj_[id];
    }

    bool has_edge(uint32_t src, uint32_t dst) const;

    // Enumerates all edges in canonical (src, dst) order.
    std::vector<Edge> edges() const;

    // Returns false if the edge was already present (any origin).
    bool add_edge(uint32_t src, uint32_t dst, EdgeOrigin origin);

    void add_node(CfgNode node);
    void set_base(uint64_t base) { base_ = base; }

    // Canonical text serialization; byte-stable for hashing.
    std::string serialize() const;
    static Cfg deserialize(const std::string& document);
    uint64_t content_hash() const;

private:
    void check_id(uint32_t id) const {
        if (id >= nodes_.size())
            throw CfgError(CfgError::Kind::UnknownGadgetId,
                           "unknown gadget id " + std::to_string(id));
    }

    uint64_t base_ = 0;
    std::vector<CfgNode> nodes_;
    std::vector<std::vector<Edge>> adj_;   // per-src, sorted by dst
    std::unordered_map<uint64_t, uint32_t> by_offset_;
    size_t edge_total_ = 0;
};

// Builds the coarse static CFG: direct terminators contribute a StaticDirect
// edge to the gadget starting at their target; conditionals additionally get
// a StaticFallthrough edge to the byte-adjacent gadget; indirect terminators
// contribute nothing.
Cfg build_static_cfg(const std::vector<Gadget>& gadgets, uint64_t base,
                     CfgBuildStats* stats = nullptr);

} // namespace chaincheck

#endif
