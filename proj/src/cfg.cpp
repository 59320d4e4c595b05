#include "chaincheck/cfg.hpp"

#include "chaincheck/util.hpp"

#include <algorithm>
#include <sstream>

namespace chaincheck {

const char* edge_origin_name(EdgeOrigin o) {
    switch (o) {
    case EdgeOrigin::StaticDirect: return "direct";
    case EdgeOrigin::StaticFallthrough: return "fall";
    case EdgeOrigin::TraceWitnessed: return "trace";
    }
    return "direct";
}

static std::optional<EdgeOrigin> edge_origin_from_name(const std::string& s) {
    if (s == "direct") return EdgeOrigin::StaticDirect;
    if (s == "fall") return EdgeOrigin::StaticFallthrough;
    if (s == "trace") return EdgeOrigin::TraceWitnessed;
    return std::nullopt;
}

void Cfg::add_node(CfgNode node) {
    if (by_offset_.contains(node.start_offset))
        throw CfgError(CfgError::Kind::DuplicateGadgetStart,
                       "duplicate gadget start offset " + to_hex_u64(node.start_offset));
    node.id = static_cast<uint32_t>(nodes_.size());
    by_offset_.emplace(node.start_offset, node.id);
    nodes_.push_back(std::move(node));
    adj_.emplace_back();
}

bool Cfg::has_edge(uint32_t src, uint32_t dst) const {
    check_id(src);
    check_id(dst);
    const auto& row = adj_[src];
    const auto it = std::lower_bound(row.begin(), row.end(), dst,
                                     [](const Edge& e, uint32_t d) { return e.dst < d; });
    return it != row.end() && it->dst == dst;
}

bool Cfg::add_edge(uint32_t src, uint32_t dst, EdgeOrigin origin) {
    check_id(src);
    check_id(dst);
    auto& row = adj_[src];
    const auto it = std::lower_bound(row.begin(), row.end(), dst,
                                     [](const Edge& e, uint32_t d) { return e.dst < d; });
    if (it != row.end() && it->dst == dst) return false;
    row.insert(it, Edge{src, dst, origin});
    ++edge_total_;
    return true;
}

std::vector<Edge> Cfg::edges() const {
    std::vector<Edge> out;
    out.reserve(edge_total_);
    for (const auto& row : adj_) out.insert(out.end(), row.begin(), row.end());
    return out;
}

std::string Cfg::serialize() const {
    std::ostringstream os;
    os << "cfg v1 base=0x" << to_hex_u64(base_) << " nodes=" << nodes_.size()
       << " edges=" << edge_total_ << "\n";
    for (const CfgNode& n : nodes_) {
        os << "n " << n.id << " 0x" << to_hex_u64(n.start_offset) << ' '
           << branch_kind_name(n.terminator) << ' ';
        if (n.direct_target_offset)
            os << "0x" << to_hex_u64(*n.direct_target_offset);
        else
            os << '-';
        os << ' ' << to_hex(n.bytes) << "\n";
    }
    for (const auto& row : adj_)
        for (const Edge& e : row)
            os << "e " << e.src << ' ' << e.dst << ' ' << edge_origin_name(e.origin) << "\n";
    return os.str();
}

uint64_t Cfg::content_hash() const { return fnv1a64(serialize()); }

Cfg Cfg::deserialize(const std::string& document) {
    std::istringstream in(document);
    std::string line;
    if (!std::getline(in, line))
        throw CfgError(CfgError::Kind::BadDocument, "empty cfg document");

    Cfg cfg;
    size_t expect_nodes = 0, expect_edges = 0;
    {
        std::istringstream hs(line);
        std::string tag, ver, basekv, nodeskv, edgeskv;
        hs >> tag >> ver >> basekv >> nodeskv >> edgeskv;
        if (tag != "cfg" || ver != "v1" || basekv.rfind("base=", 0) != 0 ||
            nodeskv.rfind("nodes=", 0) != 0 || edgeskv.rfind("edges=", 0) != 0)
            throw CfgError(CfgError::Kind::BadDocument, "bad cfg header: " + line);
        cfg.base_ = std::stoull(basekv.substr(5), nullptr, 0);
        expect_nodes = std::stoull(nodeskv.substr(6));
        expect_edges = std::stoull(edgeskv.substr(6));
    }

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string kind;
        ls >> kind;
        if (kind == "n") {
            uint64_t id = 0;
            std::string off, term, target, hexbytes;
            ls >> id >> off >> term >> target >> hexbytes;
            if (!ls)
                throw CfgError(CfgError::Kind::BadDocument, "bad node line: " + line);
            CfgNode node;
            node.start_offset = std::stoull(off, nullptr, 0);
            const auto t = branch_kind_from_name(term);
            if (!t) throw CfgError(CfgError::Kind::BadDocument, "bad terminator: " + line);
            node.terminator = *t;
            if (target != "-") node.direct_target_offset = std::stoull(target, nullptr, 0);
            try {
                node.bytes = parse_hex_bytes(hexbytes);
            } catch (const std::invalid_argument&) {
                throw CfgError(CfgError::Kind::BadDocument, "bad node bytes: " + line);
            }
            cfg.add_node(std::move(node));
            if (cfg.nodes_.back().id != id)
                throw CfgError(CfgError::Kind::BadDocument, "nodes out of order: " + line);
        } else if (kind == "e") {
            uint32_t src = 0, dst = 0;
            std::string origin;
            ls >> src >> dst >> origin;
            if (!ls)
                throw CfgError(CfgError::Kind::BadDocument, "bad edge line: " + line);
            const auto o = edge_origin_from_name(origin);
            if (!o) throw CfgError(CfgError::Kind::BadDocument, "bad edge origin: " + line);
            cfg.add_edge(src, dst, *o);
        } else {
            throw CfgError(CfgError::Kind::BadDocument, "unknown record: " + line);
        }
    }

    if (cfg.nodes_.size() != expect_nodes || cfg.edge_total_ != expect_edges)
        throw CfgError(CfgError::Kind::BadDocument, "cfg header counts do not match body");
    return cfg;
}

Cfg build_static_cfg(const std::vector<Gadget>& gadgets, uint64_t base, CfgBuildStats* stats) {
    Cfg cfg;
    cfg.set_base(base);
    CfgBuildStats local;

    for (const Gadget& g : gadgets) {
        CfgNode node;
        node.start_offset = g.start - base;
        node.terminator = g.terminator;
        if (g.direct_target) node.direct_target_offset = *g.direct_target - base;
        node.bytes = g.bytes;
        cfg.add_node(std::move(node));
    }

    // Fall-through lookup wants section-aware adjacency: the fall-through of
    // a conditional is the gadget starting right past its last byte, in the
    // same section.
    for (size_t i = 0; i < gadgets.size(); ++i) {
        const Gadget& g = gadgets[i];
        const auto src = static_cast<uint32_t>(i);
        if (g.direct_target) {
            const uint64_t target_off = *g.direct_target - base;
            if (const auto dst = cfg.node_at_offset(target_off))
                cfg.add_edge(src, *dst, EdgeOrigin::StaticDirect);
            else
                ++local.unresolved_direct_targets;
        }
        if (g.terminator == BranchKind::DirectConditional) {
            const uint64_t fall_off = g.start + g.bytes.size() - base;
            const auto dst = cfg.node_at_offset(fall_off);
            if (dst && gadgets[*dst].section == g.section)
                cfg.add_edge(src, *dst, EdgeOrigin::StaticFallthrough);
            else
                ++local.missing_fallthrough;
        }
    }

    if (stats) *stats = local;
    return cfg;
}

} // namespace chaincheck
