// CFG splitting into labeled gadget chains. Benign chains enumerate legal
// transfers: one edge per chain when the source gadget ends in an indirect
// branch, two consecutive edges when it ends in a direct branch (raising the
// share of indirect transfers in the data). Malicious chains are synthesized
// by connecting gadgets across CFG non-edges.

#ifndef CHAINCHECK_CHAINS_HPP
#define CHAINCHECK_CHAINS_HPP

#include "chaincheck/cfg.hpp"

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace chaincheck {

enum class ChainLabel : uint8_t { Benign = 0, Malicious = 1 };

struct GadgetChain {
    std::array<uint32_t, 3> ids{0, 0, 0};
    uint8_t length = 2;   // 2 or 3
    ChainLabel label = ChainLabel::Benign;

    bool operator==(const GadgetChain& o) const {
        return length == o.length && label == o.label &&
               std::equal(ids.begin(), ids.begin() + length, o.ids.begin());
    }

    // Canonical order: by id tuple (shorter first on shared prefix).
    bool operator<(const GadgetChain& o) const {
        const size_t n = std::min(length, o.length);
        for (size_t i = 0; i < n; ++i)
            if (ids[i] != o.ids[i]) return ids[i] < o.ids[i];
        return length < o.length;
    }
};

struct ChainSet {
    std::vector<GadgetChain> benign;
    std::vector<GadgetChain> malicious;
    uint64_t cfg_hash = 0;
    uint64_t seed = 0;
    bool exhausted = false;   // malicious space smaller than requested count

    std::string serialize() const;
    static ChainSet deserialize(const std::string& document);
};

struct ChainError : std::runtime_error {
    enum class Kind { InsufficientNodes, BadDocument };

    Kind kind;

    ChainError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// For every edge (g1,g2): if g1 ends indirect, emit (g1,g2); if g1 ends
// direct, emit (g1,g2,g3) for every successor g3 of g2, falling back to
// (g1,g2) when g2 has none. Deduplicated, sorted by id tuple.
std::vector<GadgetChain> split_benign(const Cfg& cfg);

struct MaliciousGenOptions {
    // Require the gadget before each violated pair to end in an indirect
    // branch (an attacker cannot retarget a direct branch). Off for ablation.
    bool indirect_sources_only = true;
};

// Seeded sampling of 2- and 3-gadget tuples containing at least one CFG
// non-edge; returns exactly `count` unique chains, or fewer with
// ChainSet::exhausted when the space is smaller. Never emits a tuple equal
// to a benign chain.
std::vector<GadgetChain> gen_malicious(const Cfg& cfg, size_t count, uint64_t seed,
                                       bool* exhausted = nullptr,
                                       const MaliciousGenOptions& opts = {});

// Convenience wrapper producing a canonical ChainSet with provenance.
ChainSet split_chains(const Cfg& cfg, size_t malicious_count, uint64_t seed,
                      const MaliciousGenOptions& opts = {});

// Table II-style default: malicious count = ceil(0.83 * benign count).
size_t default_malicious_count(size_t benign_count);

} // namespace chaincheck

#endif
