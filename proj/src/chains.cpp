#include "chaincheck/chains.hpp"

#include "chaincheck/rng.hpp"
#include "chaincheck/util.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace chaincheck {

std::vector<GadgetChain> split_benign(const Cfg& cfg) {
    std::vector<GadgetChain> out;
    for (uint32_t g1 = 0; g1 < cfg.node_count(); ++g1) {
        const BranchKind term = cfg.node(g1).terminator;
        for (const Edge& e12 : cfg.successors(g1)) {
            const uint32_t g2 = e12.dst;
            if (is_indirect(term)) {
                out.push_back(GadgetChain{{g1, g2, 0}, 2, ChainLabel::Benign});
            } else {
                const auto& succ2 = cfg.successors(g2);
                if (succ2.empty()) {
                    out.push_back(GadgetChain{{g1, g2, 0}, 2, ChainLabel::Benign});
                } else {
                    for (const Edge& e23 : succ2)
                        out.push_back(GadgetChain{{g1, g2, e23.dst}, 3, ChainLabel::Benign});
                }
            }
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

// Every violated pair must have an indirect-terminated predecessor when the
// realism constraint is on, and at least one pair must be violated.
bool acceptable(const Cfg& cfg, const uint32_t* ids, size_t len,
                const MaliciousGenOptions& opts) {
    bool violated = false;
    for (size_t i = 0; i + 1 < len; ++i) {
        if (!cfg.has_edge(ids[i], ids[i + 1])) {
            violated = true;
            if (opts.indirect_sources_only && !is_indirect(cfg.node(ids[i]).terminator))
                return false;
        }
    }
    return violated;
}

// Exact count of ordered non-edge pairs (u,v), u != v, with the source
// constraint applied. Used to prove exhaustion without enumeration.
uint64_t count_violating_pairs(const Cfg& cfg, const MaliciousGenOptions& opts) {
    uint64_t total = 0;
    const uint64_t n = cfg.node_count();
    for (uint32_t u = 0; u < n; ++u) {
        if (opts.indirect_sources_only && !is_indirect(cfg.node(u).terminator)) continue;
        uint64_t edges_to_others = 0;
        for (const Edge& e : cfg.successors(u))
            if (e.dst != u) ++edges_to_others;
        total += (n - 1) - edges_to_others;
    }
    return total;
}

} // namespace

std::vector<GadgetChain> gen_malicious(const Cfg& cfg, size_t count, uint64_t seed,
                                       bool* exhausted, const MaliciousGenOptions& opts) {
    if (cfg.node_count() < 3)
        throw ChainError(ChainError::Kind::InsufficientNodes,
                         "malicious generation needs at least 3 gadgets");
    if (exhausted) *exhausted = false;

    std::vector<GadgetChain> out;
    if (count == 0) return out;

    if (count_violating_pairs(cfg, opts) == 0) {
        if (exhausted) *exhausted = true;
        return out;
    }

    // Set ordering ignores labels, so membership here is pure id-tuple
    // equality against the benign set.
    const std::vector<GadgetChain> benign = split_benign(cfg);
    const std::set<GadgetChain> benign_set(benign.begin(), benign.end());

    Xoshiro256 rng(seed);
    const uint64_t n = cfg.node_count();
    std::set<GadgetChain> seen;

    // Rejection sampling with a stall cap; the non-edge space was proven
    // non-empty above, so a long stall means the unique-chain space is
    // (close to) exhausted, not absent.
    const uint64_t stall_cap = 50000 + 200 * static_cast<uint64_t>(count);
    uint64_t stall = 0;
    while (out.size() < count && stall < stall_cap) {
        GadgetChain c;
        c.label = ChainLabel::Malicious;
        c.length = (rng.next_below(2) == 0) ? 2 : 3;
        bool distinct = true;
        for (size_t i = 0; i < c.length; ++i) {
            c.ids[i] = static_cast<uint32_t>(rng.next_below(n));
            for (size_t j = 0; j < i; ++j)
                if (c.ids[j] == c.ids[i]) distinct = false;
        }
        if (!distinct || !acceptable(cfg, c.ids.data(), c.length, opts) ||
            benign_set.contains(c) || seen.contains(c)) {
            ++stall;
            continue;
        }
        stall = 0;
        seen.insert(c);
        out.push_back(c);
    }

    if (out.size() < count && exhausted) *exhausted = true;
    std::sort(out.begin(), out.end());
    return out;
}

size_t default_malicious_count(size_t benign_count) {
    return (benign_count * 83 + 99) / 100;   // ceil(0.83 * n)
}

ChainSet split_chains(const Cfg& cfg, size_t malicious_count, uint64_t seed,
                      const MaliciousGenOptions& opts) {
    ChainSet cs;
    cs.cfg_hash = cfg.content_hash();
    cs.seed = seed;
    cs.benign = split_benign(cfg);
    if (malicious_count == 0) malicious_count = default_malicious_count(cs.benign.size());
    cs.malicious = gen_malicious(cfg, malicious_count, seed, &cs.exhausted, opts);
    return cs;
}

std::string ChainSet::serialize() const {
    std::ostringstream os;
    os << "chains v1 cfg=0x" << to_hex_u64(cfg_hash) << " seed=" << seed
       << " benign=" << benign.size() << " malicious=" << malicious.size()
       << " exhausted=" << (exhausted ? 1 : 0) << "\n";
    auto emit = [&os](const std::vector<GadgetChain>& v, char tag) {
        for (const GadgetChain& c : v) {
            os << tag;
            for (size_t i = 0; i < c.length; ++i) os << ' ' << c.ids[i];
            os << "\n";
        }
    };
    emit(benign, 'b');
    emit(malicious, 'm');
    return os.str();
}

ChainSet ChainSet::deserialize(const std::string& document) {
    std::istringstream in(document);
    std::string line;
    if (!std::getline(in, line))
        throw ChainError(ChainError::Kind::BadDocument, "empty chain document");

    ChainSet cs;
    size_t expect_b = 0, expect_m = 0;
    {
        std::istringstream hs(line);
        std::string tag, ver, cfgkv, seedkv, bkv, mkv, ekv;
        hs >> tag >> ver >> cfgkv >> seedkv >> bkv >> mkv >> ekv;
        if (tag != "chains" || ver != "v1" || cfgkv.rfind("cfg=", 0) != 0 ||
            seedkv.rfind("seed=", 0) != 0 || bkv.rfind("benign=", 0) != 0 ||
            mkv.rfind("malicious=", 0) != 0 || ekv.rfind("exhausted=", 0) != 0)
            throw ChainError(ChainError::Kind::BadDocument, "bad chain header: " + line);
        cs.cfg_hash = std::stoull(cfgkv.substr(4), nullptr, 0);
        cs.seed = std::stoull(seedkv.substr(5));
        expect_b = std::stoull(bkv.substr(7));
        expect_m = std::stoull(mkv.substr(10));
        cs.exhausted = ekv.substr(10) == "1";
    }

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string tag;
        ls >> tag;
        if (tag != "b" && tag != "m")
            throw ChainError(ChainError::Kind::BadDocument, "bad chain record: " + line);
        GadgetChain c;
        c.label = (tag == "b") ? ChainLabel::Benign : ChainLabel::Malicious;
        std::vector<uint32_t> ids;
        uint32_t v = 0;
        while (ls >> v) ids.push_back(v);
        if (ids.size() < 2 || ids.size() > 3)
            throw ChainError(ChainError::Kind::BadDocument, "bad chain length: " + line);
        c.length = static_cast<uint8_t>(ids.size());
        std::copy(ids.begin(), ids.end(), c.ids.begin());
        (c.label == ChainLabel::Benign ? cs.benign : cs.malicious).push_back(c);
    }

    if (cs.benign.size() != expect_b || cs.malicious.size() != expect_m)
        throw ChainError(ChainError::Kind::BadDocument, "chain header counts do not match body");
    return cs;
}

} // namespace chaincheck
