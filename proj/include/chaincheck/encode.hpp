// Fixed-length numeric representation of gadgets and chains. Gadget bytes
// are split into 4-bit units in instruction order (high nibble first) and
// nop-padded (0x90) to a common length; a chain is the concatenation of
// three gadget blocks, the third all-nop for 2-gadget chains. Values are
// normalized to [0,1] in steps of 1/15.
//
// The offset table precomputes every node's encoding keyed by its start
// offset, so detection-time lookup does no encoding work.

#ifndef CHAINCHECK_ENCODE_HPP
#define CHAINCHECK_ENCODE_HPP

#include "chaincheck/cfg.hpp"
#include "chaincheck/chains.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace chaincheck {

constexpr uint8_t kNopByte = 0x90;
constexpr size_t kDefaultGadgetByteBudget = 16;   // G_max
constexpr size_t kChainBlocks = 3;

inline size_t feature_length(size_t gmax) { return kChainBlocks * 2 * gmax; }

struct EncodeError : std::runtime_error {
    enum class Kind { UnknownGadgetId, EmptyChainSet, BadRatios, BadDocument };

    Kind kind;

    EncodeError(Kind k, const std::string& msg) : std::runtime_error(msg), kind(k) {}
};

// Nibble vector of length 2*gmax. Over-long gadgets keep their LAST gmax
// bytes so the branch terminator always survives truncation.
std::vector<uint8_t> encode_gadget(std::span<const uint8_t> bytes, size_t gmax);

class OffsetTable {
public:
    OffsetTable() = default;

    static OffsetTable build(const Cfg& cfg, size_t gmax);

    size_t gmax() const { return gmax_; }
    uint64_t cfg_hash() const { return cfg_hash_; }
    size_t size() const { return offsets_.size(); }

    struct Entry {
        uint32_t id;
        std::span<const uint8_t> nibbles;   // length 2*gmax
    };

    std::optional<Entry> lookup(uint64_t offset) const;
    std::span<const uint8_t> nibbles_of(uint32_t id) const;

    std::vector<uint8_t> serialize() const;
    static OffsetTable deserialize(std::span<const uint8_t> bytes);

private:
    size_t gmax_ = kDefaultGadgetByteBudget;
    uint64_t cfg_hash_ = 0;
    std::vector<uint64_t> offsets_;               // by node id
    std::unordered_map<uint64_t, uint32_t> index_;
    std::vector<uint8_t> nibbles_;                // node id * 2*gmax
};

struct EncodedSample {
    std::vector<float> features;   // length feature_length(gmax), values in [0,1]
    uint8_t label = 0;             // 0 benign, 1 malicious
    GadgetChain chain;
};

// Chain features via the offset table (same path the detector uses).
std::vector<float> encode_chain(const GadgetChain& chain, const OffsetTable& table);

struct SplitRatios {
    double train = 0.8;
    double validation = 0.1;
    double test = 0.1;
};

struct Dataset {
    std::vector<EncodedSample> train;
    std::vector<EncodedSample> validation;
    std::vector<EncodedSample> test;
    size_t feature_len = 0;
    size_t gmax = kDefaultGadgetByteBudget;
    uint64_t seed = 0;

    std::vector<uint8_t> serialize() const;
    static Dataset deserialize(std::span<const uint8_t> bytes);
};

// Per-label seeded shuffle then contiguous split; validation/test take
// floor(ratio*n) each, the remainder goes to train.
Dataset build_dataset(const ChainSet& chains, const OffsetTable& table,
                      const SplitRatios& ratios, uint64_t seed);

} // namespace chaincheck

#endif
