#include "chaincheck/encode.hpp"

#include "chaincheck/rng.hpp"
#include "chaincheck/util.hpp"

#include <algorithm>
#include <cmath>

namespace chaincheck {

std::vector<uint8_t> encode_gadget(std::span<const uint8_t> bytes, size_t gmax) {
    std::vector<uint8_t> nibbles;
    nibbles.reserve(2 * gmax);
    const size_t take = std::min(bytes.size(), gmax);
    const size_t from = bytes.size() - take;   // keep the suffix
    for (size_t i = from; i < bytes.size(); ++i) {
        nibbles.push_back(bytes[i] >> 4);
        nibbles.push_back(bytes[i] & 0xf);
    }
    while (nibbles.size() < 2 * gmax) {
        nibbles.push_back(kNopByte >> 4);
        nibbles.push_back(kNopByte & 0xf);
    }
    return nibbles;
}

OffsetTable OffsetTable::build(const Cfg& cfg, size_t gmax) {
    OffsetTable t;
    t.gmax_ = gmax;
    t.cfg_hash_ = cfg.content_hash();
    t.offsets_.reserve(cfg.node_count());
    t.nibbles_.reserve(cfg.node_count() * 2 * gmax);
    for (const CfgNode& n : cfg.nodes()) {
        t.index_.emplace(n.start_offset, n.id);
        t.offsets_.push_back(n.start_offset);
        const auto enc = encode_gadget(n.bytes, gmax);
        t.nibbles_.insert(t.nibbles_.end(), enc.begin(), enc.end());
    }
    return t;
}

std::optional<OffsetTable::Entry> OffsetTable::lookup(uint64_t offset) const {
    const auto it = index_.find(offset);
    if (it == index_.end()) return std::nullopt;
    return Entry{it->second, nibbles_of(it->second)};
}

std::span<const uint8_t> OffsetTable::nibbles_of(uint32_t id) const {
    if (static_cast<size_t>(id) >= offsets_.size())
        throw EncodeError(EncodeError::Kind::UnknownGadgetId,
                          "offset table has no gadget id " + std::to_string(id));
    const size_t stride = 2 * gmax_;
    return std::span<const uint8_t>(nibbles_.data() + id * stride, stride);
}

static constexpr uint8_t kTableMagic[4] = {'D', 'C', 'O', 'T'};

std::vector<uint8_t> OffsetTable::serialize() const {
    std::vector<uint8_t> out;
    out.insert(out.end(), kTableMagic, kTableMagic + 4);
    put_u8(out, 1);
    put_u32(out, static_cast<uint32_t>(gmax_));
    put_u64(out, cfg_hash_);
    put_u32(out, static_cast<uint32_t>(offsets_.size()));
    const size_t stride = 2 * gmax_;
    for (size_t id = 0; id < offsets_.size(); ++id) {
        put_u64(out, offsets_[id]);
        put_u32(out, static_cast<uint32_t>(id));
        // nibbles packed two per byte, high first
        for (size_t i = 0; i < stride; i += 2)
            put_u8(out, static_cast<uint8_t>(nibbles_[id * stride + i] << 4 |
                                             nibbles_[id * stride + i + 1]));
    }
    return out;
}

OffsetTable OffsetTable::deserialize(std::span<const uint8_t> bytes) {
    constexpr size_t kHeader = 4 + 1 + 4 + 8 + 4;
    if (bytes.size() < kHeader ||
        !std::equal(kTableMagic, kTableMagic + 4, bytes.begin()) || bytes[4] != 1)
        throw EncodeError(EncodeError::Kind::BadDocument, "bad offset table header");
    OffsetTable t;
    t.gmax_ = get_u32(bytes, 5);
    t.cfg_hash_ = get_u64(bytes, 9);
    const uint32_t count = get_u32(bytes, 17);
    const size_t rec = 8 + 4 + t.gmax_;
    if (bytes.size() != kHeader + static_cast<size_t>(count) * rec)
        throw EncodeError(EncodeError::Kind::BadDocument, "offset table body size mismatch");
    size_t off = kHeader;
    for (uint32_t i = 0; i < count; ++i) {
        const uint64_t offset = get_u64(bytes, off);
        const uint32_t id = get_u32(bytes, off + 8);
        if (id != i)
            throw EncodeError(EncodeError::Kind::BadDocument, "offset table ids out of order");
        t.offsets_.push_back(offset);
        t.index_.emplace(offset, id);
        for (size_t b = 0; b < t.gmax_; ++b) {
            const uint8_t packed = bytes[off + 12 + b];
            t.nibbles_.push_back(packed >> 4);
            t.nibbles_.push_back(packed & 0xf);
        }
        off += rec;
    }
    return t;
}

std::vector<float> encode_chain(const GadgetChain& chain, const OffsetTable& table) {
    const size_t block = 2 * table.gmax();
    std::vector<float> features;
    features.reserve(kChainBlocks * block);
    for (size_t i = 0; i < kChainBlocks; ++i) {
        if (i < chain.length) {
            for (uint8_t nib : table.nibbles_of(chain.ids[i]))
                features.push_back(static_cast<float>(nib) / 15.0f);
        } else {
            for (size_t j = 0; j < block; j += 2) {
                features.push_back(9.0f / 15.0f);
                features.push_back(0.0f);
            }
        }
    }
    return features;
}

namespace {

void encode_label_group(const std::vector<GadgetChain>& chains, uint8_t label,
                        const OffsetTable& table, const SplitRatios& ratios,
                        Xoshiro256& rng, Dataset& out) {
    std::vector<uint32_t> order(chains.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    shuffle(order, rng);

    const size_t n = chains.size();
    const size_t n_val = static_cast<size_t>(std::floor(ratios.validation * n));
    const size_t n_test = static_cast<size_t>(std::floor(ratios.test * n));
    const size_t n_train = n - n_val - n_test;

    for (size_t i = 0; i < n; ++i) {
        const GadgetChain& c = chains[order[i]];
        EncodedSample s;
        s.features = encode_chain(c, table);
        s.label = label;
        s.chain = c;
        auto& part = (i < n_train) ? out.train
                     : (i < n_train + n_val) ? out.validation
                                             : out.test;
        part.push_back(std::move(s));
    }
}

} // namespace

Dataset build_dataset(const ChainSet& chains, const OffsetTable& table,
                      const SplitRatios& ratios, uint64_t seed) {
    if (chains.benign.empty() && chains.malicious.empty())
        throw EncodeError(EncodeError::Kind::EmptyChainSet, "chain set is empty");
    const double sum = ratios.train + ratios.validation + ratios.test;
    if (std::abs(sum - 1.0) > 1e-9)
        throw EncodeError(EncodeError::Kind::BadRatios, "ratios must sum to 1");
    if (ratios.train < 0 || ratios.validation < 0 || ratios.test < 0)
        throw EncodeError(EncodeError::Kind::BadRatios, "ratios must be non-negative");

    Dataset ds;
    ds.feature_len = feature_length(table.gmax());
    ds.gmax = table.gmax();
    ds.seed = seed;

    // Independent per-label streams; ratios apply per label.
    SplitMix64 sm(seed);
    Xoshiro256 rng_benign(sm.next());
    Xoshiro256 rng_malicious(sm.next());
    encode_label_group(chains.benign, 0, table, ratios, rng_benign, ds);
    encode_label_group(chains.malicious, 1, table, ratios, rng_malicious, ds);
    return ds;
}

static constexpr uint8_t kDatasetMagic[4] = {'D', 'C', 'D', 'S'};

std::vector<uint8_t> Dataset::serialize() const {
    std::vector<uint8_t> out;
    out.insert(out.end(), kDatasetMagic, kDatasetMagic + 4);
    put_u8(out, 1);
    put_u32(out, static_cast<uint32_t>(feature_len));
    put_u32(out, static_cast<uint32_t>(gmax));
    put_u64(out, seed);
    put_u32(out, static_cast<uint32_t>(train.size()));
    put_u32(out, static_cast<uint32_t>(validation.size()));
    put_u32(out, static_cast<uint32_t>(test.size()));

    auto emit = [&out](const std::vector<EncodedSample>& part, size_t flen) {
        for (const EncodedSample& s : part) {
            put_u8(out, s.label);
            for (size_t i = 0; i < flen; i += 2) {
                const auto hi = static_cast<uint8_t>(std::lround(s.features[i] * 15.0f));
                const auto lo = static_cast<uint8_t>(std::lround(s.features[i + 1] * 15.0f));
                put_u8(out, static_cast<uint8_t>(hi << 4 | lo));
            }
        }
    };
    emit(train, feature_len);
    emit(validation, feature_len);
    emit(test, feature_len);
    return out;
}

Dataset Dataset::deserialize(std::span<const uint8_t> bytes) {
    constexpr size_t kHeader = 4 + 1 + 4 + 4 + 8 + 4 + 4 + 4;
    if (bytes.size() < kHeader ||
        !std::equal(kDatasetMagic, kDatasetMagic + 4, bytes.begin()) || bytes[4] != 1)
        throw EncodeError(EncodeError::Kind::BadDocument, "bad dataset header");

    Dataset ds;
    ds.feature_len = get_u32(bytes, 5);
    ds.gmax = get_u32(bytes, 9);
    ds.seed = get_u64(bytes, 13);
    const uint32_t n_train = get_u32(bytes, 21);
    const uint32_t n_val = get_u32(bytes, 25);
    const uint32_t n_test = get_u32(bytes, 29);
    if (ds.feature_len % 2 != 0)
        throw EncodeError(EncodeError::Kind::BadDocument, "odd feature length");

    const size_t row = 1 + ds.feature_len / 2;
    const size_t total = static_cast<size_t>(n_train) + n_val + n_test;
    if (bytes.size() != kHeader + total * row)
        throw EncodeError(EncodeError::Kind::BadDocument, "dataset body size mismatch");

    size_t off = kHeader;
    auto read_part = [&](std::vector<EncodedSample>& part, uint32_t count) {
        part.reserve(count);
        for (uint32_t i = 0; i < count; ++i) {
            EncodedSample s;
            s.label = bytes[off];
            s.features.reserve(ds.feature_len);
            for (size_t b = 0; b < ds.feature_len / 2; ++b) {
                const uint8_t packed = bytes[off + 1 + b];
                s.features.push_back(static_cast<float>(packed >> 4) / 15.0f);
                s.features.push_back(static_cast<float>(packed & 0xf) / 15.0f);
            }
            off += row;
            part.push_back(std::move(s));
        }
    };
    read_part(ds.train, n_train);
    read_part(ds.validation, n_val);
    read_part(ds.test, n_test);
    return ds;
}

} // namespace chaincheck
