#include "plmcurate/reference_set.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "plmcurate/error.hpp"
#include "plmcurate/parallel.hpp"

namespace plmc {

namespace {

// Rational comparison of identities m1/c1 against m2/c2.
int compare_ratio(std::uint64_t m1, std::uint64_t c1, std::uint64_t m2, std::uint64_t c2) {
    const std::uint64_t lhs = m1 * c2;
    const std::uint64_t rhs = m2 * c1;
    return lhs < rhs ? -1 : (lhs > rhs ? 1 : 0);
}

constexpr std::size_t kChunk = 64;

}  // namespace

std::vector<std::pair<std::uint64_t, std::uint32_t>> count_kmers(std::span<const std::uint8_t> codes, std::size_t k) {
    std::vector<std::uint64_t> keys;
    if (codes.size() >= k) {
        keys.reserve(codes.size() - k + 1);
        std::uint64_t top = 1;
        for (std::size_t i = 1; i < k; ++i) {
            top *= kNumAminoAcids;
        }
        std::uint64_t key = 0;
        for (std::size_t i = 0; i < codes.size(); ++i) {
            if (i >= k) {
                key -= codes[i - k] * top;
            }
            key = key * kNumAminoAcids + codes[i];
            if (i + 1 >= k) {
                keys.push_back(key);
            }
        }
    }
    std::sort(keys.begin(), keys.end());
    std::vector<std::pair<std::uint64_t, std::uint32_t>> out;
    for (std::uint64_t key : keys) {
        if (!out.empty() && out.back().first == key) {
            ++out.back().second;
        } else {
            out.emplace_back(key, 1u);
        }
    }
    return out;
}

ReferenceSet ReferenceSet::build(std::vector<ProteinSeq> records, std::size_t k) {
    if (records.empty()) {
        throw Error(Errc::EmptyReferenceSet, "reference set has no records");
    }
    if (k < 2 || k > kMaxKmer) {
        throw Error(Errc::InvalidParameter, "k-mer length must be in [2, 14], got " + std::to_string(k));
    }
    ReferenceSet set;
    set.k_ = k;
    set.records_ = std::move(records);
    set.codes_.reserve(set.records_.size());

    struct Entry {
        std::uint64_t key;
        Posting posting;
    };
    std::vector<Entry> entries;
    for (std::size_t r = 0; r < set.records_.size(); ++r) {
        const auto& rec = set.records_[r];
        if (!set.by_id_.emplace(rec.id(), r).second) {
            throw Error(Errc::DuplicateId, "reference id '" + rec.id() + "' appears more than once");
        }
        set.codes_.push_back(encode_residues(rec.residues()));
        for (const auto& [key, count] : count_kmers(set.codes_.back(), k)) {
            entries.push_back({key, {static_cast<std::uint32_t>(r), count}});
        }
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) { return a.key < b.key; });
    set.postings_.reserve(entries.size());
    for (std::size_t i = 0; i < entries.size();) {
        std::size_t j = i;
        while (j < entries.size() && entries[j].key == entries[i].key) {
            set.postings_.push_back(entries[j].posting);
            ++j;
        }
        set.ranges_.emplace(entries[i].key,
                            std::make_pair(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j - i)));
        i = j;
    }
    return set;
}

std::span<const Posting> ReferenceSet::postings(std::string_view kmer) const {
    if (kmer.size() != k_) {
        return {};
    }
    std::uint64_t key = 0;
    for (char c : kmer) {
        const int code = residue_code(c);
        if (code < 0) {
            return {};
        }
        key = key * kNumAminoAcids + static_cast<std::uint64_t>(code);
    }
    auto it = ranges_.find(key);
    if (it == ranges_.end()) {
        return {};
    }
    return {postings_.data() + it->second.first, it->second.second};
}

std::optional<std::size_t> ReferenceSet::find(std::string_view id) const {
    auto it = by_id_.find(std::string(id));
    if (it == by_id_.end()) {
        return std::nullopt;
    }
    return it->second;
}

std::size_t ReferenceSet::index_of(std::string_view id) const {
    if (auto idx = find(id)) {
        return *idx;
    }
    throw Error(Errc::UnknownReferenceId, "no reference with id '" + std::string(id) + "'");
}

std::vector<std::uint32_t> ReferenceSet::shared_kmer_counts(std::span<const std::uint8_t> query) const {
    std::vector<std::uint32_t> shared(records_.size(), 0);
    for (const auto& [key, count] : count_kmers(query, k_)) {
        auto it = ranges_.find(key);
        if (it == ranges_.end()) {
            continue;
        }
        const Posting* p = postings_.data() + it->second.first;
        for (std::uint32_t n = 0; n < it->second.second; ++n) {
            shared[p[n].record] += std::min(count, p[n].count);
        }
    }
    return shared;
}

IdentityResult max_identity(const ProteinSeq& candidate, const ReferenceSet& refs, const IdentitySearch& search,
                            const AlignParams& params) {
    if (refs.size() == 0) {
        throw Error(Errc::EmptyReferenceSet, "reference set has no records");
    }
    const auto query = encode_residues(candidate.residues());
    const auto shared = refs.shared_kmer_counts(query);

    // Visiting likely neighbours first tightens the length bound early.
    std::vector<std::size_t> order(refs.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return shared[a] > shared[b]; });

    IdentityResult result;
    result.exactness = Exactness::Exact;
    if (search.mode == SearchMode::Prefiltered) {
        result.exactness = Exactness::PrefilterApprox;
        if (search.top_m == 0) {
            throw Error(Errc::InvalidParameter, "prefilter top_m must be positive");
        }
        order.resize(std::min(order.size(), search.top_m));
    }

    bool have_best = false;
    std::uint64_t best_m = 0;
    std::uint64_t best_c = 1;
    std::size_t best_idx = 0;
    const std::uint64_t qlen = query.size();

    std::vector<std::size_t> survivors;
    std::vector<std::span<const std::uint8_t>> spans;
    for (std::size_t start = 0; start < order.size(); start += kChunk) {
        const std::size_t stop = std::min(order.size(), start + kChunk);
        survivors.clear();
        spans.clear();
        for (std::size_t k = start; k < stop; ++k) {
            const std::size_t idx = order[k];
            const std::uint64_t rlen = refs.codes(idx).size();
            if (have_best) {
                // Identity can never exceed min(len) / max(len).
                const int cmp = compare_ratio(std::min(qlen, rlen), std::max(qlen, rlen), best_m, best_c);
                if (cmp < 0 || (cmp == 0 && idx > best_idx)) {
                    continue;
                }
            }
            survivors.push_back(idx);
            spans.push_back(refs.codes(idx));
        }
        const auto counts = global_identity_many(query, spans, params);
        for (std::size_t s = 0; s < survivors.size(); ++s) {
            const std::size_t idx = survivors[s];
            const auto& ic = counts[s];
            const int cmp = have_best ? compare_ratio(ic.matches, ic.columns, best_m, best_c) : 1;
            if (cmp > 0 || (cmp == 0 && idx < best_idx)) {
                have_best = true;
                best_m = ic.matches;
                best_c = ic.columns;
                best_idx = idx;
            }
        }
    }

    result.nearest_index = best_idx;
    result.nearest_ref_id = refs.records()[best_idx].id();
    result.matches = static_cast<std::uint32_t>(best_m);
    result.columns = static_cast<std::uint32_t>(best_c);
    result.max_id = static_cast<double>(best_m) / static_cast<double>(best_c);
    return result;
}

AlignmentScorer::AlignmentScorer(const ReferenceSet& refs, AlignParams params, double w_global, double w_local)
    : refs_(refs), params_(std::move(params)), w_global_(w_global), w_local_(w_local), cache_(refs.size()) {
    if (w_global < 0.0 || w_local < 0.0 || std::abs(w_global + w_local - 1.0) > 1e-9) {
        throw Error(Errc::InvalidParameter, "alignment score weights must be non-negative and sum to 1");
    }
}

AlignmentScorer::SelfScores AlignmentScorer::self_scores(std::size_t ref_index) const {
    const auto codes = refs_.codes(ref_index);
    SelfScores self{global_score(codes, codes, params_), local_score(codes, codes, params_)};
    if (self.global <= 0 || self.local <= 0) {
        throw Error(Errc::InvalidParameter, "reference '" + refs_.records()[ref_index].id() +
                                                "' has a non-positive self-alignment score");
    }
    return self;
}

void AlignmentScorer::prepare(std::span<const std::size_t> ref_indices, unsigned threads) {
    std::vector<std::size_t> todo;
    for (std::size_t idx : ref_indices) {
        if (idx >= cache_.size()) {
            throw Error(Errc::UnknownReferenceId, "reference index out of range");
        }
        if (!cache_[idx]) {
            todo.push_back(idx);
        }
    }
    std::sort(todo.begin(), todo.end());
    todo.erase(std::unique(todo.begin(), todo.end()), todo.end());
    std::vector<SelfScores> computed(todo.size());
    parallel_for(todo.size(), threads, [&](std::size_t k) { computed[k] = self_scores(todo[k]); });
    for (std::size_t k = 0; k < todo.size(); ++k) {
        cache_[todo[k]] = computed[k];
    }
}

double AlignmentScorer::score(const ProteinSeq& candidate, std::size_t ref_index) const {
    if (ref_index >= cache_.size()) {
        throw Error(Errc::UnknownReferenceId, "reference index out of range");
    }
    const SelfScores self = cache_[ref_index] ? *cache_[ref_index] : self_scores(ref_index);
    const auto query = encode_residues(candidate.residues());
    const auto ref = refs_.codes(ref_index);
    const double norm_g = static_cast<double>(global_score(query, ref, params_)) / self.global;
    const double norm_l = static_cast<double>(local_score(query, ref, params_)) / self.local;
    return w_global_ * norm_g + w_local_ * norm_l;
}

double alignment_score(const ProteinSeq& candidate, const ReferenceSet& refs, std::string_view nearest_id,
                       double w_global, double w_local, const AlignParams& params) {
    const std::size_t idx = refs.index_of(nearest_id);
    AlignmentScorer scorer(refs, params, w_global, w_local);
    return scorer.score(candidate, idx);
}

}  // namespace plmc
