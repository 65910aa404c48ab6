#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "plmcurate/align.hpp"
#include "plmcurate/seq.hpp"

namespace plmc {

struct Posting {
    std::uint32_t record = 0;
    std::uint32_t count = 0;

    friend bool operator==(const Posting&, const Posting&) = default;
};

/// Distinct k-mers of an encoded sequence with their multiplicities,
/// sorted by k-mer key (base-20 packing).
std::vector<std::pair<std::uint64_t, std::uint32_t>> count_kmers(std::span<const std::uint8_t> codes, std::size_t k);

inline constexpr std::size_t kMaxKmer = 14;

/// Immutable reference collection plus a k-mer index. Safe to share
/// read-only across threads.
class ReferenceSet {
public:
    /// Throws EmptyReferenceSet, InvalidParameter (k outside [2, 14]) or
    /// DuplicateId.
    static ReferenceSet build(std::vector<ProteinSeq> records, std::size_t k);

    const std::vector<ProteinSeq>& records() const noexcept { return records_; }
    std::size_t size() const noexcept { return records_.size(); }
    std::size_t k() const noexcept { return k_; }
    std::span<const std::uint8_t> codes(std::size_t index) const noexcept { return codes_[index]; }

    /// Postings sorted by record index; empty for an unseen k-mer.
    std::span<const Posting> postings(std::string_view kmer) const;
    std::size_t distinct_kmers() const noexcept { return ranges_.size(); }

    std::optional<std::size_t> find(std::string_view id) const;
    /// Throws UnknownReferenceId.
    std::size_t index_of(std::string_view id) const;

    /// For each record, sum over shared k-mers of min(query count, record count).
    std::vector<std::uint32_t> shared_kmer_counts(std::span<const std::uint8_t> query) const;

private:
    std::vector<ProteinSeq> records_;
    std::vector<std::vector<std::uint8_t>> codes_;
    std::size_t k_ = 0;
    std::vector<Posting> postings_;
    std::unordered_map<std::uint64_t, std::pair<std::uint32_t, std::uint32_t>> ranges_;
    std::unordered_map<std::string, std::size_t> by_id_;
};

inline ReferenceSet build_reference_set(std::vector<ProteinSeq> records, std::size_t k) {
    return ReferenceSet::build(std::move(records), k);
}

enum class SearchMode { Exact, Prefiltered };

struct IdentitySearch {
    SearchMode mode = SearchMode::Prefiltered;
    std::size_t top_m = 32;
};

enum class Exactness { Exact, PrefilterApprox };

struct IdentityResult {
    double max_id = 0.0;
    std::string nearest_ref_id;
    std::size_t nearest_index = 0;
    Exactness exactness = Exactness::Exact;
    std::uint32_t matches = 0;
    std::uint32_t columns = 0;
};

/// Maximum global identity of `candidate` over the reference set. Ties go to
/// the lowest record index. Prefiltered mode only aligns the top_m records
/// ranked by shared k-mer count (ties by index).
IdentityResult max_identity(const ProteinSeq& candidate, const ReferenceSet& refs, const IdentitySearch& search,
                            const AlignParams& params);

/// Weighted sum of the global and local scores against one reference, each
/// normalized by that reference's self-alignment score. Self-scores are
/// cached per reference after prepare().
class AlignmentScorer {
public:
    AlignmentScorer(const ReferenceSet& refs, AlignParams params, double w_global, double w_local);

    /// Computes self-scores for the given reference indices.
    void prepare(std::span<const std::size_t> ref_indices, unsigned threads = 1);
    double score(const ProteinSeq& candidate, std::size_t ref_index) const;

private:
    struct SelfScores {
        int global = 0;
        int local = 0;
    };
    SelfScores self_scores(std::size_t ref_index) const;

    const ReferenceSet& refs_;
    AlignParams params_;
    double w_global_;
    double w_local_;
    std::vector<std::optional<SelfScores>> cache_;
};

double alignment_score(const ProteinSeq& candidate, const ReferenceSet& refs, std::string_view nearest_id,
                       double w_global, double w_local, const AlignParams& params);

}  // namespace plmc
