#pragma once

#include <cstdint>
#include <filesystem>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "plmcurate/seq.hpp"

namespace plmc {

/// Per-index generator seeding, so output does not depend on how indices
/// are scheduled.
std::mt19937_64 indexed_rng(std::uint64_t seed, std::uint64_t index);

struct ReferenceParams {
    std::size_t count = 1000;
    double length_mean = 363.6;
    double length_sd = 57.9;
    double k_sd = 2.0;                // lengths are clipped to mean +- k_sd * sd
    std::size_t active_site_pos = 82;  // 1-based
    double family_identity = 0.0;     // > 0: members share an ancestor at this identity
    std::string id_prefix = "ref";

    /// Throws InvalidParameter.
    void validate() const;
};

/// Independent random proteins, or with family_identity > 0 a family derived
/// by substitution from one random ancestor.
/// Every member starts with 'M' and carries 'K' at the active-site position.
std::vector<ProteinSeq> generate_reference_set(const ReferenceParams& params, std::uint64_t seed);

/// Substitutes exactly round((1 - target) * length) residues, never at a
/// protected (0-based) position and never with the same residue.
/// Throws InvalidParameter for target outside (0, 1] and
/// TooManyMutationsForProtectedSet when too few positions are free.
ProteinSeq mutate_to_identity(const ProteinSeq& ref, double target, std::span<const std::size_t> protect,
                              std::uint64_t seed);

/// Removes residues [begin, begin + count).
ProteinSeq delete_residues(const ProteinSeq& seq, std::size_t begin, std::size_t count);

/// Uniform choice among synonymous codons, followed by a random stop codon
/// when `add_stop` is set.
NucleotideSeq reverse_translate(const ProteinSeq& protein, std::mt19937_64& rng, bool add_stop = true);

struct IdentityTarget {
    double identity = 0.85;
    double weight = 1.0;
};

struct DefectProfile {
    double rate_bad_start = 0.0;
    double rate_bad_length = 0.0;
    double rate_mutated_active_site = 0.0;
    std::vector<IdentityTarget> identity_targets = {
        {0.45, 1.0 / 6}, {0.55, 1.0 / 6}, {0.65, 1.0 / 6}, {0.75, 1.0 / 6}, {0.85, 1.0 / 6}, {0.95, 1.0 / 6}};

    // Layout the defects are injected against.
    std::size_t active_site_pos = 82;  // 1-based
    double length_lo = 247.8;
    double length_hi = 479.4;
    std::string id_prefix = "cand";

    /// Throws InvalidParameter.
    void validate() const;
};

struct CandidateLabel {
    std::string id;
    std::string source_ref;
    double identity_target = 0.0;
    bool bad_start = false;
    bool bad_length = false;
    bool bad_active_site = false;

    friend bool operator==(const CandidateLabel&, const CandidateLabel&) = default;
};

struct CandidatePool {
    std::vector<NucleotideSeq> candidates;
    std::vector<CandidateLabel> labels;
};

/// Each candidate is a mutant of a uniformly chosen reference, reverse
/// translated and terminated with a stop codon. Defects are injected
/// independently at the profile's rates:
///   bad start  - first codon replaced by a non-ATG sense codon
///   bad length - truncated below or extended above the length bounds
///   bad active site - the active-site 'K' replaced by another residue
CandidatePool generate_candidate_pool(std::span<const ProteinSeq> refs, const DefectProfile& profile,
                                      std::size_t pool_size, std::uint64_t seed);

/// Labels TSV: id, source_ref, true_identity_target, bad_start, bad_length,
/// bad_active_site (flags as 0/1).
std::string format_labels(std::span<const CandidateLabel> labels);
std::vector<CandidateLabel> parse_labels(std::string_view text);

}  // namespace plmc
