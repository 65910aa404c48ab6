#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "plmcurate/seq.hpp"
#include "plmcurate/substitution.hpp"

namespace plmc {

/// Affine gaps: a gap of length L costs gap_open + (L - 1) * gap_extend.
/// Linear gaps are the special case gap_open == gap_extend.
struct AlignParams {
    SubstitutionMatrix matrix = SubstitutionMatrix::blosum62();
    int gap_open = -11;
    int gap_extend = -1;

    /// gap_open <= gap_extend <= 0 and a symmetric matrix (InvalidParameter).
    void validate() const;
};

enum class AlignKind { Global, Local };

/// Half-open residue range [begin, end).
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;

    std::size_t size() const noexcept { return end - begin; }
    friend bool operator==(const Span&, const Span&) = default;
};

struct Alignment {
    std::string aligned_a;
    std::string aligned_b;
    int score = 0;
    AlignKind kind = AlignKind::Global;
    Span span_a;
    Span span_b;
};

// Gotoh three-state DP with deterministic traceback: among tied
// predecessors the diagonal state wins, then up (gap in b), then left.
Alignment global_align(const ProteinSeq& a, const ProteinSeq& b, const AlignParams& p);

// Smith-Waterman with the same states. A local path starts fresh whenever
// no predecessor is positive; the end cell is the first maximum in
// row-major order. Score 0 yields an empty alignment.
Alignment local_align(const ProteinSeq& a, const ProteinSeq& b, const AlignParams& p);

/// Identical columns / all columns (gap columns included). Global only.
double percent_identity(const Alignment& aln);

// Score-only variants over residue codes (linear memory).
int global_score(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const AlignParams& p);
int local_score(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const AlignParams& p);

/// Score and identity of the optimal global alignment, taken along exactly
/// the path global_align's traceback selects, computed without a traceback
/// matrix.
struct IdentityCount {
    int score = 0;
    std::uint32_t matches = 0;
    std::uint32_t columns = 0;

    double fraction() const noexcept {
        return columns == 0 ? 0.0 : static_cast<double>(matches) / static_cast<double>(columns);
    }
};

IdentityCount global_identity(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                              const AlignParams& p);

/// One query against many targets. Targets are aligned in lane batches
/// (16-bit lanes when the score range allows it, 32-bit otherwise).
std::vector<IdentityCount> global_identity_many(std::span<const std::uint8_t> query,
                                                std::span<const std::span<const std::uint8_t>> targets,
                                                const AlignParams& p);

}  // namespace plmc
