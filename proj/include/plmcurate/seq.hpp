#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plmc {

/// The 20 standard amino acids in the residue-code order used by the
/// substitution matrices (ARNDCQEGHILKMFPSTWYV).
inline constexpr std::string_view kAminoAcids = "ARNDCQEGHILKMFPSTWYV";
inline constexpr int kNumAminoAcids = 20;

/// Residue code 0..19 for an uppercase amino-acid letter, -1 otherwise.
int residue_code(char aa) noexcept;

/// Uppercases; leaves every other byte untouched. Idempotent.
std::string canonicalize(std::string_view raw);

class NucleotideSeq {
public:
    /// Canonicalizes `bases` and requires A/C/G/T only (InvalidSequence).
    /// Codon alignment is checked where codons are consumed, not here.
    NucleotideSeq(std::string id, std::string_view bases);

    const std::string& id() const noexcept { return id_; }
    const std::string& bases() const noexcept { return bases_; }
    std::size_t size() const noexcept { return bases_.size(); }

    friend bool operator==(const NucleotideSeq&, const NucleotideSeq&) = default;

private:
    std::string id_;
    std::string bases_;
};

class ProteinSeq {
public:
    /// Canonicalizes `residues`; requires a non-empty string over the 20
    /// standard letters (InvalidSequence / EmptySequence).
    ProteinSeq(std::string id, std::string_view residues);

    const std::string& id() const noexcept { return id_; }
    const std::string& residues() const noexcept { return residues_; }
    std::size_t size() const noexcept { return residues_.size(); }

    friend bool operator==(const ProteinSeq&, const ProteinSeq&) = default;

private:
    std::string id_;
    std::string residues_;
};

class Codon {
public:
    explicit Codon(std::string_view triplet);

    std::string_view view() const noexcept { return {triplet_.data(), 3}; }
    /// Index into the 64-codon table, bases ordered T, C, A, G.
    int index() const noexcept;
    char amino_acid() const noexcept;
    bool is_stop() const noexcept { return amino_acid() == '*'; }

    friend bool operator==(const Codon&, const Codon&) = default;

private:
    std::array<char, 3> triplet_{};
};

enum class StopPolicy { TruncateAtFirstStop, RejectInternalStop };

std::vector<Codon> tokenize_codons(const NucleotideSeq& seq);

/// Standard genetic code. A terminal stop is stripped under both policies.
ProteinSeq translate(const NucleotideSeq& seq, StopPolicy policy = StopPolicy::RejectInternalStop);

/// Synonymous codons for an amino acid letter, or for '*' the stop codons.
std::span<const Codon> synonymous_codons(char aa);

/// Encodes residues to codes 0..19. Input must already be a valid protein.
std::vector<std::uint8_t> encode_residues(std::string_view residues);

}  // namespace plmc
