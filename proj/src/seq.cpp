#include "plmcurate/seq.hpp"

#include <algorithm>
#include <cctype>

#include "plmcurate/error.hpp"

namespace plmc {

namespace {

// Standard code, first/second/third base each ordered T, C, A, G.
constexpr std::string_view kStandardCode =
    "FFLLSSSSYY**CC*WLLLLPPPPHHQQRRRRIIIMTTTTNNKKSSRRVVVVAAAADDEEGGGG";

constexpr std::string_view kBaseOrder = "TCAG";

int base_index(char b) noexcept {
    switch (b) {
    case 'T': return 0;
    case 'C': return 1;
    case 'A': return 2;
    case 'G': return 3;
    default: return -1;
    }
}

struct ResidueTable {
    std::array<std::int8_t, 256> code{};
    ResidueTable() {
        code.fill(-1);
        for (int i = 0; i < kNumAminoAcids; ++i) {
            code[static_cast<unsigned char>(kAminoAcids[i])] = static_cast<std::int8_t>(i);
        }
    }
};

const ResidueTable& residue_table() {
    static const ResidueTable table;
    return table;
}

struct SynonymTable {
    // 20 amino acids plus the stop set at index 20.
    std::array<std::vector<Codon>, kNumAminoAcids + 1> codons;
    SynonymTable() {
        for (int idx = 0; idx < 64; ++idx) {
            std::string triplet{kBaseOrder[idx / 16], kBaseOrder[(idx / 4) % 4], kBaseOrder[idx % 4]};
            const char aa = kStandardCode[idx];
            const int slot = aa == '*' ? kNumAminoAcids : residue_code(aa);
            codons[slot].emplace_back(triplet);
        }
    }
};

}  // namespace

int residue_code(char aa) noexcept {
    return residue_table().code[static_cast<unsigned char>(aa)];
}

std::string canonicalize(std::string_view raw) {
    std::string out(raw);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
    return out;
}

NucleotideSeq::NucleotideSeq(std::string id, std::string_view bases)
    : id_(std::move(id)), bases_(canonicalize(bases)) {
    auto bad = std::find_if(bases_.begin(), bases_.end(), [](char c) { return base_index(c) < 0; });
    if (bad != bases_.end()) {
        throw Error(Errc::InvalidSequence,
                    "record '" + id_ + "': invalid nucleotide '" + std::string(1, *bad) + "'");
    }
}

ProteinSeq::ProteinSeq(std::string id, std::string_view residues)
    : id_(std::move(id)), residues_(canonicalize(residues)) {
    if (residues_.empty()) {
        throw Error(Errc::EmptySequence, "record '" + id_ + "' has no residues");
    }
    auto bad = std::find_if(residues_.begin(), residues_.end(), [](char c) { return residue_code(c) < 0; });
    if (bad != residues_.end()) {
        throw Error(Errc::InvalidSequence,
                    "record '" + id_ + "': invalid residue '" + std::string(1, *bad) + "'");
    }
}

Codon::Codon(std::string_view triplet) {
    if (triplet.size() != 3) {
        throw Error(Errc::InvalidSequence, "codon must have exactly 3 bases");
    }
    for (int i = 0; i < 3; ++i) {
        const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(triplet[i])));
        if (base_index(c) < 0) {
            throw Error(Errc::InvalidSequence, "invalid codon '" + std::string(triplet) + "'");
        }
        triplet_[i] = c;
    }
}

int Codon::index() const noexcept {
    return base_index(triplet_[0]) * 16 + base_index(triplet_[1]) * 4 + base_index(triplet_[2]);
}

char Codon::amino_acid() const noexcept { return kStandardCode[index()]; }

std::vector<Codon> tokenize_codons(const NucleotideSeq& seq) {
    const std::string& bases = seq.bases();
    if (bases.size() % 3 != 0) {
        throw Error(Errc::LengthNotMultipleOfThree,
                    "record '" + seq.id() + "' has " + std::to_string(bases.size()) + " bases");
    }
    std::vector<Codon> codons;
    codons.reserve(bases.size() / 3);
    for (std::size_t i = 0; i < bases.size(); i += 3) {
        codons.emplace_back(std::string_view(bases).substr(i, 3));
    }
    return codons;
}

ProteinSeq translate(const NucleotideSeq& seq, StopPolicy policy) {
    const auto codons = tokenize_codons(seq);
    std::string residues;
    residues.reserve(codons.size());
    for (std::size_t i = 0; i < codons.size(); ++i) {
        const char aa = codons[i].amino_acid();
        if (aa != '*') {
            residues.push_back(aa);
            continue;
        }
        if (i == 0) {
            throw Error(Errc::EmptyTranslation, "record '" + seq.id() + "' starts with a stop codon");
        }
        if (policy == StopPolicy::RejectInternalStop && i + 1 != codons.size()) {
            throw Error(Errc::InternalStopCodon,
                        "record '" + seq.id() + "' has a stop at codon " + std::to_string(i + 1));
        }
        break;
    }
    if (residues.empty()) {
        throw Error(Errc::EmptyTranslation, "record '" + seq.id() + "' has no codons");
    }
    return ProteinSeq(seq.id(), residues);
}

std::span<const Codon> synonymous_codons(char aa) {
    static const SynonymTable table;
    if (aa == '*') {
        return table.codons[kNumAminoAcids];
    }
    const int code = residue_code(aa);
    if (code < 0) {
        throw Error(Errc::InvalidSequence, "no codons for '" + std::string(1, aa) + "'");
    }
    return table.codons[code];
}

std::vector<std::uint8_t> encode_residues(std::string_view residues) {
    std::vector<std::uint8_t> out(residues.size());
    for (std::size_t i = 0; i < residues.size(); ++i) {
        out[i] = static_cast<std::uint8_t>(residue_code(residues[i]));
    }
    return out;
}

}  // namespace plmc
