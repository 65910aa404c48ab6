#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "plmcurate/seq.hpp"

namespace plmc {

enum class Alphabet { Auto, Nucleotide, Protein };

using SeqRecord = std::variant<NucleotideSeq, ProteinSeq>;

const std::string& record_id(const SeqRecord& record);
const std::string& record_sequence(const SeqRecord& record);

/// A record that parsed structurally but failed alphabet validation
/// (ambiguity codes, unknown residues). It is dropped, not fatal.
struct RejectedRecord {
    std::string id;
    std::string reason;
};

struct FastaContents {
    std::vector<SeqRecord> records;
    std::vector<RejectedRecord> rejected;
    Alphabet alphabet = Alphabet::Auto;  // resolved alphabet
};

/// Auto mode: a file is nucleotide iff every sequence byte is in ACGTacgt.
/// Data before the first header, an empty id, an empty record, or a
/// duplicate id throw (MalformedFasta / DuplicateId).
FastaContents parse_fasta_text(std::string_view text, Alphabet alphabet = Alphabet::Auto);
FastaContents parse_fasta(const std::filesystem::path& path, Alphabet alphabet = Alphabet::Auto);

inline constexpr std::size_t kFastaLineWidth = 60;

std::string format_fasta(const std::vector<SeqRecord>& records);
void write_fasta(const std::vector<SeqRecord>& records, const std::filesystem::path& path);

template <typename Seq>
std::vector<SeqRecord> as_records(const std::vector<Seq>& seqs) {
    return std::vector<SeqRecord>(seqs.begin(), seqs.end());
}

// Small file helpers shared by the I/O modules.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view content);

}  // namespace plmc
