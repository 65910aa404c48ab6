#include "plmcurate/fasta.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "plmcurate/error.hpp"

namespace plmc {

namespace {

struct RawRecord {
    std::string id;
    std::string sequence;
    std::size_t line = 0;
};

bool is_nucleotide_byte(char c) {
    switch (c) {
    case 'A': case 'C': case 'G': case 'T':
    case 'a': case 'c': case 'g': case 't':
        return true;
    default:
        return false;
    }
}

std::string_view trim_line(std::string_view line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) {
        line.remove_suffix(1);
    }
    return line;
}

std::vector<RawRecord> split_records(std::string_view text) {
    std::vector<RawRecord> raw;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) {
            eol = text.size();
        }
        std::string_view line = trim_line(text.substr(pos, eol - pos));
        pos = eol + 1;
        ++line_no;
        if (line.empty()) {
            continue;
        }
        if (line.front() == '>') {
            std::string_view header = line.substr(1);
            const std::size_t ws = header.find_first_of(" \t");
            std::string id(header.substr(0, ws));
            if (id.empty()) {
                throw Error(Errc::MalformedFasta, "empty identifier at line " + std::to_string(line_no));
            }
            raw.push_back({std::move(id), {}, line_no});
            continue;
        }
        if (raw.empty()) {
            throw Error(Errc::MalformedFasta, "sequence data before the first header at line " +
                                                  std::to_string(line_no));
        }
        raw.back().sequence.append(line);
    }
    return raw;
}

}  // namespace

const std::string& record_id(const SeqRecord& record) {
    return std::visit([](const auto& s) -> const std::string& { return s.id(); }, record);
}

const std::string& record_sequence(const SeqRecord& record) {
    if (const auto* n = std::get_if<NucleotideSeq>(&record)) {
        return n->bases();
    }
    return std::get<ProteinSeq>(record).residues();
}

FastaContents parse_fasta_text(std::string_view text, Alphabet alphabet) {
    std::vector<RawRecord> raw = split_records(text);

    std::unordered_set<std::string> seen;
    for (const auto& r : raw) {
        if (r.sequence.empty()) {
            throw Error(Errc::MalformedFasta, "record '" + r.id + "' (line " + std::to_string(r.line) +
                                                  ") has no sequence");
        }
        if (!seen.insert(r.id).second) {
            throw Error(Errc::DuplicateId, "identifier '" + r.id + "' appears more than once");
        }
    }

    FastaContents out;
    if (alphabet == Alphabet::Auto) {
        bool nucleotide = true;
        for (const auto& r : raw) {
            for (char c : r.sequence) {
                if (!is_nucleotide_byte(c)) {
                    nucleotide = false;
                    break;
                }
            }
            if (!nucleotide) {
                break;
            }
        }
        alphabet = nucleotide ? Alphabet::Nucleotide : Alphabet::Protein;
    }
    out.alphabet = alphabet;

    out.records.reserve(raw.size());
    for (auto& r : raw) {
        try {
            if (alphabet == Alphabet::Nucleotide) {
                out.records.emplace_back(NucleotideSeq(r.id, r.sequence));
            } else {
                std::string_view residues = r.sequence;
                if (residues.size() > 1 && residues.back() == '*') {
                    residues.remove_suffix(1);
                }
                out.records.emplace_back(ProteinSeq(r.id, residues));
            }
        } catch (const Error& e) {
            out.rejected.push_back({r.id, e.what()});
        }
    }
    return out;
}

FastaContents parse_fasta(const std::filesystem::path& path, Alphabet alphabet) {
    return parse_fasta_text(read_file(path), alphabet);
}

std::string format_fasta(const std::vector<SeqRecord>& records) {
    std::unordered_set<std::string_view> seen;
    std::string out;
    for (const auto& rec : records) {
        const std::string& id = record_id(rec);
        if (!seen.insert(id).second) {
            throw Error(Errc::DuplicateId, "identifier '" + id + "' appears more than once");
        }
        const std::string& seq = record_sequence(rec);
        out.push_back('>');
        out.append(id);
        out.push_back('\n');
        for (std::size_t i = 0; i < seq.size(); i += kFastaLineWidth) {
            out.append(seq, i, kFastaLineWidth);
            out.push_back('\n');
        }
    }
    return out;
}

void write_fasta(const std::vector<SeqRecord>& records, const std::filesystem::path& path) {
    write_file(path, format_fasta(records));
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::IoError, "cannot open '" + path.string() + "' for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw Error(Errc::IoError, "read failed for '" + path.string() + "'");
    }
    return std::move(buf).str();
}

void write_file(const std::filesystem::path& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error(Errc::IoError, "cannot open '" + path.string() + "' for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        throw Error(Errc::IoError, "write failed for '" + path.string() + "'");
    }
}

}  // namespace plmc
