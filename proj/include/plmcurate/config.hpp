#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "plmcurate/curation.hpp"
#include "plmcurate/scores.hpp"
#include "plmcurate/synthgen.hpp"

namespace plmc {

enum class MatrixKind { Blosum62, Simple };

/// Everything a run depends on. The pipeline section is shared by filter
/// and eval; synth and prep only read their own sections.
struct RunConfig {
    PipelineConfig pipeline;

    MatrixKind matrix = MatrixKind::Blosum62;
    int simple_match = 1;  // MatrixKind::Simple only
    int simple_mismatch = -1;

    ReferenceParams synth_refs;
    DefectProfile synth_profile;
    std::size_t synth_pool_size = 10000;

    std::size_t prep_min_len = 200;
    std::size_t prep_max_len = 600;

    StubScorer stub;  // seed unused: stub scores are keyed by the run seed

    /// Throws InvalidConfig.
    void validate() const;
};

/// INI text with sections [run] [filters] [identity] [align] [dedup]
/// [sampling] [structure] [synth] [prep] [stub]. Missing keys keep their
/// defaults; unknown sections or keys and malformed values throw
/// InvalidConfig.
RunConfig parse_config(std::string_view text);
RunConfig load_config(const std::filesystem::path& path);

/// Every key, fixed order, shortest round-trip numbers. parse_config of
/// the result yields an equal rendering. `threads` is left out because it
/// never changes output.
std::string render_config(const RunConfig& cfg);

/// SHA-256 (lowercase hex) of render_config.
std::string config_hash(const RunConfig& cfg);

std::string sha256_hex(std::string_view bytes);
/// Throws IoError.
std::string file_digest(const std::filesystem::path& path);

}  // namespace plmc
