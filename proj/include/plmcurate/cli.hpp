#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "plmcurate/curation.hpp"
#include "plmcurate/error.hpp"

namespace plmc {

enum ExitCode : int {
    kExitOk = 0,
    kExitInternal = 1,
    kExitUsage = 2,
    kExitConfig = 3,
    kExitIo = 4,
    kExitData = 5,
    kExitManifest = 6,
    kExitMissingScore = 7,
    kExitAwaitingScores = 10,  // filter stopped after sampling; resume with scores
};

int exit_code_for(Errc code) noexcept;

/// Written next to a filter run's outputs so a later --resume can check it
/// continues the same run.
struct RunManifest {
    std::string config_hash;
    std::uint64_t seed = 0;
    std::map<std::string, std::string> inputs;   // role -> sha256 of the file
    std::vector<std::string> completed_stages;
    std::string status;                          // complete | awaiting_scores
    std::map<std::string, std::string> outputs;  // role -> file name in the out dir

    friend bool operator==(const RunManifest&, const RunManifest&) = default;
};

std::string render_manifest(const RunManifest& m);
/// Throws ManifestMismatch on anything that is not a manifest.
RunManifest parse_manifest(std::string_view text);

/// Throws ManifestMismatch when `current` differs from `saved` in config
/// hash, seed, or the digest of any input both name.
void check_resumable(const RunManifest& saved, const RunManifest& current);

/// Complete pipeline state (records with every annotation, and the report)
/// as JSON; doubles round-trip exactly.
std::string render_state(const PipelineResult& state);
PipelineResult parse_state(std::string_view text);

/// Annotation sidecar: id, length, max_id, nearest_ref_id, align_score,
/// bin, stage_flags. Fractions with 4 decimals, "NA" when unset.
std::string render_sidecar(const std::vector<CandidateRecord>& pool);

/// id and the stage that removed the record (or "ingest:<reason>").
std::string render_removed(const PipelineResult& state);

struct PrepResult {
    std::vector<ProteinSeq> kept;
    std::size_t read = 0;
    std::size_t out_of_range = 0;
    std::size_t duplicates = 0;  // exact sequence repeats; the first id wins
};

/// Keeps records with min_len <= length <= max_len, then drops exact
/// duplicate sequences.
PrepResult prep_references(std::vector<ProteinSeq> records, std::size_t min_len, std::size_t max_len);

/// Seed for the candidate pool of `synth`, decorrelated from the reference
/// seed (both use per-index streams).
std::uint64_t synth_candidate_seed(std::uint64_t seed) noexcept;

/// Entry point for the plmcurate executable.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace plmc
