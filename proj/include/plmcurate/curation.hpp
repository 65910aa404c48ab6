#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "plmcurate/align.hpp"
#include "plmcurate/error.hpp"
#include "plmcurate/fasta.hpp"
#include "plmcurate/reference_set.hpp"
#include "plmcurate/scores.hpp"
#include "plmcurate/seq.hpp"

namespace plmc {

// Stage names, in the only order the pipeline accepts.
inline constexpr std::string_view kStageStartToken = "start_token";
inline constexpr std::string_view kStageLength = "length";
inline constexpr std::string_view kStageActiveSite = "active_site";
inline constexpr std::string_view kStageMaxId = "max_id";
inline constexpr std::string_view kStagePartition = "partition";
inline constexpr std::string_view kStageDedup = "dedup";
inline constexpr std::string_view kStageSample = "sample";
inline constexpr std::string_view kStagePlddt = "plddt";

const std::vector<std::string>& canonical_stage_order();

struct LengthBounds {
    bool explicit_bounds = false;
    double mean = 363.6;
    double sd = 57.9;
    double k_sd = 2.0;
    double lo = 0.0;  // used when explicit_bounds
    double hi = 0.0;

    /// Inclusive residue-count bounds.
    std::pair<double, double> resolve() const;
};

struct ActiveSiteSpec {
    std::string ref_id;         // empty: the first reference record
    std::size_t position = 82;  // 1-based, in reference coordinates
    char residue = 'K';
};

enum class BelowRangePolicy { Discard, KeepAsExtraBin };
enum class SamplingStrategy { Functionality, Novelty, Custom };
enum class MissingScorePolicy { HardFail, CountAsRemoved };

struct SamplingPlan {
    SamplingStrategy strategy = SamplingStrategy::Novelty;
    std::size_t total_target = 0;  // 0: no cap, every ranked record is kept
    double top_share = 0.70;       // Functionality: share of total_target for the top bin
    std::map<double, std::size_t> per_bin_quota;  // Custom: keyed by bin lower edge
};

struct PipelineConfig {
    std::vector<std::string> stages = canonical_stage_order();
    std::string start_codon = "ATG";
    LengthBounds length;
    ActiveSiteSpec active_site;
    std::size_t kmer = 5;
    IdentitySearch identity;
    std::vector<double> bin_edges = {0.40, 0.50, 0.60, 0.70, 0.80, 0.90, 1.00};
    BelowRangePolicy below_range = BelowRangePolicy::Discard;
    double dedup_threshold = 0.95;
    SamplingPlan sampling;
    double plddt_threshold = 0.80;
    MissingScorePolicy missing_score = MissingScorePolicy::CountAsRemoved;
    AlignParams align;
    double w_global = 0.5;
    double w_local = 0.5;
    std::uint64_t seed = 0;
    unsigned threads = 1;  // never affects output

    /// Throws InvalidConfig.
    void validate() const;
};

/// Max-ID interval [lo, hi), or [lo, hi] for the top bin.
struct BinRange {
    double lo = 0.0;
    double hi = 0.0;
    bool closed = false;

    bool contains(double x) const noexcept { return x >= lo && (closed ? x <= hi : x < hi); }
    std::string label() const;
    friend bool operator==(const BinRange&, const BinRange&) = default;
};

/// The bins a config partitions into, in ascending order. Under
/// KeepAsExtraBin a leading [0, first edge) bin is added.
std::vector<BinRange> bin_ranges(const std::vector<double>& edges, BelowRangePolicy policy);

/// Index of the bin holding x, or nullopt when x is below every bin.
std::optional<std::size_t> bin_index(const std::vector<BinRange>& bins, double x);

struct CandidateRecord {
    std::string id;
    std::optional<NucleotideSeq> dna;
    ProteinSeq protein;
    std::optional<double> max_id;
    std::string nearest_ref_id;
    std::optional<double> align_score;
    std::optional<BinRange> bin;
    std::vector<std::pair<std::string, bool>> stage_flags;
    std::map<std::string, double> external_scores;

    bool passed_all() const;
};

struct IngestFailure {
    std::string id;
    Errc reason;
};

struct IngestResult {
    std::vector<CandidateRecord> records;
    std::vector<IngestFailure> failures;
};

/// Translates nucleotide records (internal stops rejected); records that
/// cannot be translated are reported as failures, not thrown.
IngestResult ingest(const std::vector<SeqRecord>& records);

struct StageReport {
    std::string name;
    std::size_t input = 0;
    std::size_t removed = 0;
    std::optional<std::size_t> missing;  // pLDDT: removed for lack of a score

    std::size_t output() const noexcept { return input - removed; }
    double removed_fraction() const noexcept {
        return input == 0 ? 0.0 : static_cast<double>(removed) / static_cast<double>(input);
    }
    friend bool operator==(const StageReport&, const StageReport&) = default;
};

struct StageResult {
    std::vector<CandidateRecord> kept;
    std::vector<CandidateRecord> removed;
    StageReport report;
};

StageResult filter_start_token(std::vector<CandidateRecord> pool, const PipelineConfig& cfg);
StageResult filter_length(std::vector<CandidateRecord> pool, const PipelineConfig& cfg);

/// Reference column of the active site is located through a global
/// alignment; a gap or any other residue in that column fails.
/// Throws ActiveSitePositionOutOfRange.
StageResult filter_active_site(std::vector<CandidateRecord> pool, const PipelineConfig& cfg,
                               const ProteinSeq& ref);

/// True when `candidate` carries the required residue at the reference's
/// active-site column.
bool active_site_conserved(const ProteinSeq& candidate, const ProteinSeq& ref, const ActiveSiteSpec& site,
                           const AlignParams& params);

/// Sets max_id and nearest_ref_id on every record; removes nothing.
StageResult annotate_max_id(std::vector<CandidateRecord> pool, const ReferenceSet& refs, const PipelineConfig& cfg);

struct PartitionedPool {
    std::vector<BinRange> ranges;
    std::vector<std::vector<CandidateRecord>> bins;
    std::vector<CandidateRecord> below_range;
};

/// Throws UnannotatedRecord.
PartitionedPool partition(std::vector<CandidateRecord> pool, const PipelineConfig& cfg);

/// Ranks one bin by alignment score (descending, ties by id) and greedily
/// drops any record whose global identity to an already kept record is at
/// least the dedup threshold. Scores must already be set.
StageResult dedup_ranked(std::vector<CandidateRecord> bin, const PipelineConfig& cfg);

/// Sets align_score against each record's nearest reference.
void score_alignments(std::vector<CandidateRecord>& pool, const ReferenceSet& refs, const PipelineConfig& cfg);

/// Rank + dedup every bin (bins processed independently).
StageReport rank_and_dedup(PartitionedPool& pool, std::vector<CandidateRecord>& removed, const PipelineConfig& cfg);

/// Per-bin quotas for the plan given what each bin has available.
std::vector<std::size_t> allocate_quotas(const SamplingPlan& plan, const std::vector<BinRange>& ranges,
                                         const std::vector<std::size_t>& available);

/// Takes the top-ranked records of every bin per the plan. Output order is
/// bin descending, then rank.
StageResult sample(PartitionedPool pool, const SamplingPlan& plan);

/// Inclusive threshold in the table's orientation.
/// Throws MissingScore under HardFail.
StageResult filter_plddt(std::vector<CandidateRecord> pool, const ScoreTable& scores, const PipelineConfig& cfg);

struct PipelineReport {
    std::size_t ingested = 0;  // records read, before ingestion failures
    std::vector<IngestFailure> ingest_failures;
    std::vector<StageReport> stages;
    std::string sampling_strategy;
    bool awaiting_scores = false;

    std::size_t final_retained() const noexcept;
};

struct PipelineResult {
    std::vector<CandidateRecord> pool;
    std::vector<CandidateRecord> removed;  // in stage order
    PipelineReport report;
};

/// Runs every stage up to and including sampling.
PipelineResult run_until_scoring(const PipelineConfig& cfg, const std::vector<SeqRecord>& candidates,
                                 const ReferenceSet& refs);

/// Applies the pLDDT stage to the state left by run_until_scoring.
void finish_with_scores(PipelineResult& state, const ScoreTable& scores, const PipelineConfig& cfg);

/// Without a score table the result stops after sampling (awaiting_scores).
PipelineResult run_pipeline(const PipelineConfig& cfg, const std::vector<SeqRecord>& candidates,
                            const ReferenceSet& refs, const ScoreTable* scores);

std::string_view sampling_strategy_name(SamplingStrategy s) noexcept;

}  // namespace plmc
