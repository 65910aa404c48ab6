#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "plmcurate/curation.hpp"
#include "plmcurate/scores.hpp"

namespace plmc {

/// Percentage with 3 decimals, e.g. 10 of 60000 -> "0.017".
std::string format_percent(std::size_t part, std::size_t whole);

/// Stage attrition table: Stage | Input # | Filtered %, ending with a
/// "Final Retained" row. Max-ID annotation, partitioning, dedup and
/// sampling appear as sub-rows of one combined row.
std::string render_stage_table(const PipelineReport& report);

/// Versioned key=value document carrying the exact integers.
std::string render_machine_report(const PipelineReport& report);
/// Throws InvalidParameter on a malformed document.
PipelineReport parse_machine_report(std::string_view text);

struct ComplianceConstraints {
    double length_lo = 0.0;
    double length_hi = 0.0;
    std::optional<ProteinSeq> active_site_ref;  // unset: active site not evaluated
    ActiveSiteSpec active_site;
    double plddt_threshold = 0.80;
    MissingScorePolicy missing_score = MissingScorePolicy::CountAsRemoved;
    AlignParams align;
};

struct ComplianceRate {
    std::string constraint;
    std::size_t passed = 0;
    std::size_t total = 0;
    std::size_t missing = 0;

    double percent() const noexcept {
        return total == 0 ? 0.0 : 100.0 * static_cast<double>(passed) / static_cast<double>(total);
    }
};

struct ComplianceReport {
    std::size_t pool_size = 0;
    ComplianceRate length;
    std::optional<ComplianceRate> active_site;
    std::optional<ComplianceRate> plddt;
};

/// Each constraint is evaluated independently over the whole pool. A record
/// without a score counts as failing (or throws MissingScore under HardFail).
/// Throws InvalidParameter for an empty pool.
ComplianceReport compliance_metrics(const std::vector<ProteinSeq>& pool, const ComplianceConstraints& constraints,
                                    const ScoreTable* plddt, unsigned threads = 1);
std::string render_compliance(const ComplianceReport& report);
std::string render_compliance_kv(const ComplianceReport& report);

struct MaxIdHistogram {
    std::vector<BinRange> bins;
    std::vector<std::size_t> counts;
    std::size_t below_range = 0;
    std::size_t total = 0;
};

/// Bins with the partition rule. Values below the lowest edge are tallied
/// separately so counts plus below_range always equal the total.
MaxIdHistogram max_id_histogram(const std::vector<double>& max_ids, const std::vector<double>& edges);
/// Throws UnannotatedRecord.
MaxIdHistogram max_id_histogram(const std::vector<CandidateRecord>& pool, const std::vector<double>& edges);
std::string render_histogram(const MaxIdHistogram& h);
std::string render_histogram_kv(const MaxIdHistogram& h);

struct DistributionComparison {
    std::string name_a;
    std::string name_b;
    ScoreSummary a;
    ScoreSummary b;
    double mean_shift = 0.0;    // b - a
    double median_shift = 0.0;  // b - a
    double dominance = 0.0;     // P(b better than a), ties count half
    bool exhaustive = true;
    Orientation orientation = Orientation::HigherIsBetter;
};

inline constexpr std::size_t kExhaustivePairLimit = 1000000;

/// Exhaustive over all pairs up to kExhaustivePairLimit, otherwise that
/// many seeded random pairs. Throws EmptyTable or OrientationMismatch.
DistributionComparison compare_distributions(const ScoreTable& a, const ScoreTable& b, std::uint64_t seed = 0);
std::string render_comparison(const DistributionComparison& c);
std::string render_comparison_kv(const DistributionComparison& c, std::string_view prefix);

}  // namespace plmc
