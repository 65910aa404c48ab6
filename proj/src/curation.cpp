#include "plmcurate/curation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "plmcurate/error.hpp"
#include "plmcurate/parallel.hpp"

namespace plmc {

namespace {

void config_require(bool ok, const std::string& what) {
    if (!ok) {
        throw Error(Errc::InvalidConfig, what);
    }
}

bool is_fraction(double x) {
    return x >= 0.0 && x <= 1.0;
}

// Splits `pool` by `keep`, recording the stage flag on every record.
StageResult split(std::vector<CandidateRecord> pool, std::string_view stage, const std::vector<char>& keep) {
    StageResult out;
    out.report.name = std::string(stage);
    out.report.input = pool.size();
    for (std::size_t i = 0; i < pool.size(); ++i) {
        pool[i].stage_flags.emplace_back(std::string(stage), keep[i] != 0);
        (keep[i] ? out.kept : out.removed).push_back(std::move(pool[i]));
    }
    out.report.removed = out.removed.size();
    return out;
}

template <typename Fn>
auto with_stage_context(std::string_view stage, Fn&& fn) {
    try {
        return fn();
    } catch (const Error& e) {
        throw Error(e.code(), "stage " + std::string(stage) + ": " + e.message());
    }
}

}  // namespace

const std::vector<std::string>& canonical_stage_order() {
    static const std::vector<std::string> order = {
        std::string(kStageStartToken), std::string(kStageLength), std::string(kStageActiveSite),
        std::string(kStageMaxId),      std::string(kStagePartition), std::string(kStageDedup),
        std::string(kStageSample),     std::string(kStagePlddt)};
    return order;
}

std::pair<double, double> LengthBounds::resolve() const {
    if (explicit_bounds) {
        return {lo, hi};
    }
    return {mean - k_sd * sd, mean + k_sd * sd};
}

void PipelineConfig::validate() const {
    config_require(stages == canonical_stage_order(),
                   "stages must run in the fixed order start_token, length, active_site, max_id, partition, "
                   "dedup, sample, plddt");
    config_require(start_codon.size() == 3 && start_codon.find_first_not_of("ACGT") == std::string::npos,
                   "start codon must be three bases over ACGT");
    const auto [lo, hi] = length.resolve();
    config_require(std::isfinite(lo) && std::isfinite(hi) && lo < hi, "length bounds require lo < hi");
    if (!length.explicit_bounds) {
        config_require(length.sd >= 0.0 && length.k_sd >= 0.0, "length sd and k_sd must be non-negative");
    }
    config_require(active_site.position >= 1, "active-site position is 1-based");
    config_require(residue_code(active_site.residue) >= 0, "active-site residue must be a standard amino acid");
    config_require(kmer >= 2 && kmer <= kMaxKmer, "k-mer length must be in [2, 14]");
    config_require(identity.mode == SearchMode::Exact || identity.top_m >= 1, "prefilter top_m must be positive");
    config_require(!bin_edges.empty(), "bin_edges must not be empty");
    for (std::size_t i = 0; i < bin_edges.size(); ++i) {
        config_require(is_fraction(bin_edges[i]), "bin edges must lie in [0, 1]");
        config_require(i == 0 || bin_edges[i] > bin_edges[i - 1], "bin edges must be strictly ascending");
    }
    config_require(bin_edges.size() >= 2, "bin_edges needs at least two edges");
    config_require(bin_edges.back() == 1.0, "the last bin edge must be 1.00");
    config_require(is_fraction(dedup_threshold), "dedup threshold must lie in [0, 1]");
    config_require(is_fraction(plddt_threshold), "pLDDT threshold must lie in [0, 1]");
    config_require(is_fraction(sampling.top_share), "top-bin share must lie in [0, 1]");
    if (sampling.strategy == SamplingStrategy::Custom) {
        const auto ranges = bin_ranges(bin_edges, below_range);
        for (const auto& [edge, quota] : sampling.per_bin_quota) {
            const bool known = std::any_of(ranges.begin(), ranges.end(),
                                           [&](const BinRange& r) { return std::abs(r.lo - edge) < 1e-9; });
            config_require(known, "custom quota for unknown bin edge " + std::to_string(edge));
        }
    }
    config_require(w_global >= 0.0 && w_local >= 0.0 && std::abs(w_global + w_local - 1.0) <= 1e-9,
                   "alignment weights must be non-negative and sum to 1");
    try {
        align.validate();
    } catch (const Error& e) {
        throw Error(Errc::InvalidConfig, e.message());
    }
}

std::string BinRange::label() const {
    char buf[48];
    std::snprintf(buf, sizeof buf, "[%.2f,%.2f%c", lo, hi, closed ? ']' : ')');
    return buf;
}

std::vector<BinRange> bin_ranges(const std::vector<double>& edges, BelowRangePolicy policy) {
    std::vector<BinRange> out;
    if (edges.size() < 2) {
        return out;
    }
    if (policy == BelowRangePolicy::KeepAsExtraBin && edges.front() > 0.0) {
        out.push_back({0.0, edges.front(), false});
    }
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        out.push_back({edges[i], edges[i + 1], i + 2 == edges.size()});
    }
    return out;
}

std::optional<std::size_t> bin_index(const std::vector<BinRange>& bins, double x) {
    for (std::size_t i = 0; i < bins.size(); ++i) {
        if (bins[i].contains(x)) {
            return i;
        }
    }
    return std::nullopt;
}

bool CandidateRecord::passed_all() const {
    return std::all_of(stage_flags.begin(), stage_flags.end(), [](const auto& f) { return f.second; });
}

IngestResult ingest(const std::vector<SeqRecord>& records) {
    IngestResult out;
    for (const auto& rec : records) {
        if (const auto* dna = std::get_if<NucleotideSeq>(&rec)) {
            try {
                ProteinSeq protein = translate(*dna, StopPolicy::RejectInternalStop);
                out.records.push_back(CandidateRecord{dna->id(), *dna, std::move(protein), {}, {}, {}, {}, {}, {}});
            } catch (const Error& e) {
                out.failures.push_back({dna->id(), e.code()});
            }
        } else {
            const auto& prot = std::get<ProteinSeq>(rec);
            out.records.push_back(CandidateRecord{prot.id(), std::nullopt, prot, {}, {}, {}, {}, {}, {}});
        }
    }
    return out;
}

StageResult filter_start_token(std::vector<CandidateRecord> pool, const PipelineConfig& cfg) {
    std::vector<char> keep(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto& r = pool[i];
        keep[i] = r.dna ? r.dna->bases().starts_with(cfg.start_codon) : r.protein.residues().front() == 'M';
    }
    return split(std::move(pool), kStageStartToken, keep);
}

StageResult filter_length(std::vector<CandidateRecord> pool, const PipelineConfig& cfg) {
    const auto [lo, hi] = cfg.length.resolve();
    std::vector<char> keep(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto len = static_cast<double>(pool[i].protein.size());
        keep[i] = lo <= len && len <= hi;
    }
    return split(std::move(pool), kStageLength, keep);
}

bool active_site_conserved(const ProteinSeq& candidate, const ProteinSeq& ref, const ActiveSiteSpec& site,
                           const AlignParams& params) {
    if (site.position < 1 || site.position > ref.size()) {
        throw Error(Errc::ActiveSitePositionOutOfRange, "active-site position " + std::to_string(site.position) +
                                                            " exceeds reference length " +
                                                            std::to_string(ref.size()));
    }
    const Alignment aln = global_align(candidate, ref, params);
    std::size_t consumed = 0;
    for (std::size_t col = 0; col < aln.aligned_b.size(); ++col) {
        if (aln.aligned_b[col] != '-' && ++consumed == site.position) {
            return aln.aligned_a[col] == site.residue;
        }
    }
    return false;
}

StageResult filter_active_site(std::vector<CandidateRecord> pool, const PipelineConfig& cfg,
                               const ProteinSeq& ref) {
    if (cfg.active_site.position < 1 || cfg.active_site.position > ref.size()) {
        throw Error(Errc::ActiveSitePositionOutOfRange, "active-site position " +
                                                            std::to_string(cfg.active_site.position) +
                                                            " exceeds reference length " + std::to_string(ref.size()));
    }
    std::vector<char> keep(pool.size());
    parallel_for(pool.size(), cfg.threads, [&](std::size_t i) {
        keep[i] = active_site_conserved(pool[i].protein, ref, cfg.active_site, cfg.align);
    });
    return split(std::move(pool), kStageActiveSite, keep);
}

StageResult annotate_max_id(std::vector<CandidateRecord> pool, const ReferenceSet& refs, const PipelineConfig& cfg) {
    if (refs.size() == 0) {
        throw Error(Errc::EmptyReferenceSet, "reference set has no records");
    }
    parallel_for(pool.size(), cfg.threads, [&](std::size_t i) {
        const auto r = max_identity(pool[i].protein, refs, cfg.identity, cfg.align);
        pool[i].max_id = r.max_id;
        pool[i].nearest_ref_id = r.nearest_ref_id;
    });
    std::vector<char> keep(pool.size(), 1);
    return split(std::move(pool), kStageMaxId, keep);
}

PartitionedPool partition(std::vector<CandidateRecord> pool, const PipelineConfig& cfg) {
    PartitionedPool out;
    out.ranges = bin_ranges(cfg.bin_edges, cfg.below_range);
    out.bins.resize(out.ranges.size());
    for (auto& r : pool) {
        if (!r.max_id) {
            throw Error(Errc::UnannotatedRecord, "record '" + r.id + "' has no max_id annotation");
        }
        const auto idx = bin_index(out.ranges, *r.max_id);
        r.stage_flags.emplace_back(std::string(kStagePartition), idx.has_value());
        if (idx) {
            r.bin = out.ranges[*idx];
            out.bins[*idx].push_back(std::move(r));
        } else {
            out.below_range.push_back(std::move(r));
        }
    }
    return out;
}

void score_alignments(std::vector<CandidateRecord>& pool, const ReferenceSet& refs, const PipelineConfig& cfg) {
    AlignmentScorer scorer(refs, cfg.align, cfg.w_global, cfg.w_local);
    std::vector<std::size_t> nearest(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool[i].nearest_ref_id.empty()) {
            throw Error(Errc::UnannotatedRecord, "record '" + pool[i].id + "' has no nearest reference");
        }
        nearest[i] = refs.index_of(pool[i].nearest_ref_id);
    }
    scorer.prepare(nearest, cfg.threads);
    parallel_for(pool.size(), cfg.threads,
                 [&](std::size_t i) { pool[i].align_score = scorer.score(pool[i].protein, nearest[i]); });
}

StageResult dedup_ranked(std::vector<CandidateRecord> bin, const PipelineConfig& cfg) {
    for (const auto& r : bin) {
        if (!r.align_score) {
            throw Error(Errc::UnannotatedRecord, "record '" + r.id + "' has no alignment score");
        }
    }
    std::sort(bin.begin(), bin.end(), [](const CandidateRecord& a, const CandidateRecord& b) {
        if (*a.align_score != *b.align_score) {
            return *a.align_score > *b.align_score;
        }
        return a.id < b.id;
    });

    // Pairs whose shared k-mer count is below t*L - ((1-t)*L + 1)*(k-1),
    // with L the longer length, cannot reach identity t under the
    // all-columns convention; they are skipped without aligning.
    const double t = cfg.dedup_threshold;
    const double k1 = static_cast<double>(cfg.kmer - 1);
    const bool use_bound = t - (1.0 - t) * k1 > 0.0;

    std::vector<std::vector<std::uint8_t>> kept_codes;
    std::unordered_map<std::uint64_t, std::vector<Posting>> index;
    std::vector<std::uint32_t> shared;
    std::vector<std::uint32_t> touched;
    std::vector<std::size_t> check;
    std::vector<std::span<const std::uint8_t>> spans;

    std::vector<char> keep(bin.size(), 0);
    for (std::size_t i = 0; i < bin.size(); ++i) {
        auto codes = encode_residues(bin[i].protein.residues());
        const auto kmers = count_kmers(codes, cfg.kmer);
        check.clear();
        if (use_bound) {
            shared.resize(kept_codes.size(), 0);
            touched.clear();
            for (const auto& [key, count] : kmers) {
                auto it = index.find(key);
                if (it == index.end()) {
                    continue;
                }
                for (const Posting& p : it->second) {
                    if (shared[p.record] == 0) {
                        touched.push_back(p.record);
                    }
                    shared[p.record] += std::min(count, p.count);
                }
            }
            std::sort(touched.begin(), touched.end());
            for (std::uint32_t j : touched) {
                const double len = static_cast<double>(std::max(codes.size(), kept_codes[j].size()));
                if (static_cast<double>(shared[j]) >= t * len - ((1.0 - t) * len + 1.0) * k1) {
                    check.push_back(j);
                }
                shared[j] = 0;
            }
            // With a non-positive bound even k-mer-free pairs may qualify.
            for (std::size_t j = 0; j < kept_codes.size(); ++j) {
                const double len = static_cast<double>(std::max(codes.size(), kept_codes[j].size()));
                if (t * len - ((1.0 - t) * len + 1.0) * k1 <= 0.0 &&
                    !std::binary_search(touched.begin(), touched.end(), static_cast<std::uint32_t>(j))) {
                    check.push_back(j);
                }
            }
            std::sort(check.begin(), check.end());
        } else {
            for (std::size_t j = 0; j < kept_codes.size(); ++j) {
                check.push_back(j);
            }
        }

        bool duplicate = false;
        for (std::size_t start = 0; start < check.size() && !duplicate; start += 64) {
            const std::size_t stop = std::min(check.size(), start + 64);
            spans.clear();
            for (std::size_t c = start; c < stop; ++c) {
                spans.push_back(kept_codes[check[c]]);
            }
            for (const auto& ic : global_identity_many(codes, spans, cfg.align)) {
                if (ic.fraction() >= t) {
                    duplicate = true;
                    break;
                }
            }
        }
        if (duplicate) {
            continue;
        }
        keep[i] = 1;
        const auto j = static_cast<std::uint32_t>(kept_codes.size());
        if (use_bound) {
            for (const auto& [key, count] : kmers) {
                index[key].push_back({j, count});
            }
        }
        kept_codes.push_back(std::move(codes));
    }
    return split(std::move(bin), kStageDedup, keep);
}

StageReport rank_and_dedup(PartitionedPool& pool, std::vector<CandidateRecord>& removed, const PipelineConfig& cfg) {
    std::vector<StageResult> results(pool.bins.size());
    parallel_for(pool.bins.size(), cfg.threads,
                 [&](std::size_t b) { results[b] = dedup_ranked(std::move(pool.bins[b]), cfg); });
    StageReport report{std::string(kStageDedup), 0, 0, std::nullopt};
    for (std::size_t b = 0; b < results.size(); ++b) {
        report.input += results[b].report.input;
        report.removed += results[b].report.removed;
        pool.bins[b] = std::move(results[b].kept);
        for (auto& r : results[b].removed) {
            removed.push_back(std::move(r));
        }
    }
    return report;
}

namespace {

// Hands out `excess` one unit at a time, cycling over bins from the top
// down, to bins that still have room.
void redistribute(std::vector<std::size_t>& quota, const std::vector<std::size_t>& available, std::size_t excess) {
    while (excess > 0) {
        bool gave = false;
        for (std::size_t b = quota.size(); b-- > 0 && excess > 0;) {
            if (quota[b] < available[b]) {
                ++quota[b];
                --excess;
                gave = true;
            }
        }
        if (!gave) {
            return;
        }
    }
}

// Splits `total` evenly over bins [0, count); the remainder goes to the
// highest bins.
void spread(std::vector<std::size_t>& quota, std::size_t count, std::size_t total) {
    if (count == 0) {
        return;
    }
    for (std::size_t b = 0; b < count; ++b) {
        quota[b] += total / count;
    }
    const std::size_t rem = total % count;
    for (std::size_t r = 0; r < rem; ++r) {
        quota[count - 1 - r] += 1;
    }
}

}  // namespace

std::vector<std::size_t> allocate_quotas(const SamplingPlan& plan, const std::vector<BinRange>& ranges,
                                         const std::vector<std::size_t>& available) {
    const std::size_t n = ranges.size();
    std::vector<std::size_t> quota(n, 0);
    if (n == 0) {
        return quota;
    }
    if (plan.strategy == SamplingStrategy::Custom) {
        for (std::size_t b = 0; b < n; ++b) {
            for (const auto& [edge, q] : plan.per_bin_quota) {
                if (std::abs(edge - ranges[b].lo) < 1e-9) {
                    quota[b] = std::min(q, available[b]);
                }
            }
        }
        return quota;
    }
    if (plan.total_target == 0) {
        return available;
    }
    if (plan.strategy == SamplingStrategy::Novelty) {
        spread(quota, n, plan.total_target);
    } else {
        const auto top = std::min<std::size_t>(
            plan.total_target,
            static_cast<std::size_t>(std::ceil(plan.top_share * static_cast<double>(plan.total_target) - 1e-9)));
        quota[n - 1] = top;
        if (n == 1) {
            quota[0] = plan.total_target;
        } else {
            spread(quota, n - 1, plan.total_target - top);
        }
    }
    std::size_t excess = 0;
    for (std::size_t b = 0; b < n; ++b) {
        if (quota[b] > available[b]) {
            excess += quota[b] - available[b];
            quota[b] = available[b];
        }
    }
    redistribute(quota, available, excess);
    return quota;
}

StageResult sample(PartitionedPool pool, const SamplingPlan& plan) {
    std::vector<std::size_t> available;
    for (const auto& b : pool.bins) {
        available.push_back(b.size());
    }
    const auto quota = allocate_quotas(plan, pool.ranges, available);
    StageResult out;
    out.report.name = std::string(kStageSample);
    for (std::size_t b = pool.bins.size(); b-- > 0;) {
        auto& bin = pool.bins[b];
        out.report.input += bin.size();
        for (std::size_t i = 0; i < bin.size(); ++i) {
            const bool take = i < quota[b];
            bin[i].stage_flags.emplace_back(std::string(kStageSample), take);
            (take ? out.kept : out.removed).push_back(std::move(bin[i]));
        }
    }
    out.report.removed = out.removed.size();
    return out;
}

StageResult filter_plddt(std::vector<CandidateRecord> pool, const ScoreTable& scores, const PipelineConfig& cfg) {
    std::vector<char> keep(pool.size());
    std::size_t missing = 0;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        const auto s = scores.find(pool[i].id);
        if (!s) {
            if (cfg.missing_score == MissingScorePolicy::HardFail) {
                throw Error(Errc::MissingScore, "no pLDDT score for '" + pool[i].id + "'");
            }
            ++missing;
            keep[i] = 0;
            continue;
        }
        pool[i].external_scores[std::string(score_kind_name(scores.kind))] = *s;
        keep[i] = meets_threshold(*s, cfg.plddt_threshold, scores.orientation);
    }
    auto out = split(std::move(pool), kStagePlddt, keep);
    out.report.missing = missing;
    return out;
}

std::size_t PipelineReport::final_retained() const noexcept {
    if (stages.empty()) {
        return ingested - ingest_failures.size();
    }
    return stages.back().output();
}

std::string_view sampling_strategy_name(SamplingStrategy s) noexcept {
    switch (s) {
        case SamplingStrategy::Functionality: return "functionality";
        case SamplingStrategy::Novelty: return "novelty";
        case SamplingStrategy::Custom: return "custom";
    }
    return "custom";
}

PipelineResult run_until_scoring(const PipelineConfig& cfg, const std::vector<SeqRecord>& candidates,
                                 const ReferenceSet& refs) {
    cfg.validate();
    PipelineResult res;
    res.report.sampling_strategy = std::string(sampling_strategy_name(cfg.sampling.strategy));
    res.report.ingested = candidates.size();
    auto ingested = ingest(candidates);
    res.report.ingest_failures = std::move(ingested.failures);

    auto absorb = [&](StageResult&& s) {
        res.report.stages.push_back(s.report);
        for (auto& r : s.removed) {
            res.removed.push_back(std::move(r));
        }
        return std::move(s.kept);
    };

    auto pool = absorb(filter_start_token(std::move(ingested.records), cfg));
    pool = absorb(filter_length(std::move(pool), cfg));
    const ProteinSeq& site_ref = with_stage_context(kStageActiveSite, [&]() -> const ProteinSeq& {
        return cfg.active_site.ref_id.empty() ? refs.records().front()
                                              : refs.records()[refs.index_of(cfg.active_site.ref_id)];
    });
    pool = absorb(with_stage_context(kStageActiveSite,
                                     [&] { return filter_active_site(std::move(pool), cfg, site_ref); }));
    pool = absorb(with_stage_context(kStageMaxId, [&] { return annotate_max_id(std::move(pool), refs, cfg); }));

    PartitionedPool parts = with_stage_context(kStagePartition, [&] { return partition(std::move(pool), cfg); });
    StageReport part_report{std::string(kStagePartition), 0, parts.below_range.size(), std::nullopt};
    for (const auto& b : parts.bins) {
        part_report.input += b.size();
    }
    part_report.input += parts.below_range.size();
    res.report.stages.push_back(part_report);
    for (auto& r : parts.below_range) {
        res.removed.push_back(std::move(r));
    }
    parts.below_range.clear();

    with_stage_context(kStageDedup, [&] {
        for (auto& b : parts.bins) {
            score_alignments(b, refs, cfg);
        }
        res.report.stages.push_back(rank_and_dedup(parts, res.removed, cfg));
        return 0;
    });
    res.pool = absorb(sample(std::move(parts), cfg.sampling));
    res.report.awaiting_scores = true;
    return res;
}

void finish_with_scores(PipelineResult& state, const ScoreTable& scores, const PipelineConfig& cfg) {
    auto kept = with_stage_context(kStagePlddt, [&] { return filter_plddt(std::move(state.pool), scores, cfg); });
    state.report.stages.push_back(kept.report);
    for (auto& r : kept.removed) {
        state.removed.push_back(std::move(r));
    }
    state.pool = std::move(kept.kept);
    state.report.awaiting_scores = false;
}

PipelineResult run_pipeline(const PipelineConfig& cfg, const std::vector<SeqRecord>& candidates,
                            const ReferenceSet& refs, const ScoreTable* scores) {
    PipelineResult res = run_until_scoring(cfg, candidates, refs);
    if (scores) {
        finish_with_scores(res, *scores, cfg);
    }
    return res;
}

}  // namespace plmc
