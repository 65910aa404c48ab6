#include "plmcurate/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <map>
#include <random>

#include "plmcurate/error.hpp"
#include "plmcurate/parallel.hpp"

namespace plmc {

namespace {

constexpr std::string_view kReportHeader = "plmcurate-report 1";

std::string fixed(double v, int decimals) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string row(std::string_view label, const std::string& input, const std::string& pct) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-36.*s %10s %12s\n", static_cast<int>(label.size()), label.data(), input.c_str(),
                  pct.c_str());
    return buf;
}

const StageReport* find_stage(const PipelineReport& r, std::string_view name) {
    for (const auto& s : r.stages) {
        if (s.name == name) {
            return &s;
        }
    }
    return nullptr;
}

std::size_t parse_count(const std::map<std::string, std::string>& kv, const std::string& key) {
    auto it = kv.find(key);
    if (it == kv.end()) {
        throw Error(Errc::InvalidParameter, "report is missing key '" + key + "'");
    }
    std::size_t v = 0;
    const auto& s = it->second;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
        throw Error(Errc::InvalidParameter, "report key '" + key + "' is not a count");
    }
    return v;
}

}  // namespace

std::string format_percent(std::size_t part, std::size_t whole) {
    return fixed(whole == 0 ? 0.0 : 100.0 * static_cast<double>(part) / static_cast<double>(whole), 3);
}

std::string render_stage_table(const PipelineReport& report) {
    std::string out;
    out += "Ingested records: " + std::to_string(report.ingested) + ", failed ingestion: " +
           std::to_string(report.ingest_failures.size()) + "\n";
    out += row("Stage", "Input #", "Filtered %");

    auto simple = [&](std::string_view stage, std::string_view label) {
        if (const auto* s = find_stage(report, stage)) {
            out += row(label, std::to_string(s->input), format_percent(s->removed, s->input));
        }
    };
    simple(kStageStartToken, "Starting Token (M/ATG)");
    simple(kStageLength, "Sequence Length");
    simple(kStageActiveSite, "Active Site Conservation");

    const StageReport* first = find_stage(report, kStageMaxId);
    if (first) {
        std::size_t removed = 0;
        for (auto name : {kStageMaxId, kStagePartition, kStageDedup, kStageSample}) {
            if (const auto* s = find_stage(report, name)) {
                removed += s->removed;
            }
        }
        out += row("Max ID + Alignment Score", std::to_string(first->input), format_percent(removed, first->input));
        simple(kStageMaxId, "  max-ID annotation");
        simple(kStagePartition, "  below lowest bin");
        simple(kStageDedup, "  near-duplicate removal");
        simple(kStageSample, "  Sampling Strategy (" + report.sampling_strategy + ")");
    }
    if (const auto* s = find_stage(report, kStagePlddt)) {
        out += row("Structural Integrity (pLDDT)", std::to_string(s->input), format_percent(s->removed, s->input));
        if (s->missing && *s->missing > 0) {
            out += row("  missing score", std::to_string(*s->missing), "");
        }
    } else if (report.awaiting_scores) {
        out += row("Structural Integrity (pLDDT)", std::to_string(report.final_retained()), "awaiting");
    }
    out += row("Final Retained", std::to_string(report.final_retained()), "");
    return out;
}

std::string render_machine_report(const PipelineReport& report) {
    std::string out(kReportHeader);
    out += '\n';
    auto put = [&](const std::string& key, const std::string& value) { out += key + '=' + value + '\n'; };
    put("ingest.records", std::to_string(report.ingested));
    put("ingest.failed", std::to_string(report.ingest_failures.size()));
    for (std::size_t i = 0; i < report.ingest_failures.size(); ++i) {
        const auto& f = report.ingest_failures[i];
        put("ingest.failure." + std::to_string(i), f.id + ' ' + errc_name(f.reason));
    }
    put("sampling.strategy", report.sampling_strategy);
    put("stage.count", std::to_string(report.stages.size()));
    for (std::size_t i = 0; i < report.stages.size(); ++i) {
        const auto& s = report.stages[i];
        const std::string p = "stage." + std::to_string(i) + ".";
        put(p + "name", s.name);
        put(p + "input", std::to_string(s.input));
        put(p + "removed", std::to_string(s.removed));
        put(p + "removed_pct", format_percent(s.removed, s.input));
        if (s.missing) {
            put(p + "missing", std::to_string(*s.missing));
        }
    }
    put("final.retained", std::to_string(report.final_retained()));
    put("status", report.awaiting_scores ? "awaiting_scores" : "complete");
    return out;
}

PipelineReport parse_machine_report(std::string_view text) {
    std::map<std::string, std::string> kv;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        const std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (header) {
            if (line != kReportHeader) {
                throw Error(Errc::InvalidParameter, "not a version-1 report document");
            }
            header = false;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw Error(Errc::InvalidParameter, "report line without '=': " + std::string(line));
        }
        kv[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
    }
    if (header) {
        throw Error(Errc::InvalidParameter, "empty report document");
    }

    PipelineReport r;
    r.ingested = parse_count(kv, "ingest.records");
    const std::size_t failed = parse_count(kv, "ingest.failed");
    for (std::size_t i = 0; i < failed; ++i) {
        const auto it = kv.find("ingest.failure." + std::to_string(i));
        if (it == kv.end()) {
            throw Error(Errc::InvalidParameter, "report lists fewer failures than ingest.failed");
        }
        const std::size_t sp = it->second.rfind(' ');
        const auto code = sp == std::string::npos ? std::nullopt : errc_from_name(it->second.substr(sp + 1));
        if (!code) {
            throw Error(Errc::InvalidParameter, "malformed failure entry '" + it->second + "'");
        }
        r.ingest_failures.push_back({it->second.substr(0, sp), *code});
    }
    if (auto it = kv.find("sampling.strategy"); it != kv.end()) {
        r.sampling_strategy = it->second;
    }
    const std::size_t n = parse_count(kv, "stage.count");
    for (std::size_t i = 0; i < n; ++i) {
        const std::string p = "stage." + std::to_string(i) + ".";
        StageReport s;
        auto it = kv.find(p + "name");
        if (it == kv.end()) {
            throw Error(Errc::InvalidParameter, "report is missing key '" + p + "name'");
        }
        s.name = it->second;
        s.input = parse_count(kv, p + "input");
        s.removed = parse_count(kv, p + "removed");
        if (kv.count(p + "missing")) {
            s.missing = parse_count(kv, p + "missing");
        }
        if (s.removed > s.input) {
            throw Error(Errc::InvalidParameter, "stage " + s.name + " removes more than its input");
        }
        r.stages.push_back(std::move(s));
    }
    const auto status = kv.find("status");
    if (status == kv.end() || (status->second != "complete" && status->second != "awaiting_scores")) {
        throw Error(Errc::InvalidParameter, "report status missing or unknown");
    }
    r.awaiting_scores = status->second == "awaiting_scores";
    return r;
}

ComplianceReport compliance_metrics(const std::vector<ProteinSeq>& pool, const ComplianceConstraints& constraints,
                                    const ScoreTable* plddt, unsigned threads) {
    if (pool.empty()) {
        throw Error(Errc::InvalidParameter, "compliance metrics need a non-empty pool");
    }
    ComplianceReport rep;
    rep.pool_size = pool.size();
    rep.length.constraint = "L in [" + fixed(constraints.length_lo, 1) + ", " + fixed(constraints.length_hi, 1) + "]";
    rep.length.total = pool.size();
    for (const auto& p : pool) {
        const auto len = static_cast<double>(p.size());
        rep.length.passed += constraints.length_lo <= len && len <= constraints.length_hi;
    }
    if (constraints.active_site_ref) {
        const auto& ref = *constraints.active_site_ref;
        std::vector<char> ok(pool.size());
        // Validates the position once, before any worker runs.
        if (constraints.active_site.position < 1 || constraints.active_site.position > ref.size()) {
            throw Error(Errc::ActiveSitePositionOutOfRange, "active-site position exceeds reference length");
        }
        parallel_for(pool.size(), threads, [&](std::size_t i) {
            ok[i] = active_site_conserved(pool[i], ref, constraints.active_site, constraints.align);
        });
        ComplianceRate rate;
        rate.constraint = std::string(1, constraints.active_site.residue) +
                          std::to_string(constraints.active_site.position) + " of " + ref.id();
        rate.total = pool.size();
        rate.passed = static_cast<std::size_t>(std::count(ok.begin(), ok.end(), 1));
        rep.active_site = rate;
    }
    if (plddt) {
        ComplianceRate rate;
        rate.constraint = std::string(plddt->orientation == Orientation::HigherIsBetter ? ">= " : "<= ") +
                          fixed(constraints.plddt_threshold, 2);
        rate.total = pool.size();
        for (const auto& p : pool) {
            const auto s = plddt->find(p.id());
            if (!s) {
                if (constraints.missing_score == MissingScorePolicy::HardFail) {
                    throw Error(Errc::MissingScore, "no score for '" + p.id() + "'");
                }
                ++rate.missing;
                continue;
            }
            rate.passed += meets_threshold(*s, constraints.plddt_threshold, plddt->orientation);
        }
        rep.plddt = rate;
    }
    return rep;
}

std::string render_compliance(const ComplianceReport& report) {
    std::string out = "Compliance over " + std::to_string(report.pool_size) + " sequences\n";
    auto line = [&](std::string_view name, const ComplianceRate& r) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "%-14.*s %8s%%  (%zu/%zu, %s)", static_cast<int>(name.size()), name.data(),
                      fixed(r.percent(), 2).c_str(), r.passed, r.total, r.constraint.c_str());
        out += buf;
        if (r.missing > 0) {
            out += ", missing " + std::to_string(r.missing);
        }
        out += '\n';
    };
    line("length", report.length);
    if (report.active_site) {
        line("active_site", *report.active_site);
    }
    if (report.plddt) {
        line("plddt", *report.plddt);
    }
    return out;
}

std::string render_compliance_kv(const ComplianceReport& report) {
    std::string out;
    auto put = [&](std::string_view name, const ComplianceRate& r) {
        const std::string p = "compliance." + std::string(name) + ".";
        out += p + "constraint=" + r.constraint + '\n';
        out += p + "passed=" + std::to_string(r.passed) + '\n';
        out += p + "total=" + std::to_string(r.total) + '\n';
        out += p + "missing=" + std::to_string(r.missing) + '\n';
        out += p + "pct=" + fixed(r.percent(), 3) + '\n';
    };
    out += "compliance.pool_size=" + std::to_string(report.pool_size) + '\n';
    put("length", report.length);
    if (report.active_site) {
        put("active_site", *report.active_site);
    }
    if (report.plddt) {
        put("plddt", *report.plddt);
    }
    return out;
}

MaxIdHistogram max_id_histogram(const std::vector<double>& max_ids, const std::vector<double>& edges) {
    MaxIdHistogram h;
    h.bins = bin_ranges(edges, BelowRangePolicy::Discard);
    h.counts.assign(h.bins.size(), 0);
    for (double v : max_ids) {
        if (const auto idx = bin_index(h.bins, v)) {
            ++h.counts[*idx];
        } else {
            ++h.below_range;
        }
        ++h.total;
    }
    return h;
}

MaxIdHistogram max_id_histogram(const std::vector<CandidateRecord>& pool, const std::vector<double>& edges) {
    std::vector<double> v;
    v.reserve(pool.size());
    for (const auto& r : pool) {
        if (!r.max_id) {
            throw Error(Errc::UnannotatedRecord, "record '" + r.id + "' has no max_id annotation");
        }
        v.push_back(*r.max_id);
    }
    return max_id_histogram(v, edges);
}

std::string render_histogram(const MaxIdHistogram& h) {
    constexpr std::size_t kBarWidth = 50;
    const std::size_t peak = std::max<std::size_t>(
        1, std::max(h.below_range, h.counts.empty() ? 0 : *std::max_element(h.counts.begin(), h.counts.end())));
    std::string out = "Max-ID histogram (" + std::to_string(h.total) + " sequences)\n";
    auto line = [&](const std::string& label, std::size_t count) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%-12s %8zu ", label.c_str(), count);
        out += buf;
        out.append(count * kBarWidth / peak, '#');
        out += '\n';
    };
    if (h.below_range > 0) {
        line(h.bins.empty() ? "below" : "<" + fixed(h.bins.front().lo, 2), h.below_range);
    }
    for (std::size_t b = 0; b < h.bins.size(); ++b) {
        line(h.bins[b].label(), h.counts[b]);
    }
    return out;
}

std::string render_histogram_kv(const MaxIdHistogram& h) {
    std::string out = "histogram.total=" + std::to_string(h.total) + '\n';
    out += "histogram.below_range=" + std::to_string(h.below_range) + '\n';
    out += "histogram.bins=" + std::to_string(h.bins.size()) + '\n';
    for (std::size_t b = 0; b < h.bins.size(); ++b) {
        const std::string p = "histogram.bin." + std::to_string(b) + ".";
        out += p + "range=" + h.bins[b].label() + '\n';
        out += p + "count=" + std::to_string(h.counts[b]) + '\n';
    }
    return out;
}

DistributionComparison compare_distributions(const ScoreTable& a, const ScoreTable& b, std::uint64_t seed) {
    if (a.entries.empty() || b.entries.empty()) {
        throw Error(Errc::EmptyTable, "distribution comparison needs two non-empty tables");
    }
    if (a.orientation != b.orientation) {
        throw Error(Errc::OrientationMismatch, "tables disagree on which direction is better");
    }
    DistributionComparison c;
    c.name_a = std::string(score_kind_name(a.kind));
    c.name_b = std::string(score_kind_name(b.kind));
    c.orientation = a.orientation;
    c.a = summarize(a);
    c.b = summarize(b);
    c.mean_shift = c.b.mean - c.a.mean;
    c.median_shift = c.b.median - c.a.median;

    std::vector<double> va, vb;
    for (const auto& [id, v] : a.entries) {
        va.push_back(v);
    }
    for (const auto& [id, v] : b.entries) {
        vb.push_back(v);
    }
    const bool higher = a.orientation == Orientation::HigherIsBetter;
    auto credit = [&](double x, double y) {  // y from b, x from a
        if (x == y) {
            return 0.5;
        }
        return (higher ? y > x : y < x) ? 1.0 : 0.0;
    };
    double wins = 0.0;
    std::size_t pairs = 0;
    if (static_cast<double>(va.size()) * static_cast<double>(vb.size()) <= static_cast<double>(kExhaustivePairLimit)) {
        // Sorted sweep: for each b value count a values strictly on either side.
        std::sort(va.begin(), va.end());
        for (double y : vb) {
            const auto lo = std::lower_bound(va.begin(), va.end(), y);
            const auto hi = std::upper_bound(va.begin(), va.end(), y);
            const auto below = static_cast<double>(lo - va.begin());
            const auto above = static_cast<double>(va.end() - hi);
            const auto tied = static_cast<double>(hi - lo);
            wins += (higher ? below : above) + 0.5 * tied;
        }
        pairs = va.size() * vb.size();
        c.exhaustive = true;
    } else {
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<std::size_t> pa(0, va.size() - 1);
        std::uniform_int_distribution<std::size_t> pb(0, vb.size() - 1);
        for (std::size_t k = 0; k < kExhaustivePairLimit; ++k) {
            const double x = va[pa(rng)];
            wins += credit(x, vb[pb(rng)]);
        }
        pairs = kExhaustivePairLimit;
        c.exhaustive = false;
    }
    c.dominance = wins / static_cast<double>(pairs);
    return c;
}

std::string render_comparison(const DistributionComparison& c) {
    std::string out = "Distribution comparison (" + c.name_a + " vs " + c.name_b + ", " +
                      (c.orientation == Orientation::HigherIsBetter ? "higher" : "lower") + " is better)\n";
    auto summary = [&](std::string_view label, const ScoreSummary& s) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "  %-2.*s n=%zu mean=%.4f median=%.4f sd=%.4f min=%.4f max=%.4f\n",
                      static_cast<int>(label.size()), label.data(), s.count, s.mean, s.median, s.stddev, s.min,
                      s.max);
        out += buf;
    };
    summary("a", c.a);
    summary("b", c.b);
    char buf[200];
    std::snprintf(buf, sizeof buf, "  mean shift %.4f, median shift %.4f, P(b better) %.4f (%s)\n", c.mean_shift,
                  c.median_shift, c.dominance, c.exhaustive ? "all pairs" : "sampled pairs");
    out += buf;
    return out;
}

std::string render_comparison_kv(const DistributionComparison& c, std::string_view prefix) {
    std::string out;
    const std::string p(prefix);
    auto put = [&](const std::string& k, const std::string& v) { out += p + k + '=' + v + '\n'; };
    auto summary = [&](const std::string& side, const ScoreSummary& s) {
        put(side + ".count", std::to_string(s.count));
        put(side + ".mean", fixed(s.mean, 6));
        put(side + ".median", fixed(s.median, 6));
        put(side + ".stddev", fixed(s.stddev, 6));
        put(side + ".min", fixed(s.min, 6));
        put(side + ".max", fixed(s.max, 6));
    };
    summary("a", c.a);
    summary("b", c.b);
    put("mean_shift", fixed(c.mean_shift, 6));
    put("median_shift", fixed(c.median_shift, 6));
    put("dominance", fixed(c.dominance, 6));
    put("exhaustive", c.exhaustive ? "1" : "0");
    return out;
}

}  // namespace plmc
