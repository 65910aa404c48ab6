#include "plmcurate/cli.hpp"

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>

#include "CLI11.hpp"
#include "plmcurate/config.hpp"
#include "plmcurate/fasta.hpp"
#include "plmcurate/parallel.hpp"
#include "plmcurate/report.hpp"
#include "plmcurate/scores.hpp"
#include "plmcurate/synthgen.hpp"

namespace fs = std::filesystem;

namespace plmc {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// File names inside --out-dir.
constexpr const char* kManifestFile = "manifest.txt";
constexpr const char* kStateFile = "state.json";
constexpr const char* kExportFile = "for_scoring.faa";

struct Common {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<unsigned> threads;
    std::string out_dir;
    std::string report_out;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config, "INI config file (defaults when omitted)");
    sub->add_option("--seed", c.seed, "Overrides [run] seed");
    sub->add_option("--threads", c.threads, "Worker threads; never changes output")->check(CLI::PositiveNumber);
    sub->add_option("--out-dir", c.out_dir, "Directory for output files");
    sub->add_option("--report-out", c.report_out, "Also write the machine-readable report here");
}

RunConfig resolve_config(const Common& c) {
    RunConfig cfg = c.config.empty() ? parse_config("") : load_config(c.config);
    if (c.seed) {
        cfg.pipeline.seed = *c.seed;
    }
    if (c.threads) {
        cfg.pipeline.threads = *c.threads;
    }
    return cfg;
}

fs::path require_out_dir(const Common& c) {
    if (c.out_dir.empty()) {
        throw UsageError("--out-dir is required");
    }
    std::error_code ec;
    fs::create_directories(c.out_dir, ec);
    if (ec) {
        throw Error(Errc::IoError, "cannot create " + c.out_dir + ": " + ec.message());
    }
    return c.out_dir;
}

void warn_rejected(const FastaContents& f, const std::string& path, std::ostream& err) {
    for (const auto& r : f.rejected) {
        err << "warning: " << path << ": skipped " << r.id << ": " << r.reason << '\n';
    }
}

std::vector<ProteinSeq> load_proteins(const std::string& path, std::ostream& err) {
    auto f = parse_fasta(path, Alphabet::Protein);
    warn_rejected(f, path, err);
    std::vector<ProteinSeq> out;
    for (auto& r : f.records) {
        out.push_back(std::get<ProteinSeq>(std::move(r)));
    }
    return out;
}

const ProteinSeq& active_site_reference(const ReferenceSet& refs, const ActiveSiteSpec& site) {
    if (site.ref_id.empty()) {
        return refs.records().front();
    }
    return refs.records()[refs.index_of(site.ref_id)];
}

std::vector<SeqRecord> proteins_of(const std::vector<CandidateRecord>& pool) {
    std::vector<SeqRecord> out;
    for (const auto& r : pool) {
        out.emplace_back(r.protein);
    }
    return out;
}

// ---- prep-ref ---------------------------------------------------------------

struct PrepOptions {
    std::string in;
    std::string out;
    std::optional<std::size_t> min_len;
    std::optional<std::size_t> max_len;
};

int cmd_prep_ref(const Common& c, const PrepOptions& o, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve_config(c);
    const std::size_t lo = o.min_len.value_or(cfg.prep_min_len);
    const std::size_t hi = o.max_len.value_or(cfg.prep_max_len);
    if (lo > hi) {
        throw UsageError("--min-len exceeds --max-len");
    }
    auto f = parse_fasta(o.in, Alphabet::Protein);
    warn_rejected(f, o.in, err);
    std::vector<ProteinSeq> records;
    for (auto& r : f.records) {
        records.push_back(std::get<ProteinSeq>(std::move(r)));
    }
    const auto prep = prep_references(std::move(records), lo, hi);
    fs::path dest = o.out;
    if (dest.empty()) {
        dest = require_out_dir(c) / "refs.faa";
    }
    write_fasta(as_records(prep.kept), dest);

    std::string kv = "plmcurate-prep 1\n";
    kv += "prep.read=" + std::to_string(prep.read + f.rejected.size()) + "\n";
    kv += "prep.rejected_alphabet=" + std::to_string(f.rejected.size()) + "\n";
    kv += "prep.min_len=" + std::to_string(lo) + "\nprep.max_len=" + std::to_string(hi) + "\n";
    kv += "prep.out_of_range=" + std::to_string(prep.out_of_range) + "\n";
    kv += "prep.duplicates=" + std::to_string(prep.duplicates) + "\n";
    kv += "prep.retained=" + std::to_string(prep.kept.size()) + "\n";
    out << "Reference preparation: read " << prep.read + f.rejected.size() << ", rejected " << f.rejected.size()
        << ", outside [" << lo << ", " << hi << "] " << prep.out_of_range << ", duplicates " << prep.duplicates
        << ", retained " << prep.kept.size() << "\nwrote " << dest.string() << '\n';
    if (!c.report_out.empty()) {
        write_file(c.report_out, kv);
    }
    return kExitOk;
}

// ---- synth ------------------------------------------------------------------

int cmd_synth(const Common& c, std::ostream& out) {
    const RunConfig cfg = resolve_config(c);
    const fs::path dir = require_out_dir(c);
    const auto seed = cfg.pipeline.seed;
    const auto refs = generate_reference_set(cfg.synth_refs, seed);
    const auto pool = generate_candidate_pool(refs, cfg.synth_profile, cfg.synth_pool_size, synth_candidate_seed(seed));
    write_fasta(as_records(refs), dir / "refs.faa");
    write_fasta(as_records(pool.candidates), dir / "candidates.fna");
    write_file(dir / "labels.tsv", format_labels(pool.labels));
    out << "Synthetic corpus: " << refs.size() << " references, " << pool.candidates.size()
        << " candidates (seed " << seed << ")\nwrote " << (dir / "refs.faa").string() << ", "
        << (dir / "candidates.fna").string() << ", " << (dir / "labels.tsv").string() << '\n';
    return kExitOk;
}

// ---- filter -----------------------------------------------------------------

struct FilterOptions {
    std::string candidates;
    std::string refs;
    std::string scores;
    bool resume = false;
    bool stub_scores = false;
};

void write_reports(const fs::path& dir, const Common& c, const PipelineReport& report, std::ostream& out) {
    const auto table = render_stage_table(report);
    const auto kv = render_machine_report(report);
    write_file(dir / "report.txt", table);
    write_file(dir / "report.kv", kv);
    if (!c.report_out.empty()) {
        write_file(c.report_out, kv);
    }
    out << table;
}

std::vector<std::string> completed(const PipelineReport& report) {
    std::vector<std::string> names;
    for (const auto& s : report.stages) {
        names.push_back(s.name);
    }
    return names;
}

int cmd_filter(const Common& c, const FilterOptions& o, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve_config(c);
    const fs::path dir = require_out_dir(c);
    if (!o.scores.empty() && o.stub_scores) {
        throw UsageError("--scores and --stub-scores are exclusive");
    }

    RunManifest manifest;
    manifest.config_hash = config_hash(cfg);
    manifest.seed = cfg.pipeline.seed;
    if (!o.candidates.empty()) {
        manifest.inputs["candidates"] = file_digest(o.candidates);
    }
    if (!o.refs.empty()) {
        manifest.inputs["refs"] = file_digest(o.refs);
    }

    PipelineResult state;
    if (o.resume) {
        if (o.scores.empty() && !o.stub_scores) {
            throw UsageError("--resume needs --scores or --stub-scores");
        }
        if (!fs::exists(dir / kManifestFile)) {
            throw Error(Errc::ManifestMismatch, "no manifest in " + dir.string() + " to resume from");
        }
        const auto saved = parse_manifest(read_file(dir / kManifestFile));
        if (saved.status != "awaiting_scores") {
            throw Error(Errc::ManifestMismatch, "run in " + dir.string() + " is not awaiting scores");
        }
        check_resumable(saved, manifest);
        for (const auto& [role, digest] : saved.inputs) {
            manifest.inputs.try_emplace(role, digest);
        }
        state = parse_state(read_file(dir / kStateFile));
    } else {
        if (o.candidates.empty() || o.refs.empty()) {
            throw UsageError("filter needs --candidates and --refs (or --resume)");
        }
        auto cand = parse_fasta(o.candidates);
        warn_rejected(cand, o.candidates, err);
        const auto refs = build_reference_set(load_proteins(o.refs, err), cfg.pipeline.kmer);
        state = run_until_scoring(cfg.pipeline, cand.records, refs);
    }

    std::optional<ScoreTable> scores;
    if (!o.scores.empty()) {
        manifest.inputs["scores"] = file_digest(o.scores);
        scores = load_score_table(o.scores, ScoreKind::Plddt);
    } else if (o.stub_scores) {
        std::vector<std::string> ids;
        for (const auto& r : state.pool) {
            ids.push_back(r.id);
        }
        const StubScorer stub{cfg.pipeline.seed, cfg.stub.lo, cfg.stub.hi};
        scores = stub_table(stub, ids, ScoreKind::Plddt);
    }

    if (!scores) {
        write_fasta(proteins_of(state.pool), dir / kExportFile);
        write_file(dir / kStateFile, render_state(state));
        manifest.completed_stages = completed(state.report);
        manifest.status = "awaiting_scores";
        manifest.outputs = {{"export", kExportFile}, {"state", kStateFile}, {"report", "report.txt"},
                            {"report_kv", "report.kv"}};
        write_file(dir / kManifestFile, render_manifest(manifest));
        write_reports(dir, c, state.report, out);
        out << "awaiting scores: score " << (dir / kExportFile).string()
            << " and rerun filter with --resume --scores <table>\n";
        return kExitAwaitingScores;
    }

    finish_with_scores(state, *scores, cfg.pipeline);
    write_fasta(proteins_of(state.pool), dir / "curated.faa");
    manifest.outputs = {{"curated_protein", "curated.faa"}, {"sidecar", "curated.tsv"}, {"removed", "removed.tsv"},
                        {"report", "report.txt"}, {"report_kv", "report.kv"}};
    const bool all_dna = std::all_of(state.pool.begin(), state.pool.end(), [](const auto& r) { return r.dna; });
    if (all_dna && !state.pool.empty()) {
        std::vector<SeqRecord> dna;
        for (const auto& r : state.pool) {
            dna.emplace_back(*r.dna);
        }
        write_fasta(dna, dir / "curated.fna");
        manifest.outputs["curated_dna"] = "curated.fna";
    }
    write_file(dir / "curated.tsv", render_sidecar(state.pool));
    write_file(dir / "removed.tsv", render_removed(state));
    manifest.completed_stages = completed(state.report);
    manifest.status = "complete";
    write_file(dir / kManifestFile, render_manifest(manifest));
    write_reports(dir, c, state.report, out);
    return kExitOk;
}

// ---- eval -------------------------------------------------------------------

struct EvalOptions {
    std::string pool;
    std::string refs;
    std::string plddt;
    bool histogram = false;
    std::vector<std::string> compare;
    std::string kind = "custom";
};

int cmd_eval(const Common& c, const EvalOptions& o, std::ostream& out, std::ostream& err) {
    const RunConfig cfg = resolve_config(c);
    if (o.histogram && o.refs.empty()) {
        throw UsageError("--histogram needs --refs to annotate max identity");
    }
    if (o.compare.size() % 2 != 0) {
        throw UsageError("--compare takes pairs of score tables");
    }
    const ScoreKind kind = parse_score_kind(o.kind);

    std::vector<ProteinSeq> pool;
    if (!o.pool.empty()) {
        auto f = parse_fasta(o.pool);
        warn_rejected(f, o.pool, err);
        for (const auto& r : f.records) {
            if (const auto* dna = std::get_if<NucleotideSeq>(&r)) {
                pool.push_back(translate(*dna));
            } else {
                pool.push_back(std::get<ProteinSeq>(r));
            }
        }
    } else if (o.compare.empty()) {
        throw UsageError("eval needs --pool or --compare");
    }

    std::optional<ReferenceSet> refs;
    if (!o.refs.empty()) {
        refs = build_reference_set(load_proteins(o.refs, err), cfg.pipeline.kmer);
    }

    std::string text;
    std::string kv = "plmcurate-eval 1\n";
    if (!o.pool.empty()) {
        ComplianceConstraints cons;
        std::tie(cons.length_lo, cons.length_hi) = cfg.pipeline.length.resolve();
        if (refs) {
            cons.active_site_ref = active_site_reference(*refs, cfg.pipeline.active_site);
        }
        cons.active_site = cfg.pipeline.active_site;
        cons.plddt_threshold = cfg.pipeline.plddt_threshold;
        cons.missing_score = cfg.pipeline.missing_score;
        cons.align = cfg.pipeline.align;
        std::optional<ScoreTable> plddt;
        if (!o.plddt.empty()) {
            plddt = load_score_table(o.plddt, ScoreKind::Plddt);
        }
        const auto rep = compliance_metrics(pool, cons, plddt ? &*plddt : nullptr, cfg.pipeline.threads);
        text += render_compliance(rep);
        kv += render_compliance_kv(rep);
    }
    if (o.histogram) {
        std::vector<double> ids(pool.size());
        parallel_for(pool.size(), cfg.pipeline.threads, [&](std::size_t i) {
            ids[i] = max_identity(pool[i], *refs, cfg.pipeline.identity, cfg.pipeline.align).max_id;
        });
        const auto h = max_id_histogram(ids, cfg.pipeline.bin_edges);
        text += render_histogram(h);
        kv += render_histogram_kv(h);
    }
    for (std::size_t i = 0; i + 1 < o.compare.size(); i += 2) {
        const auto a = load_score_table(o.compare[i], kind);
        const auto b = load_score_table(o.compare[i + 1], kind);
        auto cmp = compare_distributions(a, b, cfg.pipeline.seed);
        cmp.name_a = fs::path(o.compare[i]).filename().string();
        cmp.name_b = fs::path(o.compare[i + 1]).filename().string();
        text += render_comparison(cmp);
        kv += render_comparison_kv(cmp, "compare." + std::to_string(i / 2) + ".");
    }
    out << text;
    if (!c.out_dir.empty()) {
        const fs::path dir = require_out_dir(c);
        write_file(dir / "eval.txt", text);
        write_file(dir / "eval.kv", kv);
    }
    if (!c.report_out.empty()) {
        write_file(c.report_out, kv);
    }
    return kExitOk;
}

}  // namespace

PrepResult prep_references(std::vector<ProteinSeq> records, std::size_t min_len, std::size_t max_len) {
    PrepResult r;
    r.read = records.size();
    std::set<std::string> seen;
    for (auto& p : records) {
        if (p.size() < min_len || p.size() > max_len) {
            ++r.out_of_range;
        } else if (!seen.insert(p.residues()).second) {
            ++r.duplicates;
        } else {
            r.kept.push_back(std::move(p));
        }
    }
    return r;
}

std::uint64_t synth_candidate_seed(std::uint64_t seed) noexcept { return splitmix64(seed ^ 0x63616e6469646174ULL); }

int exit_code_for(Errc code) noexcept {
    switch (code) {
        case Errc::InvalidConfig:
            return kExitConfig;
        case Errc::IoError:
            return kExitIo;
        case Errc::ManifestMismatch:
            return kExitManifest;
        case Errc::MissingScore:
            return kExitMissingScore;
        default:
            return kExitData;
    }
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Curation pipeline for generated protein sequences"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "plmcurate 1.0");

    Common common;
    PrepOptions prep;
    FilterOptions filter;
    EvalOptions eval;

    auto* prep_cmd = app.add_subcommand("prep-ref", "Length-filter and deduplicate a reference FASTA");
    add_common(prep_cmd, common);
    prep_cmd->add_option("--in", prep.in, "Reference protein FASTA")->required();
    prep_cmd->add_option("--out", prep.out, "Output FASTA (default <out-dir>/refs.faa)");
    prep_cmd->add_option("--min-len", prep.min_len, "Overrides [prep] min_len");
    prep_cmd->add_option("--max-len", prep.max_len, "Overrides [prep] max_len");

    auto* synth_cmd = app.add_subcommand("synth", "Write a synthetic reference set and candidate pool");
    add_common(synth_cmd, common);

    auto* filter_cmd = app.add_subcommand("filter", "Run the curation pipeline");
    add_common(filter_cmd, common);
    filter_cmd->add_option("--candidates", filter.candidates, "Candidate FASTA (nucleotide or protein)");
    filter_cmd->add_option("--refs", filter.refs, "Reference protein FASTA");
    filter_cmd->add_option("--scores", filter.scores, "pLDDT table (id<TAB>score)");
    filter_cmd->add_flag("--resume", filter.resume, "Continue an awaiting run in --out-dir");
    filter_cmd->add_flag("--stub-scores", filter.stub_scores, "Use deterministic stub pLDDT scores (testing)");

    auto* eval_cmd = app.add_subcommand("eval", "Compliance, max-ID histogram and score comparisons");
    add_common(eval_cmd, common);
    eval_cmd->add_option("--pool", eval.pool, "Pool FASTA to evaluate");
    eval_cmd->add_option("--refs", eval.refs, "Reference FASTA (active site and histogram)");
    eval_cmd->add_option("--plddt", eval.plddt, "pLDDT table for the pool");
    eval_cmd->add_flag("--histogram", eval.histogram, "Max-ID histogram of the pool");
    eval_cmd->add_option("--compare", eval.compare, "Two score tables A B; repeatable")->expected(2)->take_all();
    eval_cmd->add_option("--kind", eval.kind, "Score kind of compared tables: plddt, stability, docking, custom");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (prep_cmd->parsed()) {
            return cmd_prep_ref(common, prep, out, err);
        }
        if (synth_cmd->parsed()) {
            return cmd_synth(common, out);
        }
        if (filter_cmd->parsed()) {
            return cmd_filter(common, filter, out, err);
        }
        return cmd_eval(common, eval, out, err);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        err << "internal error: " << e.what() << '\n';
        return kExitInternal;
    }
}

}  // namespace plmc
