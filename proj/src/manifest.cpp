#include <charconv>
#include <cstdio>

#include "json.hpp"
#include "plmcurate/cli.hpp"

namespace plmc {

namespace {

constexpr std::string_view kManifestHeader = "plmcurate-manifest 1";

[[noreturn]] void mismatch(const std::string& what) { throw Error(Errc::ManifestMismatch, what); }

std::string join(const std::vector<std::string>& items) {
    std::string s;
    for (const auto& i : items) {
        s += (s.empty() ? "" : ",") + i;
    }
    return s;
}

std::string fraction4(const std::optional<double>& v) {
    if (!v) {
        return "NA";
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", *v);
    return buf;
}

using nlohmann::json;

json record_json(const CandidateRecord& r) {
    json j;
    j["id"] = r.id;
    j["protein"] = r.protein.residues();
    if (r.dna) {
        j["dna"] = r.dna->bases();
    }
    if (r.max_id) {
        j["max_id"] = *r.max_id;
    }
    j["nearest_ref_id"] = r.nearest_ref_id;
    if (r.align_score) {
        j["align_score"] = *r.align_score;
    }
    if (r.bin) {
        j["bin"] = {r.bin->lo, r.bin->hi, r.bin->closed};
    }
    j["stage_flags"] = json::array();
    for (const auto& [stage, ok] : r.stage_flags) {
        j["stage_flags"].push_back({stage, ok});
    }
    j["external_scores"] = r.external_scores;
    return j;
}

CandidateRecord record_from_json(const json& j) {
    const auto id = j.at("id").get<std::string>();
    CandidateRecord r{id, std::nullopt, ProteinSeq(id, j.at("protein").get<std::string>()), {}, {}, {}, {}, {}, {}};
    if (j.contains("dna")) {
        r.dna = NucleotideSeq(id, j.at("dna").get<std::string>());
    }
    if (j.contains("max_id")) {
        r.max_id = j.at("max_id").get<double>();
    }
    r.nearest_ref_id = j.at("nearest_ref_id").get<std::string>();
    if (j.contains("align_score")) {
        r.align_score = j.at("align_score").get<double>();
    }
    if (j.contains("bin")) {
        const auto& b = j.at("bin");
        r.bin = BinRange{b.at(0).get<double>(), b.at(1).get<double>(), b.at(2).get<bool>()};
    }
    for (const auto& f : j.at("stage_flags")) {
        r.stage_flags.emplace_back(f.at(0).get<std::string>(), f.at(1).get<bool>());
    }
    r.external_scores = j.at("external_scores").get<std::map<std::string, double>>();
    return r;
}

}  // namespace

std::string render_manifest(const RunManifest& m) {
    std::string out(kManifestHeader);
    out += "\nconfig_hash=" + m.config_hash + "\nseed=" + std::to_string(m.seed) + "\n";
    for (const auto& [role, digest] : m.inputs) {
        out += "input." + role + "=" + digest + "\n";
    }
    out += "stages.completed=" + join(m.completed_stages) + "\n";
    out += "status=" + m.status + "\n";
    for (const auto& [role, name] : m.outputs) {
        out += "output." + role + "=" + name + "\n";
    }
    return out;
}

RunManifest parse_manifest(std::string_view text) {
    RunManifest m;
    std::size_t pos = 0;
    bool header = false, have_hash = false, have_seed = false;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        const auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (!header) {
            if (line != kManifestHeader) {
                mismatch("not a run manifest");
            }
            header = true;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            mismatch("malformed manifest line: " + std::string(line));
        }
        const std::string key(line.substr(0, eq));
        const std::string value(line.substr(eq + 1));
        if (key == "config_hash") {
            m.config_hash = value;
            have_hash = true;
        } else if (key == "seed") {
            const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), m.seed);
            if (ec != std::errc() || p != value.data() + value.size()) {
                mismatch("malformed manifest seed");
            }
            have_seed = true;
        } else if (key.rfind("input.", 0) == 0) {
            m.inputs[key.substr(6)] = value;
        } else if (key.rfind("output.", 0) == 0) {
            m.outputs[key.substr(7)] = value;
        } else if (key == "stages.completed") {
            std::size_t p = 0;
            while (!value.empty() && p <= value.size()) {
                const auto c = value.find(',', p);
                m.completed_stages.push_back(value.substr(p, c == std::string::npos ? std::string::npos : c - p));
                if (c == std::string::npos) {
                    break;
                }
                p = c + 1;
            }
        } else if (key == "status") {
            m.status = value;
        } else {
            mismatch("unknown manifest key: " + key);
        }
    }
    if (!header || !have_hash || !have_seed) {
        mismatch("incomplete run manifest");
    }
    return m;
}

void check_resumable(const RunManifest& saved, const RunManifest& current) {
    if (saved.config_hash != current.config_hash) {
        mismatch("config differs from the original run (hash " + saved.config_hash.substr(0, 12) + " vs " +
                 current.config_hash.substr(0, 12) + ")");
    }
    if (saved.seed != current.seed) {
        mismatch("seed differs from the original run");
    }
    for (const auto& [role, digest] : current.inputs) {
        const auto it = saved.inputs.find(role);
        if (it != saved.inputs.end() && it->second != digest) {
            mismatch("input '" + role + "' differs from the original run");
        }
    }
}

std::string render_state(const PipelineResult& state) {
    json j;
    j["format"] = "plmcurate-state 1";
    j["pool"] = json::array();
    for (const auto& r : state.pool) {
        j["pool"].push_back(record_json(r));
    }
    j["removed"] = json::array();
    for (const auto& r : state.removed) {
        j["removed"].push_back(record_json(r));
    }
    const auto& rep = state.report;
    j["ingested"] = rep.ingested;
    j["ingest_failures"] = json::array();
    for (const auto& f : rep.ingest_failures) {
        j["ingest_failures"].push_back({f.id, errc_name(f.reason)});
    }
    j["stages"] = json::array();
    for (const auto& s : rep.stages) {
        json st = {{"name", s.name}, {"input", s.input}, {"removed", s.removed}};
        if (s.missing) {
            st["missing"] = *s.missing;
        }
        j["stages"].push_back(st);
    }
    j["sampling_strategy"] = rep.sampling_strategy;
    j["awaiting_scores"] = rep.awaiting_scores;
    return j.dump(1) + "\n";
}

PipelineResult parse_state(std::string_view text) {
    try {
        const json j = json::parse(text);
        if (j.at("format") != "plmcurate-state 1") {
            mismatch("unsupported state format");
        }
        PipelineResult s;
        for (const auto& r : j.at("pool")) {
            s.pool.push_back(record_from_json(r));
        }
        for (const auto& r : j.at("removed")) {
            s.removed.push_back(record_from_json(r));
        }
        s.report.ingested = j.at("ingested").get<std::size_t>();
        for (const auto& f : j.at("ingest_failures")) {
            const auto code = errc_from_name(f.at(1).get<std::string>());
            if (!code) {
                mismatch("unknown ingest failure reason in state");
            }
            s.report.ingest_failures.push_back({f.at(0).get<std::string>(), *code});
        }
        for (const auto& st : j.at("stages")) {
            StageReport r{st.at("name").get<std::string>(), st.at("input").get<std::size_t>(),
                          st.at("removed").get<std::size_t>(), std::nullopt};
            if (st.contains("missing")) {
                r.missing = st.at("missing").get<std::size_t>();
            }
            s.report.stages.push_back(r);
        }
        s.report.sampling_strategy = j.at("sampling_strategy").get<std::string>();
        s.report.awaiting_scores = j.at("awaiting_scores").get<bool>();
        return s;
    } catch (const json::exception& e) {
        mismatch(std::string("corrupt run state: ") + e.what());
    } catch (const Error& e) {
        if (e.code() == Errc::ManifestMismatch) {
            throw;
        }
        mismatch(std::string("corrupt run state: ") + e.what());
    }
}

std::string render_sidecar(const std::vector<CandidateRecord>& pool) {
    std::string out = "id\tlength\tmax_id\tnearest_ref_id\talign_score\tbin\tstage_flags\n";
    for (const auto& r : pool) {
        std::string flags;
        for (const auto& [stage, ok] : r.stage_flags) {
            flags += (flags.empty() ? "" : ",") + stage + (ok ? ":1" : ":0");
        }
        out += r.id + "\t" + std::to_string(r.protein.size()) + "\t" + fraction4(r.max_id) + "\t" +
               (r.nearest_ref_id.empty() ? "NA" : r.nearest_ref_id) + "\t" + fraction4(r.align_score) + "\t" +
               (r.bin ? r.bin->label() : "NA") + "\t" + flags + "\n";
    }
    return out;
}

std::string render_removed(const PipelineResult& state) {
    std::string out = "id\tremoved_at\n";
    for (const auto& f : state.report.ingest_failures) {
        out += f.id + "\tingest:" + errc_name(f.reason) + "\n";
    }
    for (const auto& r : state.removed) {
        out += r.id + "\t" + (r.stage_flags.empty() ? "NA" : r.stage_flags.back().first) + "\n";
    }
    return out;
}

}  // namespace plmc
