#include "plmcurate/config.hpp"

#include <openssl/evp.h>

#include <array>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "plmcurate/error.hpp"
#include "plmcurate/fasta.hpp"

namespace plmc {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(Errc::InvalidConfig, what); }

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

template <typename T>
T parse_number(std::string_view key, std::string_view raw) {
    const std::string s = trim(raw);
    T v{};
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) {
        bad(std::string(key) + ": not a number: '" + s + "'");
    }
    if constexpr (std::is_floating_point_v<T>) {
        if (!std::isfinite(v)) {
            bad(std::string(key) + ": not finite");
        }
    }
    return v;
}

std::string fmt(double v) {
    std::array<char, 32> buf{};
    const auto r = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), r.ptr);
}

template <typename T>
std::string fmt_int(T v) {
    return std::to_string(v);
}

std::vector<std::string> split_list(std::string_view raw) {
    std::vector<std::string> out;
    const std::string s = trim(raw);
    if (s.empty()) {
        return out;
    }
    std::size_t pos = 0;
    for (;;) {
        const auto c = s.find(',', pos);
        out.push_back(trim(std::string_view(s).substr(pos, c == std::string::npos ? std::string::npos : c - pos)));
        if (c == std::string::npos) {
            return out;
        }
        pos = c + 1;
    }
}

std::pair<double, double> parse_pair(std::string_view key, const std::string& item) {
    const auto colon = item.find(':');
    if (colon == std::string::npos) {
        bad(std::string(key) + ": expected value:weight, got '" + item + "'");
    }
    return {parse_number<double>(key, std::string_view(item).substr(0, colon)),
            parse_number<double>(key, std::string_view(item).substr(colon + 1))};
}

struct Field {
    const char* section;
    const char* key;
    std::function<void(RunConfig&, std::string_view)> set;
    std::function<std::string(const RunConfig&)> get;
    bool hashed = true;
};

template <typename T>
Field number(const char* section, const char* key, T RunConfig::*member) {
    return {section, key, [member, key](RunConfig& c, std::string_view v) { c.*member = parse_number<T>(key, v); },
            [member](const RunConfig& c) {
                if constexpr (std::is_floating_point_v<T>) {
                    return fmt(c.*member);
                } else {
                    return fmt_int(c.*member);
                }
            }};
}

// Accessor-based variant for nested members.
template <typename T, typename Access>
Field nested(const char* section, const char* key, Access access) {
    return {section, key, [access, key](RunConfig& c, std::string_view v) { access(c) = parse_number<T>(key, v); },
            [access](const RunConfig& c) {
                const T& value = access(const_cast<RunConfig&>(c));
                if constexpr (std::is_floating_point_v<T>) {
                    return fmt(value);
                } else {
                    return fmt_int(value);
                }
            }};
}

template <typename Enum>
Field choice(const char* section, const char* key, std::function<Enum&(RunConfig&)> access,
             std::vector<std::pair<Enum, const char*>> names) {
    return {section, key,
            [access, names, key](RunConfig& c, std::string_view v) {
                const std::string s = trim(v);
                for (const auto& [e, n] : names) {
                    if (s == n) {
                        access(c) = e;
                        return;
                    }
                }
                bad(std::string(key) + ": unknown value '" + s + "'");
            },
            [access, names](const RunConfig& c) {
                const Enum e = access(const_cast<RunConfig&>(c));
                for (const auto& [v, n] : names) {
                    if (v == e) {
                        return std::string(n);
                    }
                }
                return std::string();
            }};
}

const std::vector<Field>& fields() {
    using C = RunConfig;
    static const std::vector<Field> table = [] {
        std::vector<Field> f;
        f.push_back(nested<std::uint64_t>("run", "seed", [](C& c) -> auto& { return c.pipeline.seed; }));
        f.push_back(nested<unsigned>("run", "threads", [](C& c) -> auto& { return c.pipeline.threads; }));
        f.back().hashed = false;

        f.push_back({"pipeline", "stages",
                     [](C& c, std::string_view v) { c.pipeline.stages = split_list(v); },
                     [](const C& c) {
                         std::string s;
                         for (const auto& st : c.pipeline.stages) {
                             s += (s.empty() ? "" : ",") + st;
                         }
                         return s;
                     }});

        f.push_back({"filters", "start_codon", [](C& c, std::string_view v) { c.pipeline.start_codon = trim(v); },
                     [](const C& c) { return c.pipeline.start_codon; }});
        f.push_back(choice<bool>("filters", "length_mode", [](C& c) -> bool& { return c.pipeline.length.explicit_bounds; },
                                 {{false, "sd"}, {true, "explicit"}}));
        f.push_back(nested<double>("filters", "length_mean", [](C& c) -> auto& { return c.pipeline.length.mean; }));
        f.push_back(nested<double>("filters", "length_sd", [](C& c) -> auto& { return c.pipeline.length.sd; }));
        f.push_back(nested<double>("filters", "length_k_sd", [](C& c) -> auto& { return c.pipeline.length.k_sd; }));
        f.push_back(nested<double>("filters", "length_lo", [](C& c) -> auto& { return c.pipeline.length.lo; }));
        f.push_back(nested<double>("filters", "length_hi", [](C& c) -> auto& { return c.pipeline.length.hi; }));
        f.push_back({"filters", "active_site_ref",
                     [](C& c, std::string_view v) { c.pipeline.active_site.ref_id = trim(v); },
                     [](const C& c) { return c.pipeline.active_site.ref_id; }});
        f.push_back(nested<std::size_t>("filters", "active_site_position",
                                        [](C& c) -> auto& { return c.pipeline.active_site.position; }));
        f.push_back({"filters", "active_site_residue",
                     [](C& c, std::string_view v) {
                         const std::string s = trim(v);
                         if (s.size() != 1) {
                             bad("active_site_residue: expected one letter");
                         }
                         c.pipeline.active_site.residue = s[0];
                     },
                     [](const C& c) { return std::string(1, c.pipeline.active_site.residue); }});

        f.push_back(choice<SearchMode>("identity", "mode", [](C& c) -> SearchMode& { return c.pipeline.identity.mode; },
                                       {{SearchMode::Exact, "exact"}, {SearchMode::Prefiltered, "prefiltered"}}));
        f.push_back(nested<std::size_t>("identity", "top_m", [](C& c) -> auto& { return c.pipeline.identity.top_m; }));
        f.push_back(nested<std::size_t>("identity", "kmer", [](C& c) -> auto& { return c.pipeline.kmer; }));
        f.push_back({"identity", "bin_edges",
                     [](C& c, std::string_view v) {
                         c.pipeline.bin_edges.clear();
                         for (const auto& item : split_list(v)) {
                             c.pipeline.bin_edges.push_back(parse_number<double>("bin_edges", item));
                         }
                     },
                     [](const C& c) {
                         std::string s;
                         for (double e : c.pipeline.bin_edges) {
                             s += (s.empty() ? "" : ",") + fmt(e);
                         }
                         return s;
                     }});
        f.push_back(choice<BelowRangePolicy>(
            "identity", "below_range", [](C& c) -> BelowRangePolicy& { return c.pipeline.below_range; },
            {{BelowRangePolicy::Discard, "discard"}, {BelowRangePolicy::KeepAsExtraBin, "extra_bin"}}));

        f.push_back(choice<MatrixKind>("align", "matrix", [](C& c) -> MatrixKind& { return c.matrix; },
                                       {{MatrixKind::Blosum62, "blosum62"}, {MatrixKind::Simple, "simple"}}));
        f.push_back(number("align", "match", &C::simple_match));
        f.push_back(number("align", "mismatch", &C::simple_mismatch));
        f.push_back(nested<int>("align", "gap_open", [](C& c) -> auto& { return c.pipeline.align.gap_open; }));
        f.push_back(nested<int>("align", "gap_extend", [](C& c) -> auto& { return c.pipeline.align.gap_extend; }));
        f.push_back(nested<double>("align", "w_global", [](C& c) -> auto& { return c.pipeline.w_global; }));
        f.push_back(nested<double>("align", "w_local", [](C& c) -> auto& { return c.pipeline.w_local; }));

        f.push_back(nested<double>("dedup", "threshold", [](C& c) -> auto& { return c.pipeline.dedup_threshold; }));

        f.push_back(choice<SamplingStrategy>(
            "sampling", "strategy", [](C& c) -> SamplingStrategy& { return c.pipeline.sampling.strategy; },
            {{SamplingStrategy::Functionality, "functionality"},
             {SamplingStrategy::Novelty, "novelty"},
             {SamplingStrategy::Custom, "custom"}}));
        f.push_back(nested<std::size_t>("sampling", "total_target",
                                        [](C& c) -> auto& { return c.pipeline.sampling.total_target; }));
        f.push_back(nested<double>("sampling", "top_share", [](C& c) -> auto& { return c.pipeline.sampling.top_share; }));
        f.push_back({"sampling", "quotas",
                     [](C& c, std::string_view v) {
                         c.pipeline.sampling.per_bin_quota.clear();
                         for (const auto& item : split_list(v)) {
                             const auto [edge, n] = parse_pair("quotas", item);
                             if (n < 0 || n != std::floor(n)) {
                                 bad("quotas: counts must be non-negative integers");
                             }
                             c.pipeline.sampling.per_bin_quota[edge] = static_cast<std::size_t>(n);
                         }
                     },
                     [](const C& c) {
                         std::string s;
                         for (const auto& [edge, n] : c.pipeline.sampling.per_bin_quota) {
                             s += (s.empty() ? "" : ",") + fmt(edge) + ":" + std::to_string(n);
                         }
                         return s;
                     }});

        f.push_back(nested<double>("structure", "plddt_threshold",
                                   [](C& c) -> auto& { return c.pipeline.plddt_threshold; }));
        f.push_back(choice<MissingScorePolicy>(
            "structure", "missing_score", [](C& c) -> MissingScorePolicy& { return c.pipeline.missing_score; },
            {{MissingScorePolicy::HardFail, "hard_fail"}, {MissingScorePolicy::CountAsRemoved, "count_as_removed"}}));

        f.push_back(nested<std::size_t>("synth", "ref_count", [](C& c) -> auto& { return c.synth_refs.count; }));
        f.push_back(nested<double>("synth", "ref_length_mean", [](C& c) -> auto& { return c.synth_refs.length_mean; }));
        f.push_back(nested<double>("synth", "ref_length_sd", [](C& c) -> auto& { return c.synth_refs.length_sd; }));
        f.push_back(nested<double>("synth", "ref_k_sd", [](C& c) -> auto& { return c.synth_refs.k_sd; }));
        f.push_back(nested<double>("synth", "family_identity",
                                   [](C& c) -> auto& { return c.synth_refs.family_identity; }));
        f.push_back(number("synth", "pool_size", &C::synth_pool_size));
        f.push_back(nested<double>("synth", "rate_bad_start", [](C& c) -> auto& { return c.synth_profile.rate_bad_start; }));
        f.push_back(
            nested<double>("synth", "rate_bad_length", [](C& c) -> auto& { return c.synth_profile.rate_bad_length; }));
        f.push_back(nested<double>("synth", "rate_mutated_active_site",
                                   [](C& c) -> auto& { return c.synth_profile.rate_mutated_active_site; }));
        f.push_back({"synth", "identity_targets",
                     [](C& c, std::string_view v) {
                         c.synth_profile.identity_targets.clear();
                         for (const auto& item : split_list(v)) {
                             const auto [id, w] = parse_pair("identity_targets", item);
                             c.synth_profile.identity_targets.push_back({id, w});
                         }
                     },
                     [](const C& c) {
                         std::string s;
                         for (const auto& t : c.synth_profile.identity_targets) {
                             s += (s.empty() ? "" : ",") + fmt(t.identity) + ":" + fmt(t.weight);
                         }
                         return s;
                     }});

        f.push_back(number("prep", "min_len", &C::prep_min_len));
        f.push_back(number("prep", "max_len", &C::prep_max_len));

        f.push_back(nested<double>("stub", "lo", [](C& c) -> auto& { return c.stub.lo; }));
        f.push_back(nested<double>("stub", "hi", [](C& c) -> auto& { return c.stub.hi; }));
        return f;
    }();
    return table;
}

// Settings that several modules need to agree on are derived, not duplicated.
void derive(RunConfig& c) {
    c.pipeline.align.matrix = c.matrix == MatrixKind::Blosum62
                                  ? SubstitutionMatrix::blosum62()
                                  : SubstitutionMatrix::simple(c.simple_match, c.simple_mismatch);
    c.synth_refs.active_site_pos = c.pipeline.active_site.position;
    c.synth_profile.active_site_pos = c.pipeline.active_site.position;
    const auto [lo, hi] = c.pipeline.length.resolve();
    c.synth_profile.length_lo = lo;
    c.synth_profile.length_hi = hi;
}

}  // namespace

void RunConfig::validate() const {
    pipeline.validate();
    try {
        synth_refs.validate();
        synth_profile.validate();
    } catch (const Error& e) {
        bad("synth: " + e.message());
    }
    if (prep_min_len > prep_max_len) {
        bad("prep: min_len exceeds max_len");
    }
    if (!(stub.lo < stub.hi)) {
        bad("stub: lo must be below hi");
    }
}

RunConfig parse_config(std::string_view text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in{std::string(text)};
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        bad(std::string("malformed config: ") + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    RunConfig cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty()) {
            bad("key outside any section: '" + section + "'");
        }
        for (const auto& [key, value] : body) {
            const Field* field = nullptr;
            for (const auto& f : fields()) {
                if (section == f.section && key == f.key) {
                    field = &f;
                }
            }
            if (field == nullptr) {
                bad("unknown key [" + section + "] " + key);
            }
            field->set(cfg, value.data());
        }
    }
    derive(cfg);
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::filesystem::path& path) { return parse_config(read_file(path)); }

std::string render_config(const RunConfig& cfg) {
    std::string out;
    std::string current;
    for (const auto& f : fields()) {
        if (!f.hashed) {
            continue;
        }
        if (current != f.section) {
            out += (out.empty() ? "[" : "\n[") + std::string(f.section) + "]\n";
            current = f.section;
        }
        out += std::string(f.key) + " = " + f.get(cfg) + "\n";
    }
    return out;
}

std::string config_hash(const RunConfig& cfg) { return sha256_hex(render_config(cfg)); }

std::string sha256_hex(std::string_view bytes) {
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error(Errc::IoError, "sha256 failed");
    }
    static constexpr char hex[] = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i) {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string file_digest(const std::filesystem::path& path) { return sha256_hex(read_file(path)); }

}  // namespace plmc
