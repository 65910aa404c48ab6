#include "plmcurate/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "plmcurate/error.hpp"
#include "plmcurate/scores.hpp"

namespace plmc {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw Error(Errc::InvalidParameter, what);
    }
}

bool is_rate(double r) {
    return r >= 0.0 && r <= 1.0;
}

char random_residue(std::mt19937_64& rng) {
    return kAminoAcids[std::uniform_int_distribution<int>(0, kNumAminoAcids - 1)(rng)];
}

char random_other_residue(std::mt19937_64& rng, char not_this) {
    const int skip = residue_code(not_this);
    int c = std::uniform_int_distribution<int>(0, kNumAminoAcids - 2)(rng);
    if (c >= skip) {
        ++c;
    }
    return kAminoAcids[c];
}

// Integer length range [lo, hi] of values x with lo_bound <= x <= hi_bound.
std::pair<long, long> integer_bounds(double lo_bound, double hi_bound) {
    return {static_cast<long>(std::ceil(lo_bound)), static_cast<long>(std::floor(hi_bound))};
}

std::string numbered_id(const std::string& prefix, std::size_t index, std::size_t total) {
    const int width = std::max<int>(1, static_cast<int>(std::to_string(total == 0 ? 0 : total - 1).size()));
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, index);
    return prefix + buf;
}

}  // namespace

std::mt19937_64 indexed_rng(std::uint64_t seed, std::uint64_t index) {
    return std::mt19937_64(splitmix64(seed + index));
}

void ReferenceParams::validate() const {
    require(count >= 1, "reference count must be at least 1");
    require(length_sd >= 0.0 && k_sd >= 0.0, "length spread must be non-negative");
    const auto [lo, hi] = integer_bounds(length_mean - k_sd * length_sd, length_mean + k_sd * length_sd);
    require(lo <= hi, "length bounds contain no integer length");
    require(active_site_pos >= 2 && static_cast<long>(active_site_pos) <= lo,
            "active-site position must lie in [2, minimum length]");
    require(family_identity >= 0.0 && family_identity <= 1.0, "family identity must be in [0, 1]");
}

std::vector<ProteinSeq> generate_reference_set(const ReferenceParams& params, std::uint64_t seed) {
    params.validate();
    const auto [lo, hi] = integer_bounds(params.length_mean - params.k_sd * params.length_sd,
                                         params.length_mean + params.k_sd * params.length_sd);
    const std::size_t as = params.active_site_pos - 1;

    std::mt19937_64 rng = indexed_rng(seed, ~std::uint64_t{0});
    std::string ancestor(static_cast<std::size_t>(hi), 'A');
    for (auto& c : ancestor) {
        c = random_residue(rng);
    }
    ancestor[0] = 'M';
    ancestor[as] = 'K';
    const ProteinSeq root("ancestor", ancestor);
    const std::size_t protect[] = {0, as};

    std::vector<ProteinSeq> refs;
    refs.reserve(params.count);
    for (std::size_t i = 0; i < params.count; ++i) {
        std::mt19937_64 r = indexed_rng(seed, i);
        std::normal_distribution<double> length(params.length_mean, params.length_sd);
        const long len = std::clamp(std::lround(length(r)), lo, hi);
        std::string residues;
        if (params.family_identity > 0.0) {
            residues = mutate_to_identity(root, params.family_identity, protect, r()).residues();
        } else {
            residues.resize(static_cast<std::size_t>(hi));
            for (auto& c : residues) {
                c = random_residue(r);
            }
            residues[0] = 'M';
            residues[as] = 'K';
        }
        residues.resize(static_cast<std::size_t>(len));
        refs.emplace_back(numbered_id(params.id_prefix, i, params.count), residues);
    }
    return refs;
}

ProteinSeq mutate_to_identity(const ProteinSeq& ref, double target, std::span<const std::size_t> protect,
                              std::uint64_t seed) {
    if (!(target > 0.0 && target <= 1.0)) {
        throw Error(Errc::InvalidParameter, "identity target must be in (0, 1]");
    }
    const std::size_t n = ref.size();
    std::vector<char> locked(n, 0);
    for (std::size_t p : protect) {
        if (p >= n) {
            throw Error(Errc::InvalidParameter, "protected position " + std::to_string(p) + " is out of range");
        }
        locked[p] = 1;
    }
    std::vector<std::size_t> free;
    for (std::size_t i = 0; i < n; ++i) {
        if (!locked[i]) {
            free.push_back(i);
        }
    }
    const auto count = static_cast<std::size_t>(std::llround((1.0 - target) * static_cast<double>(n)));
    if (count > free.size()) {
        throw Error(Errc::TooManyMutationsForProtectedSet,
                    std::to_string(count) + " substitutions requested but only " + std::to_string(free.size()) +
                        " positions are unprotected");
    }
    std::mt19937_64 rng(seed);
    std::string out = ref.residues();
    // Partial Fisher-Yates picks `count` distinct positions.
    for (std::size_t k = 0; k < count; ++k) {
        std::uniform_int_distribution<std::size_t> pick(k, free.size() - 1);
        std::swap(free[k], free[pick(rng)]);
        out[free[k]] = random_other_residue(rng, out[free[k]]);
    }
    return ProteinSeq(ref.id(), out);
}

ProteinSeq delete_residues(const ProteinSeq& seq, std::size_t begin, std::size_t count) {
    if (begin > seq.size() || count > seq.size() - begin) {
        throw Error(Errc::InvalidParameter, "deletion range exceeds the sequence");
    }
    std::string out = seq.residues();
    out.erase(begin, count);
    return ProteinSeq(seq.id(), out);
}

NucleotideSeq reverse_translate(const ProteinSeq& protein, std::mt19937_64& rng, bool add_stop) {
    std::string bases;
    bases.reserve(3 * (protein.size() + 1));
    auto append = [&](char aa) {
        const auto choices = synonymous_codons(aa);
        const auto& codon = choices[std::uniform_int_distribution<std::size_t>(0, choices.size() - 1)(rng)];
        bases += codon.view();
    };
    for (char aa : protein.residues()) {
        append(aa);
    }
    if (add_stop) {
        append('*');
    }
    return NucleotideSeq(protein.id(), bases);
}

void DefectProfile::validate() const {
    require(is_rate(rate_bad_start) && is_rate(rate_bad_length) && is_rate(rate_mutated_active_site),
            "defect rates must lie in [0, 1]");
    require(!identity_targets.empty(), "identity target mixture is empty");
    double total = 0.0;
    for (const auto& t : identity_targets) {
        require(t.identity > 0.0 && t.identity <= 1.0, "identity targets must lie in (0, 1]");
        require(t.weight >= 0.0, "mixture weights must be non-negative");
        total += t.weight;
    }
    require(std::abs(total - 1.0) < 1e-6, "mixture weights must sum to 1");
    require(active_site_pos >= 2, "active-site position must be at least 2");
    const auto [lo, hi] = integer_bounds(length_lo, length_hi);
    require(lo <= hi && lo >= 22, "length bounds must contain an integer length of at least 22");
}

CandidatePool generate_candidate_pool(std::span<const ProteinSeq> refs, const DefectProfile& profile,
                                      std::size_t pool_size, std::uint64_t seed) {
    profile.validate();
    if (refs.empty()) {
        throw Error(Errc::EmptyReferenceSet, "candidate generation needs at least one reference");
    }
    const std::size_t as = profile.active_site_pos - 1;
    for (const auto& r : refs) {
        if (r.size() <= as) {
            throw Error(Errc::ActiveSitePositionOutOfRange,
                        "reference '" + r.id() + "' is shorter than the active-site position");
        }
    }
    const auto [lo, hi] = integer_bounds(profile.length_lo, profile.length_hi);
    std::vector<double> weights;
    for (const auto& t : profile.identity_targets) {
        weights.push_back(t.weight);
    }
    const std::size_t protect[] = {0, as};

    CandidatePool pool;
    pool.candidates.reserve(pool_size);
    pool.labels.reserve(pool_size);
    for (std::size_t i = 0; i < pool_size; ++i) {
        std::mt19937_64 rng = indexed_rng(seed, i);
        std::uniform_real_distribution<double> coin(0.0, 1.0);
        CandidateLabel label;
        label.id = numbered_id(profile.id_prefix, i, pool_size);
        label.bad_start = coin(rng) < profile.rate_bad_start;
        label.bad_length = coin(rng) < profile.rate_bad_length;
        label.bad_active_site = coin(rng) < profile.rate_mutated_active_site;

        const auto& ref = refs[std::uniform_int_distribution<std::size_t>(0, refs.size() - 1)(rng)];
        label.source_ref = ref.id();
        label.identity_target =
            profile.identity_targets[std::discrete_distribution<std::size_t>(weights.begin(), weights.end())(rng)]
                .identity;
        std::string protein = mutate_to_identity(ref, label.identity_target, protect, rng()).residues();

        if (label.bad_active_site) {
            protein[as] = random_other_residue(rng, 'K');
        }
        if (label.bad_length) {
            if (coin(rng) < 0.5) {
                const long len = lo - std::uniform_int_distribution<long>(1, 20)(rng);
                protein.resize(static_cast<std::size_t>(len));
            } else {
                const long len = hi + std::uniform_int_distribution<long>(1, 20)(rng);
                while (static_cast<long>(protein.size()) < len) {
                    protein += random_residue(rng);
                }
            }
        }
        std::string bases = reverse_translate(ProteinSeq(label.id, protein), rng).bases();
        if (label.bad_start) {
            static const std::vector<std::string> starts = [] {
                std::vector<std::string> v;
                for (char aa : kAminoAcids) {
                    for (const auto& c : synonymous_codons(aa)) {
                        if (c.view() != "ATG") {
                            v.emplace_back(c.view());
                        }
                    }
                }
                return v;
            }();
            bases.replace(0, 3, starts[std::uniform_int_distribution<std::size_t>(0, starts.size() - 1)(rng)]);
        }
        pool.candidates.emplace_back(label.id, bases);
        pool.labels.push_back(std::move(label));
    }
    return pool;
}

std::string format_labels(std::span<const CandidateLabel> labels) {
    std::string out = "id\tsource_ref\ttrue_identity_target\tbad_start\tbad_length\tbad_active_site\n";
    char buf[32];
    for (const auto& l : labels) {
        std::snprintf(buf, sizeof buf, "%.4f", l.identity_target);
        out += l.id + '\t' + l.source_ref + '\t' + buf + '\t' + (l.bad_start ? '1' : '0') + '\t' +
               (l.bad_length ? '1' : '0') + '\t' + (l.bad_active_site ? '1' : '0') + '\n';
    }
    return out;
}

std::vector<CandidateLabel> parse_labels(std::string_view text) {
    std::vector<CandidateLabel> out;
    std::size_t pos = 0;
    bool header = true;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        if (header) {
            header = false;
            continue;
        }
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> f;
        std::size_t start = 0;
        for (;;) {
            const std::size_t tab = line.find('\t', start);
            f.emplace_back(line.substr(start, tab - start));
            if (tab == std::string_view::npos) {
                break;
            }
            start = tab + 1;
        }
        if (f.size() != 6) {
            throw Error(Errc::InvalidParameter, "labels row must have 6 fields: '" + std::string(line) + "'");
        }
        CandidateLabel l;
        l.id = f[0];
        l.source_ref = f[1];
        l.identity_target = std::stod(f[2]);
        l.bad_start = f[3] == "1";
        l.bad_length = f[4] == "1";
        l.bad_active_site = f[5] == "1";
        out.push_back(std::move(l));
    }
    return out;
}

}  // namespace plmc
