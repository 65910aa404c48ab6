#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "plmcurate/reference_set.hpp"
#include "test_util.hpp"

using namespace plmc;

namespace {

std::vector<ProteinSeq> random_refs(std::mt19937_64& rng, std::size_t n, std::size_t lo, std::size_t hi,
                                    std::string_view alphabet = kAminoAcids) {
    std::uniform_int_distribution<std::size_t> len(lo, hi);
    std::vector<ProteinSeq> refs;
    for (std::size_t i = 0; i < n; ++i) {
        refs.emplace_back("r" + std::to_string(i), oracle::random_protein(rng, len(rng), alphabet));
    }
    return refs;
}

// Independent linear scan through the traceback route.
std::pair<double, std::size_t> linear_scan(const std::string& c, const std::vector<ProteinSeq>& refs,
                                           const AlignParams& p) {
    double best = -1.0;
    std::size_t idx = 0;
    for (std::size_t i = 0; i < refs.size(); ++i) {
        const double id = oracle::traced_identity(c, refs[i].residues(), p);
        if (id > best) {
            best = id;
            idx = i;
        }
    }
    return {best, idx};
}

}  // namespace

TEST_CASE("build_reference_set indexes every k-mer") {
    const auto set = build_reference_set({ProteinSeq("r0", "MKWV")}, 3);
    CHECK(set.distinct_kmers() == 2);
    REQUIRE(set.postings("MKW").size() == 1);
    CHECK(set.postings("MKW")[0] == Posting{0, 1});
    CHECK(set.postings("KWV")[0] == Posting{0, 1});
    CHECK(set.postings("WWW").empty());

    const auto dup = build_reference_set({ProteinSeq("r0", "AAAA"), ProteinSeq("r1", "CAAA")}, 2);
    REQUIRE(dup.postings("AA").size() == 2);
    CHECK(dup.postings("AA")[0] == Posting{0, 3});
    CHECK(dup.postings("AA")[1] == Posting{1, 2});

    CHECK_ERRC(build_reference_set({}, 5), Errc::EmptyReferenceSet);
    CHECK_ERRC(build_reference_set({ProteinSeq("r0", "MK")}, 1), Errc::InvalidParameter);
    CHECK_ERRC(build_reference_set({ProteinSeq("r0", "MK"), ProteinSeq("r0", "MK")}, 2), Errc::DuplicateId);
}

TEST_CASE("shared k-mer counts use min multiplicities") {
    const auto set = build_reference_set({ProteinSeq("r0", "AAAA"), ProteinSeq("r1", "CCCC")}, 2);
    const auto shared = set.shared_kmer_counts(encode_residues("AAAAAA"));
    CHECK(shared[0] == 3);
    CHECK(shared[1] == 0);
}

TEST_CASE("max_identity of a member is 1.0") {
    std::mt19937_64 rng(3);
    const auto refs = random_refs(rng, 20, 30, 60);
    const auto set = build_reference_set(refs, 5);
    const AlignParams p;
    for (auto mode : {SearchMode::Exact, SearchMode::Prefiltered}) {
        const auto r = max_identity(refs[7], set, {mode, 4}, p);
        CHECK(r.max_id == 1.0);
        CHECK(r.nearest_ref_id == "r7");
        CHECK(r.exactness == (mode == SearchMode::Exact ? Exactness::Exact : Exactness::PrefilterApprox));
    }
}

TEST_CASE("Exact max_identity equals a linear traceback scan") {
    std::mt19937_64 rng(17);
    const AlignParams p;
    for (int round = 0; round < 4; ++round) {
        // Low-complexity alphabet produces identity ties between references.
        const std::string_view alphabet = round % 2 ? std::string_view("ACDEF") : kAminoAcids;
        const auto refs = random_refs(rng, 50, 10, 70, alphabet);
        const auto set = build_reference_set(refs, 3);
        for (int c = 0; c < 10; ++c) {
            const ProteinSeq cand("c", oracle::random_protein(rng, 40, alphabet));
            const auto got = max_identity(cand, set, {SearchMode::Exact, 0}, p);
            const auto [want, idx] = linear_scan(cand.residues(), refs, p);
            CHECK(got.max_id == want);
            CHECK(got.nearest_index == idx);
        }
    }
}

TEST_CASE("Prefiltered never exceeds Exact and equals it when top_m covers the set") {
    std::mt19937_64 rng(23);
    const AlignParams p;
    const auto refs = random_refs(rng, 40, 30, 80);
    const auto set = build_reference_set(refs, 3);
    for (int c = 0; c < 100; ++c) {
        std::string s = refs[c % refs.size()].residues();
        for (int m = 0; m < 10; ++m) {
            s[rng() % s.size()] = kAminoAcids[rng() % 20];
        }
        const ProteinSeq cand("c", s);
        const auto exact = max_identity(cand, set, {SearchMode::Exact, 0}, p);
        const auto full = max_identity(cand, set, {SearchMode::Prefiltered, refs.size()}, p);
        CHECK(full.max_id == exact.max_id);
        CHECK(full.nearest_index == exact.nearest_index);
        for (std::size_t top : {1u, 2u, 5u}) {
            CHECK(max_identity(cand, set, {SearchMode::Prefiltered, top}, p).max_id <= exact.max_id);
        }
    }
}

TEST_CASE("alignment_score normalizes by self-scores") {
    std::mt19937_64 rng(31);
    const auto refs = random_refs(rng, 5, 50, 80);
    const auto set = build_reference_set(refs, 5);
    const AlignParams p;
    CHECK(alignment_score(refs[2], set, "r2", 0.5, 0.5, p) == doctest::Approx(1.0));

    const ProteinSeq other("x", oracle::random_protein(rng, 60));
    const auto ca = encode_residues(other.residues());
    const auto cr = set.codes(1);
    const double norm_g = static_cast<double>(global_score(ca, cr, p)) / global_score(cr, cr, p);
    CHECK(alignment_score(other, set, "r1", 1.0, 0.0, p) == doctest::Approx(norm_g));
    CHECK_ERRC(alignment_score(other, set, "nope", 0.5, 0.5, p), Errc::UnknownReferenceId);
    CHECK_ERRC(alignment_score(other, set, "r1", 0.7, 0.7, p), Errc::InvalidParameter);
}
