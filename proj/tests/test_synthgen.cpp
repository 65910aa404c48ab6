#include <cmath>
#include <random>

#include "doctest.h"
#include "oracles.hpp"
#include "plmcurate/reference_set.hpp"
#include "plmcurate/synthgen.hpp"
#include "test_util.hpp"

using namespace plmc;

namespace {

std::size_t hamming(const std::string& a, const std::string& b) {
    std::size_t d = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        d += a[i] != b[i];
    }
    return d;
}

}  // namespace

TEST_CASE("generate_reference_set construction") {
    ReferenceParams p;
    p.count = 1;
    p.length_mean = 20;
    p.length_sd = 0;
    p.active_site_pos = 5;
    const auto one = generate_reference_set(p, 1);
    REQUIRE(one.size() == 1);
    CHECK(one[0].residues()[0] == 'M');
    CHECK(one[0].residues()[4] == 'K');
    CHECK(one[0].size() == 20);

    ReferenceParams big;
    const auto a = generate_reference_set(big, 99);
    CHECK(a == generate_reference_set(big, 99));
    CHECK(a != generate_reference_set(big, 100));
    double sum = 0.0;
    for (const auto& r : a) {
        sum += static_cast<double>(r.size());
        REQUIRE(r.size() >= 248);
        REQUIRE(r.size() <= 479);
        REQUIRE(r.residues()[0] == 'M');
        REQUIRE(r.residues()[81] == 'K');
    }
    CHECK(std::abs(sum / 1000 - 363.6) < 5.0);

    // Independent members share only chance residues; family members share
    // about f^2 of the positions of their common prefix.
    const auto pair_identity = [](const ProteinSeq& x, const ProteinSeq& y) {
        const std::size_t n = std::min(x.size(), y.size());
        return 1.0 - static_cast<double>(hamming(x.residues().substr(0, n), y.residues().substr(0, n))) / n;
    };
    CHECK(pair_identity(a[0], a[1]) < 0.15);
    ReferenceParams fam = big;
    fam.count = 20;
    fam.family_identity = 0.85;
    const auto f = generate_reference_set(fam, 99);
    for (std::size_t i = 1; i < f.size(); ++i) {
        CHECK(std::abs(pair_identity(f[0], f[i]) - 0.85 * 0.85) < 0.08);
        CHECK(f[i].residues()[81] == 'K');
    }

    ReferenceParams bad = p;
    bad.active_site_pos = 21;
    CHECK_ERRC(generate_reference_set(bad, 1), Errc::InvalidParameter);
    bad = p;
    bad.count = 0;
    CHECK_ERRC(generate_reference_set(bad, 1), Errc::InvalidParameter);
    bad = p;
    bad.family_identity = 1.5;
    CHECK_ERRC(generate_reference_set(bad, 1), Errc::InvalidParameter);
}

TEST_CASE("mutate_to_identity substitutes an exact count away from protected sites") {
    std::mt19937_64 rng(8);
    const ProteinSeq ref("r", oracle::random_protein(rng, 100));
    const std::size_t protect[] = {0, 81};
    CHECK(mutate_to_identity(ref, 1.0, protect, 1) == ref);
    for (int trial = 0; trial < 50; ++trial) {
        const double target = 0.05 + 0.9 * (trial / 49.0);
        const auto m = mutate_to_identity(ref, target, protect, rng());
        CHECK(hamming(m.residues(), ref.residues()) == static_cast<std::size_t>(std::llround((1 - target) * 100)));
        CHECK(m.residues()[0] == ref.residues()[0]);
        CHECK(m.residues()[81] == ref.residues()[81]);
    }
    CHECK(hamming(mutate_to_identity(ref, 0.5, protect, 3).residues(), ref.residues()) == 50);

    const ProteinSeq tiny("t", "MKA");
    const std::size_t all[] = {0, 1};
    CHECK_ERRC(mutate_to_identity(tiny, 0.1, all, 1), Errc::TooManyMutationsForProtectedSet);
    CHECK_ERRC(mutate_to_identity(tiny, 0.0, all, 1), Errc::InvalidParameter);
    const std::size_t outside[] = {3};
    CHECK_ERRC(mutate_to_identity(tiny, 0.5, outside, 1), Errc::InvalidParameter);
}

TEST_CASE("mutants recover their identity target under Exact search") {
    const auto refs = generate_reference_set(ReferenceParams{}, 5);
    const AlignParams p;
    const std::size_t protect[] = {0, 81};
    for (double target : {0.45, 0.70, 0.95}) {
        for (int t = 0; t < 5; ++t) {
            const auto& r = refs[static_cast<std::size_t>(t)];
            const auto m = mutate_to_identity(r, target, protect, static_cast<std::uint64_t>(t * 31 + 7));
            const auto set = build_reference_set({r}, 5);
            const auto res = max_identity(m, set, {SearchMode::Exact, 0}, p);
            CHECK(std::abs(res.max_id - target) <= 0.02);
        }
    }
}

TEST_CASE("alignment score drops for a diverged mutant") {
    const auto refs = generate_reference_set(ReferenceParams{}, 6);
    const std::size_t protect[] = {0, 81};
    const auto m = mutate_to_identity(refs[0], 0.70, protect, 11);
    const auto set = build_reference_set({refs[0]}, 5);
    const AlignParams p;
    CHECK(alignment_score(refs[0], set, refs[0].id(), 0.5, 0.5, p) >
          alignment_score(m, set, refs[0].id(), 0.5, 0.5, p));
}

TEST_CASE("reverse translation inverts translation") {
    std::mt19937_64 rng(12);
    for (int i = 0; i < 300; ++i) {
        const ProteinSeq prot("p", oracle::random_protein(rng, 1 + rng() % 80));
        const auto dna = reverse_translate(prot, rng, i % 2 == 0);
        CHECK(dna.size() == 3 * (prot.size() + (i % 2 == 0 ? 1 : 0)));
        CHECK(translate(dna) == prot);
    }
}

TEST_CASE("delete_residues") {
    const ProteinSeq s("s", "MKWVAC");
    CHECK(delete_residues(s, 1, 2).residues() == "MVAC");
    CHECK_ERRC(delete_residues(s, 5, 2), Errc::InvalidParameter);
}

TEST_CASE("candidate pools carry consistent labels") {
    ReferenceParams rp;
    rp.count = 20;
    const auto refs = generate_reference_set(rp, 3);
    DefectProfile clean;
    const auto pool = generate_candidate_pool(refs, clean, 200, 7);
    REQUIRE(pool.candidates.size() == 200);
    REQUIRE(pool.labels.size() == 200);
    for (std::size_t i = 0; i < pool.candidates.size(); ++i) {
        const auto& c = pool.candidates[i];
        CHECK(c.id() == pool.labels[i].id);
        CHECK(c.bases().substr(0, 3) == "ATG");
        const auto prot = translate(c);
        CHECK(prot.size() >= 248);
        CHECK(prot.size() <= 479);
        CHECK(prot.residues()[81] == 'K');
    }
    const auto again = generate_candidate_pool(refs, clean, 200, 7);
    CHECK(again.candidates == pool.candidates);
    CHECK(again.labels == pool.labels);

    DefectProfile all_bad;
    all_bad.rate_bad_start = 1.0;
    all_bad.rate_bad_length = 1.0;
    all_bad.rate_mutated_active_site = 1.0;
    const auto bad = generate_candidate_pool(refs, all_bad, 100, 7);
    for (std::size_t i = 0; i < bad.candidates.size(); ++i) {
        const auto& c = bad.candidates[i];
        CHECK(c.bases().substr(0, 3) != "ATG");
        const auto prot = translate(c);
        CHECK(prot.residues()[0] != 'M');
        CHECK((prot.size() < 248 || prot.size() > 479));
        CHECK((prot.size() <= 81 || prot.residues()[81] != 'K'));
        CHECK(bad.labels[i].bad_start);
    }

    CHECK(parse_labels(format_labels(pool.labels)).size() == 200);
    auto round = parse_labels(format_labels(bad.labels));
    for (std::size_t i = 0; i < round.size(); ++i) {
        CHECK(round[i] == bad.labels[i]);
    }

    DefectProfile wrong;
    wrong.rate_bad_start = 1.5;
    CHECK_ERRC(generate_candidate_pool(refs, wrong, 1, 1), Errc::InvalidParameter);
    wrong = DefectProfile{};
    wrong.identity_targets = {{0.5, 0.3}};
    CHECK_ERRC(generate_candidate_pool(refs, wrong, 1, 1), Errc::InvalidParameter);
    CHECK(generate_candidate_pool(refs, clean, 0, 1).candidates.empty());
}
