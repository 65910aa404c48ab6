#include "plmcurate/substitution.hpp"

#include <algorithm>
#include <cstdlib>

#include "plmcurate/error.hpp"

namespace plmc {

namespace {

// NCBI BLOSUM62, rows and columns in ARNDCQEGHILKMFPSTWYV order.
constexpr int kBlosum62[kNumAminoAcids][kNumAminoAcids] = {
    { 4, -1, -2, -2,  0, -1, -1,  0, -2, -1, -1, -1, -1, -2, -1,  1,  0, -3, -2,  0},
    {-1,  5,  0, -2, -3,  1,  0, -2,  0, -3, -2,  2, -1, -3, -2, -1, -1, -3, -2, -3},
    {-2,  0,  6,  1, -3,  0,  0,  0,  1, -3, -3,  0, -2, -3, -2,  1,  0, -4, -2, -3},
    {-2, -2,  1,  6, -3,  0,  2, -1, -1, -3, -4, -1, -3, -3, -1,  0, -1, -4, -3, -3},
    { 0, -3, -3, -3,  9, -3, -4, -3, -3, -1, -1, -3, -1, -2, -3, -1, -1, -2, -2, -1},
    {-1,  1,  0,  0, -3,  5,  2, -2,  0, -3, -2,  1,  0, -3, -1,  0, -1, -2, -1, -2},
    {-1,  0,  0,  2, -4,  2,  5, -2,  0, -3, -3,  1, -2, -3, -1,  0, -1, -3, -2, -2},
    { 0, -2,  0, -1, -3, -2, -2,  6, -2, -4, -4, -2, -3, -3, -2,  0, -2, -2, -3, -3},
    {-2,  0,  1, -1, -3,  0,  0, -2,  8, -3, -3, -1, -2, -1, -2, -1, -2, -2,  2, -3},
    {-1, -3, -3, -3, -1, -3, -3, -4, -3,  4,  2, -3,  1,  0, -3, -2, -1, -3, -1,  3},
    {-1, -2, -3, -4, -1, -2, -3, -4, -3,  2,  4, -2,  2,  0, -3, -2, -1, -2, -1,  1},
    {-1,  2,  0, -1, -3,  1,  1, -2, -1, -3, -2,  5, -1, -3, -1,  0, -1, -3, -2, -2},
    {-1, -1, -2, -3, -1,  0, -2, -3, -2,  1,  2, -1,  5,  0, -2, -1, -1, -1, -1,  1},
    {-2, -3, -3, -3, -2, -3, -3, -3, -1,  0,  0, -3,  0,  6, -4, -2, -2,  1,  3, -1},
    {-1, -2, -2, -1, -3, -1, -1, -2, -2, -3, -3, -1, -2, -4,  7, -1, -1, -4, -3, -2},
    { 1, -1,  1,  0, -1,  0,  0,  0, -1, -2, -2,  0, -1, -2, -1,  4,  1, -3, -2, -2},
    { 0, -1,  0, -1, -1, -1, -1, -2, -2, -1, -1, -1, -1, -2, -1,  1,  5, -2, -2,  0},
    {-3, -3, -4, -4, -2, -2, -3, -2, -2, -3, -2, -3, -1,  1, -4, -3, -2, 11,  2, -3},
    {-2, -2, -2, -3, -2, -1, -2, -3,  2, -1, -1, -2, -1,  3, -3, -2, -2,  2,  7, -1},
    { 0, -3, -3, -3, -1, -2, -2, -3, -3,  3,  1, -2,  1, -1, -2, -2,  0, -3, -1,  4},
};

}  // namespace

SubstitutionMatrix SubstitutionMatrix::blosum62() {
    SubstitutionMatrix m;
    m.name_ = "blosum62";
    for (int i = 0; i < kNumAminoAcids; ++i) {
        for (int j = 0; j < kNumAminoAcids; ++j) {
            m.scores_[i][j] = kBlosum62[i][j];
        }
    }
    return m;
}

SubstitutionMatrix SubstitutionMatrix::simple(int match, int mismatch) {
    SubstitutionMatrix m;
    m.name_ = "simple(" + std::to_string(match) + "," + std::to_string(mismatch) + ")";
    for (int i = 0; i < kNumAminoAcids; ++i) {
        for (int j = 0; j < kNumAminoAcids; ++j) {
            m.scores_[i][j] = i == j ? match : mismatch;
        }
    }
    return m;
}

int SubstitutionMatrix::score(char a, char b) const {
    const int ca = residue_code(a);
    const int cb = residue_code(b);
    if (ca < 0 || cb < 0) {
        throw Error(Errc::InvalidSequence, "no substitution score for '" + std::string{a, b} + "'");
    }
    return scores_[ca][cb];
}

int SubstitutionMatrix::max_abs() const noexcept {
    int m = 0;
    for (const auto& row : scores_) {
        for (int s : row) {
            m = std::max(m, std::abs(s));
        }
    }
    return m;
}

bool SubstitutionMatrix::symmetric() const noexcept {
    for (int i = 0; i < kNumAminoAcids; ++i) {
        for (int j = 0; j < i; ++j) {
            if (scores_[i][j] != scores_[j][i]) {
                return false;
            }
        }
    }
    return true;
}

}  // namespace plmc
