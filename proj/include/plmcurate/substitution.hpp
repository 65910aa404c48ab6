#pragma once

#include <array>
#include <cstdint>
#include <string>

#include "plmcurate/seq.hpp"

namespace plmc {

/// 20x20 amino-acid substitution scores indexed by residue code.
class SubstitutionMatrix {
public:
    static SubstitutionMatrix blosum62();
    static SubstitutionMatrix simple(int match, int mismatch);

    int score(std::uint8_t a, std::uint8_t b) const noexcept { return scores_[a][b]; }
    int score(char a, char b) const;
    const std::string& name() const noexcept { return name_; }
    int max_abs() const noexcept;
    bool symmetric() const noexcept;

    friend bool operator==(const SubstitutionMatrix&, const SubstitutionMatrix&) = default;

private:
    std::string name_;
    std::array<std::array<int, kNumAminoAcids>, kNumAminoAcids> scores_{};
};

}  // namespace plmc
