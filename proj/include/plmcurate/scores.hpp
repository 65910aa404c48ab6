#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace plmc {

enum class ScoreKind { Plddt, Stability, Docking, Custom };
enum class Orientation { HigherIsBetter, LowerIsBetter };

std::string_view score_kind_name(ScoreKind kind) noexcept;
/// Throws InvalidParameter for an unknown name.
ScoreKind parse_score_kind(std::string_view name);
/// pLDDT and custom scores are higher-is-better; energies are lower-is-better.
Orientation default_orientation(ScoreKind kind) noexcept;

/// True when `score` is on the keeping side of `threshold` (inclusive).
inline bool meets_threshold(double score, double threshold, Orientation o) noexcept {
    return o == Orientation::HigherIsBetter ? score >= threshold : score <= threshold;
}

struct ScoreTable {
    ScoreKind kind = ScoreKind::Custom;
    Orientation orientation = Orientation::HigherIsBetter;
    std::map<std::string, double> entries;

    std::optional<double> find(std::string_view id) const;
    friend bool operator==(const ScoreTable&, const ScoreTable&) = default;
};

ScoreTable make_score_table(ScoreKind kind);

// Two-column TSV with an "id\tscore" header. pLDDT tables given on the
// 0-100 scale (any value > 1) are divided by 100.
ScoreTable parse_score_table(std::string_view text, ScoreKind kind);
ScoreTable load_score_table(const std::filesystem::path& path, ScoreKind kind);

/// Values are rendered with 4 decimals, so tables whose values carry at
/// most 4 decimals round-trip exactly.
std::string format_score_table(const ScoreTable& table);
void write_score_table(const ScoreTable& table, const std::filesystem::path& path);

/// Deterministic stand-in for an external scorer.
struct StubScorer {
    std::uint64_t seed = 0;
    double lo = 0.0;
    double hi = 1.0;
};

/// Pure function of (seed, id), uniform on [lo, hi).
double stub_score(const StubScorer& scorer, std::string_view id);
ScoreTable stub_table(const StubScorer& scorer, std::span<const std::string> ids, ScoreKind kind);

struct ScoreSummary {
    std::size_t count = 0;
    double mean = 0.0;
    double median = 0.0;
    double stddev = 0.0;  // population
    double min = 0.0;
    double max = 0.0;
};

ScoreSummary summarize(std::span<const double> values);
ScoreSummary summarize(const ScoreTable& table);

std::uint64_t splitmix64(std::uint64_t x) noexcept;
std::uint64_t fnv1a64(std::string_view s) noexcept;

}  // namespace plmc
