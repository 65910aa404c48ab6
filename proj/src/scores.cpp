#include "plmcurate/scores.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>

#include "plmcurate/error.hpp"
#include "plmcurate/fasta.hpp"

namespace plmc {

namespace {

std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v)) {
        return std::nullopt;
    }
    return v;
}

}  // namespace

std::string_view score_kind_name(ScoreKind kind) noexcept {
    switch (kind) {
        case ScoreKind::Plddt: return "plddt";
        case ScoreKind::Stability: return "stability";
        case ScoreKind::Docking: return "docking";
        case ScoreKind::Custom: return "custom";
    }
    return "custom";
}

ScoreKind parse_score_kind(std::string_view name) {
    for (auto k : {ScoreKind::Plddt, ScoreKind::Stability, ScoreKind::Docking, ScoreKind::Custom}) {
        if (score_kind_name(k) == name) {
            return k;
        }
    }
    throw Error(Errc::InvalidParameter, "unknown score kind '" + std::string(name) + "'");
}

Orientation default_orientation(ScoreKind kind) noexcept {
    return kind == ScoreKind::Stability || kind == ScoreKind::Docking ? Orientation::LowerIsBetter
                                                                      : Orientation::HigherIsBetter;
}

std::optional<double> ScoreTable::find(std::string_view id) const {
    auto it = entries.find(std::string(id));
    if (it == entries.end()) {
        return std::nullopt;
    }
    return it->second;
}

ScoreTable make_score_table(ScoreKind kind) {
    ScoreTable t;
    t.kind = kind;
    t.orientation = default_orientation(kind);
    return t;
}

ScoreTable parse_score_table(std::string_view text, ScoreKind kind) {
    ScoreTable table = make_score_table(kind);
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) {
            nl = text.size();
        }
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') {
            line.remove_suffix(1);
        }
        if (line.empty()) {
            continue;
        }
        const std::size_t tab = line.find('\t');
        const std::string_view id = line.substr(0, tab);
        const std::string_view value = tab == std::string_view::npos ? std::string_view{} : line.substr(tab + 1);
        if (line_no == 1 && id == "id" && value == "score") {
            continue;
        }
        const auto v = parse_double(value);
        if (tab == std::string_view::npos || id.empty() || !v) {
            throw Error(Errc::NonNumericScore,
                        "line " + std::to_string(line_no) + ": expected 'id<TAB>number', got '" + std::string(line) + "'");
        }
        if (!table.entries.emplace(std::string(id), *v).second) {
            throw Error(Errc::DuplicateId, "score id '" + std::string(id) + "' appears more than once");
        }
    }
    if (table.entries.empty()) {
        throw Error(Errc::EmptyTable, "score table has no rows");
    }
    if (kind == ScoreKind::Plddt) {
        bool percent = false;
        for (const auto& [id, v] : table.entries) {
            if (v < 0.0 || v > 100.0) {
                throw Error(Errc::ScoreOutOfRange, "pLDDT for '" + id + "' outside [0, 100]");
            }
            percent = percent || v > 1.0;
        }
        if (percent) {
            for (auto& [id, v] : table.entries) {
                v /= 100.0;
            }
        }
    }
    return table;
}

ScoreTable load_score_table(const std::filesystem::path& path, ScoreKind kind) {
    return parse_score_table(read_file(path), kind);
}

std::string format_score_table(const ScoreTable& table) {
    std::string out = "id\tscore\n";
    char buf[64];
    for (const auto& [id, v] : table.entries) {
        std::snprintf(buf, sizeof buf, "%.4f", v);
        out += id;
        out += '\t';
        out += buf;
        out += '\n';
    }
    return out;
}

void write_score_table(const ScoreTable& table, const std::filesystem::path& path) {
    write_file(path, format_score_table(table));
}

std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

std::uint64_t fnv1a64(std::string_view s) noexcept {
    std::uint64_t h = 0xCBF29CE484222325ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001B3ull;
    }
    return h;
}

double stub_score(const StubScorer& scorer, std::string_view id) {
    const double u = static_cast<double>(splitmix64(scorer.seed ^ fnv1a64(id)) >> 11) * 0x1.0p-53;
    return scorer.lo + (scorer.hi - scorer.lo) * u;
}

ScoreTable stub_table(const StubScorer& scorer, std::span<const std::string> ids, ScoreKind kind) {
    ScoreTable t = make_score_table(kind);
    for (const auto& id : ids) {
        t.entries[id] = stub_score(scorer, id);
    }
    return t;
}

ScoreSummary summarize(std::span<const double> values) {
    if (values.empty()) {
        throw Error(Errc::EmptyTable, "cannot summarize an empty table");
    }
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    ScoreSummary s;
    s.count = v.size();
    s.min = v.front();
    s.max = v.back();
    const std::size_t mid = v.size() / 2;
    s.median = v.size() % 2 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
    double sum = 0.0;
    for (double x : v) {
        sum += x;
    }
    s.mean = sum / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) {
        ss += (x - s.mean) * (x - s.mean);
    }
    s.stddev = std::sqrt(ss / static_cast<double>(v.size()));
    return s;
}

ScoreSummary summarize(const ScoreTable& table) {
    std::vector<double> v;
    v.reserve(table.entries.size());
    for (const auto& [id, x] : table.entries) {
        v.push_back(x);
    }
    return summarize(v);
}

}  // namespace plmc
