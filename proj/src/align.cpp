#include "plmcurate/align.hpp"

#include <algorithm>
#include <climits>

#include "plmcurate/error.hpp"

namespace plmc {

namespace {

constexpr int kNeg = INT_MIN / 4;

enum State : std::uint8_t { kM = 0, kX = 1, kY = 2, kStart = 3 };

// Picks the best of three candidates; earlier arguments win ties.
struct Pick {
    int value;
    std::uint8_t from;
};

inline Pick best_of(int m, int x, int y) {
    Pick p{m, kM};
    if (x > p.value) p = {x, kX};
    if (y > p.value) p = {y, kY};
    return p;
}

// Predecessor pointers, one byte per cell: bits 0-1 M, 2-3 X, 4-5 Y.
class TraceMatrix {
public:
    TraceMatrix(std::size_t rows, std::size_t cols) : cols_(cols), cells_(rows * cols, 0) {}

    void set(std::size_t i, std::size_t j, std::uint8_t m, std::uint8_t x, std::uint8_t y) {
        cells_[i * cols_ + j] = static_cast<std::uint8_t>(m | (x << 2) | (y << 4));
    }
    std::uint8_t from(std::size_t i, std::size_t j, std::uint8_t state) const {
        return (cells_[i * cols_ + j] >> (2 * state)) & 3u;
    }

private:
    std::size_t cols_;
    std::vector<std::uint8_t> cells_;
};

void require_non_empty(const ProteinSeq& a, const ProteinSeq& b) {
    if (a.residues().empty() || b.residues().empty()) {
        throw Error(Errc::EmptySequence, "alignment inputs must be non-empty");
    }
}

void require_non_empty(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
    if (a.empty() || b.empty()) {
        throw Error(Errc::EmptySequence, "alignment inputs must be non-empty");
    }
}

}  // namespace

void AlignParams::validate() const {
    if (!(gap_open <= gap_extend && gap_extend <= 0)) {
        throw Error(Errc::InvalidParameter, "gap penalties must satisfy gap_open <= gap_extend <= 0");
    }
    if (!matrix.symmetric()) {
        throw Error(Errc::InvalidParameter, "substitution matrix '" + matrix.name() + "' is not symmetric");
    }
}

Alignment global_align(const ProteinSeq& a, const ProteinSeq& b, const AlignParams& p) {
    require_non_empty(a, b);
    const auto ca = encode_residues(a.residues());
    const auto cb = encode_residues(b.residues());
    const std::size_t n = ca.size();
    const std::size_t m = cb.size();
    const int open = p.gap_open;
    const int ext = p.gap_extend;

    TraceMatrix trace(n + 1, m + 1);
    std::vector<int> pm(m + 1), px(m + 1), py(m + 1);
    std::vector<int> cm(m + 1), cx(m + 1), cy(m + 1);

    pm[0] = 0;
    px[0] = kNeg;
    py[0] = kNeg;
    for (std::size_t j = 1; j <= m; ++j) {
        pm[j] = kNeg;
        px[j] = kNeg;
        py[j] = j == 1 ? open : py[j - 1] + ext;
        trace.set(0, j, kM, kM, j == 1 ? kM : kY);
    }

    for (std::size_t i = 1; i <= n; ++i) {
        cm[0] = kNeg;
        cy[0] = kNeg;
        cx[0] = i == 1 ? open : px[0] + ext;
        trace.set(i, 0, kM, i == 1 ? kM : kX, kM);
        for (std::size_t j = 1; j <= m; ++j) {
            const Pick d = best_of(pm[j - 1], px[j - 1], py[j - 1]);
            const Pick u = best_of(pm[j] + open, px[j] + ext, py[j] + open);
            const Pick l = best_of(cm[j - 1] + open, cx[j - 1] + open, cy[j - 1] + ext);
            cm[j] = d.value + p.matrix.score(ca[i - 1], cb[j - 1]);
            cx[j] = u.value;
            cy[j] = l.value;
            trace.set(i, j, d.from, u.from, l.from);
        }
        std::swap(pm, cm);
        std::swap(px, cx);
        std::swap(py, cy);
    }

    const Pick end = best_of(pm[m], px[m], py[m]);
    Alignment aln;
    aln.kind = AlignKind::Global;
    aln.score = end.value;
    aln.span_a = {0, n};
    aln.span_b = {0, m};

    std::size_t i = n;
    std::size_t j = m;
    std::uint8_t state = end.from;
    const std::string& ra = a.residues();
    const std::string& rb = b.residues();
    while (i > 0 || j > 0) {
        const std::uint8_t prev = trace.from(i, j, state);
        if (state == kM) {
            aln.aligned_a.push_back(ra[i - 1]);
            aln.aligned_b.push_back(rb[j - 1]);
            --i;
            --j;
        } else if (state == kX) {
            aln.aligned_a.push_back(ra[i - 1]);
            aln.aligned_b.push_back('-');
            --i;
        } else {
            aln.aligned_a.push_back('-');
            aln.aligned_b.push_back(rb[j - 1]);
            --j;
        }
        state = prev;
    }
    std::reverse(aln.aligned_a.begin(), aln.aligned_a.end());
    std::reverse(aln.aligned_b.begin(), aln.aligned_b.end());
    return aln;
}

Alignment local_align(const ProteinSeq& a, const ProteinSeq& b, const AlignParams& p) {
    require_non_empty(a, b);
    const auto ca = encode_residues(a.residues());
    const auto cb = encode_residues(b.residues());
    const std::size_t n = ca.size();
    const std::size_t m = cb.size();
    const int open = p.gap_open;
    const int ext = p.gap_extend;

    TraceMatrix trace(n + 1, m + 1);
    std::vector<int> pm(m + 1, kNeg), px(m + 1, kNeg), py(m + 1, kNeg);
    std::vector<int> cm(m + 1, kNeg), cx(m + 1, kNeg), cy(m + 1, kNeg);

    int best = 0;
    std::size_t best_i = 0;
    std::size_t best_j = 0;
    for (std::size_t i = 1; i <= n; ++i) {
        cm[0] = cx[0] = cy[0] = kNeg;
        for (std::size_t j = 1; j <= m; ++j) {
            Pick d = best_of(pm[j - 1], px[j - 1], py[j - 1]);
            if (d.value <= 0) {
                d = {0, kStart};
            }
            const Pick u = best_of(pm[j] + open, px[j] + ext, py[j] + open);
            const Pick l = best_of(cm[j - 1] + open, cx[j - 1] + open, cy[j - 1] + ext);
            cm[j] = d.value + p.matrix.score(ca[i - 1], cb[j - 1]);
            cx[j] = u.value;
            cy[j] = l.value;
            trace.set(i, j, d.from, u.from, l.from);
            if (cm[j] > best) {
                best = cm[j];
                best_i = i;
                best_j = j;
            }
        }
        std::swap(pm, cm);
        std::swap(px, cx);
        std::swap(py, cy);
    }

    Alignment aln;
    aln.kind = AlignKind::Local;
    aln.score = best;
    if (best <= 0) {
        return aln;
    }

    std::size_t i = best_i;
    std::size_t j = best_j;
    std::uint8_t state = kM;
    const std::string& ra = a.residues();
    const std::string& rb = b.residues();
    while (state != kStart) {
        const std::uint8_t prev = trace.from(i, j, state);
        if (state == kM) {
            aln.aligned_a.push_back(ra[i - 1]);
            aln.aligned_b.push_back(rb[j - 1]);
            --i;
            --j;
        } else if (state == kX) {
            aln.aligned_a.push_back(ra[i - 1]);
            aln.aligned_b.push_back('-');
            --i;
        } else {
            aln.aligned_a.push_back('-');
            aln.aligned_b.push_back(rb[j - 1]);
            --j;
        }
        state = prev;
    }
    std::reverse(aln.aligned_a.begin(), aln.aligned_a.end());
    std::reverse(aln.aligned_b.begin(), aln.aligned_b.end());
    aln.span_a = {i, best_i};
    aln.span_b = {j, best_j};
    return aln;
}

double percent_identity(const Alignment& aln) {
    if (aln.kind != AlignKind::Global) {
        throw Error(Errc::WrongAlignmentKind, "percent identity is defined on global alignments");
    }
    if (aln.aligned_a.empty()) {
        return 0.0;
    }
    std::size_t same = 0;
    for (std::size_t k = 0; k < aln.aligned_a.size(); ++k) {
        if (aln.aligned_a[k] != '-' && aln.aligned_a[k] == aln.aligned_b[k]) {
            ++same;
        }
    }
    return static_cast<double>(same) / static_cast<double>(aln.aligned_a.size());
}

int global_score(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const AlignParams& p) {
    require_non_empty(a, b);
    const std::size_t m = b.size();
    const int open = p.gap_open;
    const int ext = p.gap_extend;
    std::vector<int> vm(m + 1), vx(m + 1), vy(m + 1);
    vm[0] = 0;
    vx[0] = vy[0] = kNeg;
    for (std::size_t j = 1; j <= m; ++j) {
        vm[j] = kNeg;
        vx[j] = kNeg;
        vy[j] = j == 1 ? open : vy[j - 1] + ext;
    }
    for (std::size_t i = 1; i <= a.size(); ++i) {
        int dm = vm[0], dx = vx[0], dy = vy[0];
        vm[0] = kNeg;
        vy[0] = kNeg;
        vx[0] = i == 1 ? open : vx[0] + ext;
        int lm = vm[0], lx = vx[0], ly = vy[0];
        for (std::size_t j = 1; j <= m; ++j) {
            const int um = vm[j], ux = vx[j], uy = vy[j];
            const int nm = std::max({dm, dx, dy}) + p.matrix.score(a[i - 1], b[j - 1]);
            const int nx = std::max({um + open, ux + ext, uy + open});
            const int ny = std::max({lm + open, lx + open, ly + ext});
            dm = um;
            dx = ux;
            dy = uy;
            vm[j] = lm = nm;
            vx[j] = lx = nx;
            vy[j] = ly = ny;
        }
    }
    return std::max({vm[m], vx[m], vy[m]});
}

int local_score(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b, const AlignParams& p) {
    require_non_empty(a, b);
    const std::size_t m = b.size();
    const int open = p.gap_open;
    const int ext = p.gap_extend;
    std::vector<int> vm(m + 1, kNeg), vx(m + 1, kNeg), vy(m + 1, kNeg);
    int best = 0;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        int dm = vm[0], dx = vx[0], dy = vy[0];
        int lm = kNeg, lx = kNeg, ly = kNeg;
        for (std::size_t j = 1; j <= m; ++j) {
            const int um = vm[j], ux = vx[j], uy = vy[j];
            const int nm = std::max({0, dm, dx, dy}) + p.matrix.score(a[i - 1], b[j - 1]);
            const int nx = std::max({um + open, ux + ext, uy + open});
            const int ny = std::max({lm + open, lx + open, ly + ext});
            best = std::max(best, nm);
            dm = um;
            dx = ux;
            dy = uy;
            vm[j] = lm = nm;
            vx[j] = lx = nx;
            vy[j] = ly = ny;
        }
    }
    return best;
}

}  // namespace plmc
