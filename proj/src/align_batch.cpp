// Inter-sequence batch kernel: one query against W targets at once, one
// target per lane. The per-lane recurrence and tie rules are identical to
// global_align, and each state carries the (matches, diagonal columns)
// counts of the path its traceback pointer would select, so the identity of
// the traced alignment falls out of the forward pass.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>

#include "plmcurate/align.hpp"
#include "plmcurate/error.hpp"

namespace plmc {

namespace {

template <typename T, int W>
class LaneKernel {
public:
    static constexpr T kNeg = std::numeric_limits<T>::min() / 2;

    LaneKernel(const AlignParams& p) : params_(p) {}

    // targets.size() <= W; out receives one result per target.
    void run(std::span<const std::uint8_t> query, std::span<const std::span<const std::uint8_t>> targets,
             IdentityCount* out) {
        const int lanes = static_cast<int>(targets.size());
        std::size_t maxlen = 0;
        for (const auto& t : targets) {
            maxlen = std::max(maxlen, t.size());
        }
        const std::size_t cols = maxlen + 1;
        prepare(targets, maxlen);

        const T open = static_cast<T>(params_.gap_open);
        const T ext = static_cast<T>(params_.gap_extend);

        // Row 0.
        for (std::size_t j = 0; j < cols; ++j) {
            for (int l = 0; l < W; ++l) {
                const std::size_t k = j * W + l;
                sm_[k] = j == 0 ? T(0) : kNeg;
                sx_[k] = kNeg;
                sy_[k] = j == 0 ? kNeg : static_cast<T>(params_.gap_open + (static_cast<int>(j) - 1) * params_.gap_extend);
                mm_[k] = dm_[k] = mx_[k] = dx_[k] = my_[k] = dy_[k] = 0;
            }
        }

        alignas(64) T dM[W], dX[W], dY[W], dMm[W], dMd[W], dXm[W], dXd[W], dYm[W], dYd[W];
        alignas(64) T lM[W], lX[W], lY[W], lMm[W], lMd[W], lXm[W], lXd[W], lYm[W], lYd[W];

        for (std::size_t i = 1; i <= query.size(); ++i) {
            const std::uint8_t qa = query[i - 1];
            const T* prof = profile_.data() + static_cast<std::size_t>(qa) * maxlen * W;
            const T* eqrow = equal_.data() + static_cast<std::size_t>(qa) * maxlen * W;
            const T col0_x = static_cast<T>(params_.gap_open + (static_cast<int>(i) - 1) * params_.gap_extend);

            for (int l = 0; l < W; ++l) {
                dM[l] = sm_[l]; dX[l] = sx_[l]; dY[l] = sy_[l];
                dMm[l] = mm_[l]; dMd[l] = dm_[l];
                dXm[l] = mx_[l]; dXd[l] = dx_[l];
                dYm[l] = my_[l]; dYd[l] = dy_[l];
                sm_[l] = kNeg; sx_[l] = col0_x; sy_[l] = kNeg;
                mm_[l] = dm_[l] = mx_[l] = dx_[l] = my_[l] = dy_[l] = 0;
                lM[l] = kNeg; lX[l] = col0_x; lY[l] = kNeg;
                lMm[l] = lMd[l] = lXm[l] = lXd[l] = lYm[l] = lYd[l] = 0;
            }

            for (std::size_t j = 1; j < cols; ++j) {
                T* SM = sm_.data() + j * W;
                T* SX = sx_.data() + j * W;
                T* SY = sy_.data() + j * W;
                T* MM = mm_.data() + j * W;
                T* DM = dm_.data() + j * W;
                T* MX = mx_.data() + j * W;
                T* DX = dx_.data() + j * W;
                T* MY = my_.data() + j * W;
                T* DY = dy_.data() + j * W;
                const T* sub = prof + (j - 1) * W;
                const T* eq = eqrow + (j - 1) * W;
#if defined(__GNUC__)
#pragma GCC ivdep
#endif
                for (int l = 0; l < W; ++l) {
                    // Diagonal predecessor, preference M > X > Y.
                    T t = dM[l], tm = dMm[l], td = dMd[l];
                    bool c = dX[l] > t;
                    t = c ? dX[l] : t; tm = c ? dXm[l] : tm; td = c ? dXd[l] : td;
                    c = dY[l] > t;
                    t = c ? dY[l] : t; tm = c ? dYm[l] : tm; td = c ? dYd[l] : td;
                    const T nM = static_cast<T>(t + sub[l]);
                    const T nMm = static_cast<T>(tm + eq[l]);
                    const T nMd = static_cast<T>(td + 1);

                    // Up (consumes query), preference M > X > Y.
                    const T uM = SM[l], uX = SX[l], uY = SY[l];
                    const T uMm = MM[l], uMd = DM[l], uXm = MX[l], uXd = DX[l], uYm = MY[l], uYd = DY[l];
                    t = static_cast<T>(uM + open); tm = uMm; td = uMd;
                    T v = static_cast<T>(uX + ext);
                    c = v > t;
                    t = c ? v : t; tm = c ? uXm : tm; td = c ? uXd : td;
                    v = static_cast<T>(uY + open);
                    c = v > t;
                    t = c ? v : t; tm = c ? uYm : tm; td = c ? uYd : td;
                    const T nX = t, nXm = tm, nXd = td;

                    // Left (consumes target), preference M > X > Y.
                    t = static_cast<T>(lM[l] + open); tm = lMm[l]; td = lMd[l];
                    v = static_cast<T>(lX[l] + open);
                    c = v > t;
                    t = c ? v : t; tm = c ? lXm[l] : tm; td = c ? lXd[l] : td;
                    v = static_cast<T>(lY[l] + ext);
                    c = v > t;
                    t = c ? v : t; tm = c ? lYm[l] : tm; td = c ? lYd[l] : td;
                    const T nY = t, nYm = tm, nYd = td;

                    dM[l] = uM; dX[l] = uX; dY[l] = uY;
                    dMm[l] = uMm; dMd[l] = uMd; dXm[l] = uXm; dXd[l] = uXd; dYm[l] = uYm; dYd[l] = uYd;

                    SM[l] = lM[l] = nM; MM[l] = lMm[l] = nMm; DM[l] = lMd[l] = nMd;
                    SX[l] = lX[l] = nX; MX[l] = lXm[l] = nXm; DX[l] = lXd[l] = nXd;
                    SY[l] = lY[l] = nY; MY[l] = lYm[l] = nYm; DY[l] = lYd[l] = nYd;
                }
            }
        }

        const std::size_t n = query.size();
        for (int l = 0; l < lanes; ++l) {
            const std::size_t k = targets[l].size() * W + l;
            int score = sm_[k];
            int matches = mm_[k];
            int diags = dm_[k];
            if (sx_[k] > score) {
                score = sx_[k];
                matches = mx_[k];
                diags = dx_[k];
            }
            if (sy_[k] > score) {
                score = sy_[k];
                matches = my_[k];
                diags = dy_[k];
            }
            out[l].score = score;
            out[l].matches = static_cast<std::uint32_t>(matches);
            out[l].columns = static_cast<std::uint32_t>(n + targets[l].size() - static_cast<std::size_t>(diags));
        }
    }

private:
    void prepare(std::span<const std::span<const std::uint8_t>> targets, std::size_t maxlen) {
        const std::size_t cols = maxlen + 1;
        codes_.assign(maxlen * W, 0);
        for (std::size_t l = 0; l < targets.size(); ++l) {
            const auto& t = targets[l];
            for (std::size_t j = 0; j < t.size(); ++j) {
                codes_[j * W + l] = t[j];
            }
        }
        profile_.resize(static_cast<std::size_t>(kNumAminoAcids) * maxlen * W);
        equal_.resize(profile_.size());
        for (int a = 0; a < kNumAminoAcids; ++a) {
            T* row = profile_.data() + static_cast<std::size_t>(a) * maxlen * W;
            T* eq = equal_.data() + static_cast<std::size_t>(a) * maxlen * W;
            for (std::size_t k = 0; k < maxlen * W; ++k) {
                row[k] = static_cast<T>(params_.matrix.score(static_cast<std::uint8_t>(a), codes_[k]));
                eq[k] = codes_[k] == a ? T(1) : T(0);
            }
        }
        for (auto* v : {&sm_, &sx_, &sy_, &mm_, &dm_, &mx_, &dx_, &my_, &dy_}) {
            v->resize(cols * W);
        }
    }

    const AlignParams& params_;
    std::vector<std::uint8_t> codes_;
    std::vector<T> profile_;
    std::vector<T> equal_;  // 1 where the target residue equals the row's residue
    std::vector<T> sm_, sx_, sy_, mm_, dm_, mx_, dx_, my_, dy_;
};

template <typename T, int W>
void run_lanes(std::span<const std::uint8_t> query, std::span<const std::span<const std::uint8_t>> targets,
               const std::vector<std::size_t>& order, const AlignParams& p, std::vector<IdentityCount>& out) {
    LaneKernel<T, W> kernel(p);
    std::vector<std::span<const std::uint8_t>> group;
    IdentityCount results[W];
    for (std::size_t start = 0; start < order.size(); start += W) {
        const std::size_t stop = std::min(order.size(), start + W);
        group.clear();
        for (std::size_t k = start; k < stop; ++k) {
            group.push_back(targets[order[k]]);
        }
        kernel.run(query, group, results);
        for (std::size_t k = start; k < stop; ++k) {
            out[order[k]] = results[k - start];
        }
    }
}

int magnitude_bound(const AlignParams& p) {
    return std::max({p.matrix.max_abs(), std::abs(p.gap_open), std::abs(p.gap_extend), 1});
}

}  // namespace

IdentityCount global_identity(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b,
                              const AlignParams& p) {
    if (a.empty() || b.empty()) {
        throw Error(Errc::EmptySequence, "alignment inputs must be non-empty");
    }
    const std::span<const std::uint8_t> targets[1] = {b};
    IdentityCount out;
    LaneKernel<std::int32_t, 1> kernel(p);
    kernel.run(a, targets, &out);
    return out;
}

std::vector<IdentityCount> global_identity_many(std::span<const std::uint8_t> query,
                                                std::span<const std::span<const std::uint8_t>> targets,
                                                const AlignParams& p) {
    std::vector<IdentityCount> out(targets.size());
    if (targets.empty()) {
        return out;
    }
    if (query.empty()) {
        throw Error(Errc::EmptySequence, "alignment inputs must be non-empty");
    }
    std::size_t maxlen = 0;
    for (const auto& t : targets) {
        if (t.empty()) {
            throw Error(Errc::EmptySequence, "alignment inputs must be non-empty");
        }
        maxlen = std::max(maxlen, t.size());
    }

    // Group targets of similar length so lanes waste little padding.
    std::vector<std::size_t> order(targets.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return targets[x].size() < targets[y].size(); });

    const long long bound = static_cast<long long>(query.size() + maxlen + 2) * magnitude_bound(p);
    if (bound < 15000) {
        run_lanes<std::int16_t, 32>(query, targets, order, p, out);
    } else {
        run_lanes<std::int32_t, 16>(query, targets, order, p, out);
    }
    return out;
}

}  // namespace plmc
