#include <algorithm>
#include <cmath>
#include <queue>

#include "polyscat/errors.hpp"
#include "polyscat/scene.hpp"

namespace polyscat {
namespace {

constexpr int max_grid_cells_per_side = 4096;

class DistanceGrid {
public:
    DistanceGrid(const Scatterer2D &s, double span, double pitch_target) {
        n_ = static_cast<int>(std::ceil(2.0 * span / pitch_target));
        if (n_ > max_grid_cells_per_side)
            throw ParameterError("exterior connectedness grid too fine: span/t ratio exceeds the grid budget");
        pitch_ = 2.0 * span / n_;
        origin_ = -span + 0.5 * pitch_;
        dist_.assign(std::size_t(n_) * n_, -1.0);
        for (int j = 0; j < n_; ++j) {
            for (int i = 0; i < n_; ++i) {
                const Vec2 c{origin_ + i * pitch_, origin_ + j * pitch_};
                if (norm(c) > span) continue;
                dist_[idx(i, j)] = s.empty() ? std::numeric_limits<double>::infinity() : s.distance(c);
            }
        }
    }

    double pitch() const { return pitch_; }

    /// Whether every cell with distance >= t lies in one 4-connected component of {distance >= s}.
    bool targets_connected(double s, double t) const {
        std::vector<int> label(dist_.size(), -1);
        int target_label = -1;
        std::queue<std::size_t> q;
        for (std::size_t start = 0; start < dist_.size(); ++start) {
            if (dist_[start] < t || label[start] >= 0) continue;
            if (target_label >= 0) return false;  // a target outside the first component
            target_label = int(start);
            label[start] = target_label;
            q.push(start);
            while (!q.empty()) {
                const std::size_t c = q.front();
                q.pop();
                const int i = int(c % n_), j = int(c / n_);
                const int di[4] = {1, -1, 0, 0}, dj[4] = {0, 0, 1, -1};
                for (int k = 0; k < 4; ++k) {
                    const int ii = i + di[k], jj = j + dj[k];
                    if (ii < 0 || jj < 0 || ii >= n_ || jj >= n_) continue;
                    const std::size_t nb = idx(ii, jj);
                    if (label[nb] >= 0 || dist_[nb] < s) continue;
                    label[nb] = target_label;
                    q.push(nb);
                }
            }
        }
        return true;
    }

    double delta(double t) const {
        if (targets_connected(t, t)) return t;
        // Largest corridor width on the pitch lattice; the predicate is monotone in s.
        int lo = 0, hi = static_cast<int>(std::floor(t / pitch_));
        if (hi * pitch_ >= t) --hi;
        while (lo < hi) {
            const int mid = (lo + hi + 1) / 2;
            if (targets_connected(mid * pitch_, t)) lo = mid;
            else hi = mid - 1;
        }
        return lo * pitch_;
    }

private:
    std::size_t idx(int i, int j) const { return std::size_t(j) * n_ + i; }

    int n_ = 0;
    double pitch_ = 0.0;
    double origin_ = 0.0;
    std::vector<double> dist_;  // -1 outside the span disc
};

}  // namespace

double exterior_connectedness(const Scatterer2D &s, double t, double span) {
    const double ts[] = {t};
    return connectedness_profile(s, ts, span).samples.front().delta;
}

ConnectednessProfile connectedness_profile(const Scatterer2D &s, std::span<const double> ts, double span) {
    if (ts.empty()) throw ParameterError("connectedness profile needs at least one t");
    const double tmin = *std::min_element(ts.begin(), ts.end());
    const double tmax = *std::max_element(ts.begin(), ts.end());
    if (!(tmin > 0.0)) throw ParameterError("t must be positive");
    if (tmax > span) throw ParameterError("t larger than the span radius");
    const DistanceGrid grid(s, span, tmin / 64.0);
    ConnectednessProfile prof;
    prof.pitch = grid.pitch();
    prof.span = span;
    for (double t : ts) prof.samples.push_back({t, grid.delta(t)});
    return prof;
}

}  // namespace polyscat
