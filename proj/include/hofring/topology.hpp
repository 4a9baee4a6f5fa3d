// topology.hpp — Diophantine windings, Chern numbers, lattice Berry-flux oracle

#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <stdexcept>
#include <string>
#include <vector>

#include "hofring/spectrum.hpp"
#include "hofring/util.hpp"

namespace hofring::topology {

// Winding number of gap h from h = s*q + t*p with |t| <= q/2. The solution is
// unique below the boundary; at |t| = q/2 both signs solve the congruence and
// the record is flagged degenerate (Dirac touching).
struct WindingRecord {
    int gap{0};
    int s{0};
    int t{0};
    bool degenerate{false};
};

inline WindingRecord diophantine_winding(int p, int q, int h) {
    if (q < 2 || p < 1 || p >= q || gcd_ll(p, q) != 1)
        throw std::invalid_argument("winding requires coprime p/q with 0 < p < q, q >= 2");
    if (h < 1 || h > q - 1)
        throw std::invalid_argument("gap index h must lie in [1, q-1]");

    WindingRecord rec;
    rec.gap = h;
    bool found = false;
    for (int t = -(q / 2); t <= q / 2; ++t) {
        if (((h - t * p) % q + q) % q != 0) continue;
        if (2 * std::abs(t) == q) {
            rec.t = std::abs(t); // both signs solve it; report the positive one
            rec.degenerate = true;
        } else if (!found || std::abs(t) < std::abs(rec.t)) {
            rec.t = t;
        }
        rec.s = (h - rec.t * p) / q;
        found = true;
    }
    if (!found) throw std::logic_error("no Diophantine solution; unreachable for coprime p/q");
    return rec;
}

inline std::vector<WindingRecord> all_windings(int p, int q) {
    std::vector<WindingRecord> out;
    for (int h = 1; h <= q - 1; ++h) out.push_back(diophantine_winding(p, q, h));
    return out;
}

struct ChernRecord {
    int band{0};     // 1..q, or the lowest band of a touching cluster
    int band_end{0}; // last band of the cluster; equals band for a single band
    int chern{0};

    bool composite() const { return band_end != band; }
};

// C_h = t_h - t_{h-1} with t_0 = t_q = 0. Rejects degenerate windings: across
// a Dirac touching no single-band Chern number exists.
inline std::vector<ChernRecord> chern_from_windings(const std::vector<WindingRecord>& windings) {
    const int q = static_cast<int>(windings.size()) + 1;
    for (const auto& w : windings)
        if (w.degenerate)
            throw std::invalid_argument("degenerate winding at gap " + std::to_string(w.gap) +
                                        "; band Chern numbers are undefined across a Dirac "
                                        "touching");
    std::vector<ChernRecord> out;
    int prev = 0;
    for (int h = 1; h <= q; ++h) {
        const int t = (h == q) ? 0 : windings[static_cast<std::size_t>(h - 1)].t;
        out.push_back({h, h, t - prev});
        prev = t;
    }
    return out;
}

// Same counting with bands joined across degenerate gaps: a cluster bounded by
// the open gaps a-1 and b carries C = t_b - t_{a-1}, which needs only the
// non-degenerate windings.
inline std::vector<ChernRecord> chern_clusters_from_windings(
    const std::vector<WindingRecord>& windings) {
    const int q = static_cast<int>(windings.size()) + 1;
    const auto t_of = [&](int h) { return (h == 0 || h == q) ? 0 : windings[h - 1].t; };

    std::vector<ChernRecord> out;
    int first = 1;
    while (first <= q) {
        int last = first;
        while (last < q && windings[static_cast<std::size_t>(last - 1)].degenerate) ++last;
        out.push_back({first, last, t_of(last) - t_of(first - 1)});
        first = last + 1;
    }
    return out;
}

// ------------------------- lattice Berry-flux oracle -------------------------

namespace detail {

// Overlap determinant between two eigenvector groups (columns a..b inclusive).
inline std::complex<double> link_overlap(const Eigen::MatrixXcd& from, const Eigen::MatrixXcd& to,
                                         int a, int b) {
    const int m = b - a + 1;
    if (m == 1) return from.col(a).dot(to.col(a)); // dot conjugates its callee
    Eigen::MatrixXcd overlap(m, m);
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) overlap(r, c) = from.col(a + r).dot(to.col(a + c));
    return overlap.determinant();
}

} // namespace detail

struct BerryFluxResult {
    std::vector<ChernRecord> clusters;  // all bands, touching ones merged
    std::vector<ChernRecord> bands;     // isolated bands only
    double min_cluster_separation{0.0}; // smallest inter-cluster gap on the grid
};

// Chern numbers by plaquette-wise Berry flux on the discretized magnetic
// Brillouin zone: one U(1) link variable per grid edge, principal-branch
// plaquette phases, so the total flux is 2pi times an integer by construction.
// kx runs over its full 2pi period, which tiles the magnetic zone exactly q
// times and multiplies every flux by q; the division back is verified. Bands
// whose separation drops below touch_tol anywhere on the grid merge into a
// cluster with a joint determinant Chern number.
inline BerryFluxResult berry_flux_cherns(int p, int q, int grid, double touch_tol = 1e-6) {
    if (q < 1 || (q == 1 && p != 0) || (q > 1 && (p < 1 || p >= q)) || gcd_ll(p, q) != 1)
        throw std::invalid_argument("berry_flux_cherns requires a coprime fraction p/q");
    if (grid < 6) throw std::invalid_argument("berry flux grid must be at least 6 per axis");

    const int nx = grid * q; // full kx period = q magnetic zones
    const int ny = grid;

    std::vector<Eigen::MatrixXcd> vecs(static_cast<std::size_t>(nx * ny));
    std::vector<double> min_sep(static_cast<std::size_t>(q > 1 ? q - 1 : 0), 1e300);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver;
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            solver.compute(spectrum::bloch_hamiltonian(p, q, two_pi * i / nx, two_pi * j / ny));
            vecs[static_cast<std::size_t>(i * ny + j)] = solver.eigenvectors();
            for (int b = 0; b + 1 < q; ++b)
                min_sep[static_cast<std::size_t>(b)] =
                    std::min(min_sep[static_cast<std::size_t>(b)],
                             solver.eigenvalues()(b + 1) - solver.eigenvalues()(b));
        }
    }

    BerryFluxResult result;
    result.min_cluster_separation = 1e300;

    int first = 1;
    while (first <= q) {
        int last = first;
        while (last < q && min_sep[static_cast<std::size_t>(last - 1)] < touch_tol) ++last;
        if (last < q)
            result.min_cluster_separation = std::min(
                result.min_cluster_separation, min_sep[static_cast<std::size_t>(last - 1)]);

        const int a = first - 1, b = last - 1; // 0-based column range
        double total_flux = 0.0;
        for (int i = 0; i < nx; ++i) {
            for (int j = 0; j < ny; ++j) {
                const auto& v00 = vecs[static_cast<std::size_t>(i * ny + j)];
                const auto& v10 = vecs[static_cast<std::size_t>(((i + 1) % nx) * ny + j)];
                const auto& v11 =
                    vecs[static_cast<std::size_t>(((i + 1) % nx) * ny + (j + 1) % ny)];
                const auto& v01 = vecs[static_cast<std::size_t>(i * ny + (j + 1) % ny)];
                const std::complex<double> loop = detail::link_overlap(v00, v10, a, b) *
                                                  detail::link_overlap(v10, v11, a, b) *
                                                  detail::link_overlap(v11, v01, a, b) *
                                                  detail::link_overlap(v01, v00, a, b);
                total_flux += std::arg(loop);
            }
        }

        const double chern_real = total_flux / (two_pi * static_cast<double>(q));
        const int chern = static_cast<int>(std::lround(chern_real));
        if (std::abs(chern_real - chern) > 1e-6)
            throw std::runtime_error("Berry flux for bands " + std::to_string(first) + ".." +
                                     std::to_string(last) + " is not an integer multiple of q; "
                                     "refine the grid");

        result.clusters.push_back({first, last, chern});
        if (first == last) result.bands.push_back({first, last, chern});
        first = last + 1;
    }
    return result;
}

// Spec surface: per-band Chern records, skipping bands that touch.
inline std::vector<ChernRecord> chern_fhs(int p, int q, int grid) {
    return berry_flux_cherns(p, q, grid).bands;
}

// ------------------------- winding from peak tracking ------------------------

// Signed count of peak trajectories crossing a reference frequency as the
// scan frames advance (alpha: 0 -> 2pi). Peaks are associated between
// consecutive frames by nearest distance; motion toward increasing frequency
// counts +1 at a crossing. Frames must be fine enough that peaks move well
// under half their spacing per step, else association is refused.
inline int winding_from_peak_frames(const std::vector<std::vector<double>>& frames,
                                    double reference, double window_lo, double window_hi) {
    if (frames.size() < 2) throw std::invalid_argument("need at least two scan frames");
    if (!(reference > window_lo && reference < window_hi))
        throw std::invalid_argument("reference frequency must lie inside the scan window");

    int crossings = 0;
    for (std::size_t f = 0; f + 1 < frames.size(); ++f) {
        const std::vector<double>& cur = frames[f];
        const std::vector<double>& nxt = frames[f + 1];
        if (cur.empty() || nxt.empty())
            throw std::runtime_error("scan frame without peaks; widen the window or lower the "
                                     "peak threshold");

        double spacing = window_hi - window_lo;
        if (cur.size() >= 2)
            spacing = (cur.back() - cur.front()) / static_cast<double>(cur.size() - 1);
        const double reach = 0.5 * spacing;

        std::vector<int> taken(nxt.size(), 0);
        for (const double x : cur) {
            std::size_t best = 0;
            double best_d = 1e300;
            for (std::size_t k = 0; k < nxt.size(); ++k) {
                const double d = std::abs(nxt[k] - x);
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            if (best_d > reach) {
                // peaks may leave through the window ends, nothing else
                if (x - window_lo < spacing || window_hi - x < spacing) continue;
                throw std::runtime_error(
                    "peak association ambiguity at frame " + std::to_string(f) +
                    "; a finer alpha grid is required");
            }
            if (taken[best]++)
                throw std::runtime_error(
                    "two peaks contend for one successor at frame " + std::to_string(f) +
                    "; a finer alpha grid is required");
            const double y = nxt[best];
            if (x <= reference && y > reference) ++crossings;
            if (x > reference && y <= reference) --crossings;
        }
    }
    return crossings;
}

} // namespace hofring::topology
