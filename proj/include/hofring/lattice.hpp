// lattice.hpp — annular square lattice, link phases, disorder, coupling matrix
//
// Geometry is an Nx x Ny site grid with an optional centered hole_nx x hole_ny
// vacancy. Each plaquette carries a uniform flux phi; an extra flux alpha is
// threaded through the vacancy via a branch-cut string of vertical links.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hofring/util.hpp"

namespace hofring::lattice {

using Complex = std::complex<double>;

// 1-based site coordinate, x in [1, Nx], y in [1, Ny]
struct Coord {
    int x{0};
    int y{0};

    friend bool operator==(const Coord&, const Coord&) = default;
};

inline std::string to_string(Coord c) {
    return "(" + std::to_string(c.x) + "," + std::to_string(c.y) + ")";
}

// Per-plaquette flux, either a rational fraction 2*pi*p/q or a free angle.
struct Flux {
    int p{0};
    int q{1};
    bool rational{true};
    double phi{0.0}; // radians

    static Flux fraction(int p, int q) {
        Flux f;
        f.p = p;
        f.q = q;
        f.rational = true;
        f.phi = two_pi * static_cast<double>(p) / static_cast<double>(q);
        return f;
    }

    static Flux radians(double phi) {
        Flux f;
        f.rational = false;
        f.p = 0;
        f.q = 0;
        f.phi = phi;
        return f;
    }
};

struct LatticeSpec {
    int nx{24};             // outer extent in sites
    int ny{24};
    int hole_nx{6};         // vacancy extent, 0 for a plain rectangle
    int hole_ny{6};
    Flux flux{};            // per-plaquette flux phi
    double hole_flux{0.0};  // extra flux alpha through the vacancy
    double hopping{1.0};    // T, the energy unit

    bool has_hole() const { return hole_nx > 0 && hole_ny > 0; }

    // Vacancy occupies x in [hole_x_lo, hole_x_hi], y likewise (centered).
    int hole_x_lo() const { return (nx - hole_nx) / 2 + 1; }
    int hole_x_hi() const { return (nx + hole_nx) / 2; }
    int hole_y_lo() const { return (ny - hole_ny) / 2 + 1; }
    int hole_y_hi() const { return (ny + hole_ny) / 2; }

    int site_count() const { return nx * ny - hole_nx * hole_ny; }
};

inline std::vector<std::string> validate(const LatticeSpec& spec) {
    std::vector<std::string> issues;
    if (spec.nx < 1 || spec.ny < 1)
        issues.push_back("lattice extents must be positive");
    if (spec.hole_nx < 0 || spec.hole_ny < 0)
        issues.push_back("vacancy extents must be non-negative");
    if ((spec.hole_nx == 0) != (spec.hole_ny == 0))
        issues.push_back("vacancy must be empty in both directions or neither");
    if (spec.flux.rational) {
        if (spec.flux.q < 1 || spec.flux.p < 0 || spec.flux.p > spec.flux.q)
            issues.push_back("rational flux requires q >= 1 and 0 <= p <= q");
        else if (gcd_ll(spec.flux.p, spec.flux.q) != 1)
            issues.push_back("flux fraction p/q must be coprime, gcd(" + std::to_string(spec.flux.p) +
                             "," + std::to_string(spec.flux.q) + ") != 1");
    } else if (!(spec.flux.phi >= 0.0) || !(spec.flux.phi < two_pi)) {
        issues.push_back("irrational flux phi must lie in [0, 2pi)");
    }
    if (spec.has_hole()) {
        if (spec.hole_nx > spec.nx - 2 || spec.hole_ny > spec.ny - 2)
            issues.push_back("vacancy must leave at least one ring of sites inside the boundary");
        if ((spec.nx - spec.hole_nx) % 2 != 0 || (spec.ny - spec.hole_ny) % 2 != 0)
            issues.push_back("vacancy must be centered: (Nx-nx) and (Ny-ny) must be even");
    } else if (spec.hole_flux != 0.0) {
        issues.push_back("vacancy flux alpha requires a vacancy");
    }
    if (!(spec.hole_flux >= 0.0) || !(spec.hole_flux <= two_pi))
        issues.push_back("vacancy flux alpha must lie in [0, 2pi]");
    if (!(spec.hopping > 0.0))
        issues.push_back("hopping amplitude must be positive");
    return issues;
}

inline void require_valid(const LatticeSpec& spec) {
    const auto issues = validate(spec);
    if (!issues.empty()) {
        std::ostringstream msg;
        msg << "invalid lattice spec:";
        for (const auto& s : issues) msg << "\n  - " << s;
        throw std::invalid_argument(msg.str());
    }
}

// Bijection between active coordinates and dense ids. Ids run row-major in
// (y, x): all of row y=1 left to right, then row y=2, skipping the vacancy.
class SiteTable {
public:
    explicit SiteTable(const LatticeSpec& spec) : spec_(spec) {
        require_valid(spec);
        id_of_.assign(static_cast<std::size_t>(spec.nx * spec.ny), -1);
        coords_.reserve(static_cast<std::size_t>(spec.site_count()));
        for (int y = 1; y <= spec.ny; ++y) {
            for (int x = 1; x <= spec.nx; ++x) {
                const Coord c{x, y};
                if (in_hole(c)) continue;
                id_of_[flat(c)] = static_cast<int>(coords_.size());
                coords_.push_back(c);
            }
        }
    }

    const LatticeSpec& spec() const { return spec_; }
    int size() const { return static_cast<int>(coords_.size()); }

    bool in_lattice(Coord c) const {
        return c.x >= 1 && c.x <= spec_.nx && c.y >= 1 && c.y <= spec_.ny;
    }

    bool in_hole(Coord c) const {
        return spec_.has_hole() && c.x >= spec_.hole_x_lo() && c.x <= spec_.hole_x_hi() &&
               c.y >= spec_.hole_y_lo() && c.y <= spec_.hole_y_hi();
    }

    bool active(Coord c) const { return in_lattice(c) && !in_hole(c); }

    int id(Coord c) const {
        if (!in_lattice(c)) throw std::out_of_range("site " + to_string(c) + " outside lattice");
        const int i = id_of_[flat(c)];
        if (i < 0) throw std::out_of_range("site " + to_string(c) + " lies in the vacancy");
        return i;
    }

    Coord coord(int id) const { return coords_.at(static_cast<std::size_t>(id)); }
    const std::vector<Coord>& coords() const { return coords_; }

private:
    std::size_t flat(Coord c) const {
        return static_cast<std::size_t>(c.y - 1) * static_cast<std::size_t>(spec_.nx) +
               static_cast<std::size_t>(c.x - 1);
    }

    LatticeSpec spec_;
    std::vector<int> id_of_;
    std::vector<Coord> coords_;
};

// Directed nearest-neighbor link phases theta_{r',r} for the hop r -> r',
// stored on the canonical +x and +y links and antisymmetrized on lookup.
class GaugeField {
public:
    GaugeField(const LatticeSpec& spec, std::vector<double> right, std::vector<double> up)
        : spec_(spec), right_(std::move(right)), up_(std::move(up)) {}

    const LatticeSpec& spec() const { return spec_; }

    // theta for the hop from -> to; neighbors only
    double phase(Coord from, Coord to) const {
        const int dx = to.x - from.x;
        const int dy = to.y - from.y;
        if (dx == 1 && dy == 0) return right_[flat(from)];
        if (dx == -1 && dy == 0) return -right_[flat(to)];
        if (dx == 0 && dy == 1) return up_[flat(from)];
        if (dx == 0 && dy == -1) return -up_[flat(to)];
        throw std::invalid_argument("phase requested for non-neighbor pair " + to_string(from) +
                                    " -> " + to_string(to));
    }

private:
    std::size_t flat(Coord c) const {
        return static_cast<std::size_t>(c.y - 1) * static_cast<std::size_t>(spec_.nx) +
               static_cast<std::size_t>(c.x - 1);
    }

    LatticeSpec spec_;
    std::vector<double> right_; // theta for (x,y) -> (x+1,y)
    std::vector<double> up_;    // theta for (x,y) -> (x,y+1)
};

// Landau gauge: horizontal links carry phase 0, the vertical link
// (x,y) -> (x,y+1) carries x*phi. The vacancy flux enters as a string on the
// cut row at the vacancy's vertical midline: vertical links strictly right of
// the vacancy on that row carry an extra -alpha, so any loop around the hole
// picks the string up exactly once. The sign threads the hole flux opposite
// to the plaquette flux; that orientation makes the gap-1 outer-edge peaks
// drift toward increasing energy as alpha advances, which is the t_1 = +1
// direction the winding measurement is calibrated to.
inline GaugeField build_gauge(const LatticeSpec& spec) {
    require_valid(spec);
    const std::size_t cells = static_cast<std::size_t>(spec.nx * spec.ny);
    std::vector<double> right(cells, 0.0);
    std::vector<double> up(cells, 0.0);

    const double phi = spec.flux.phi;
    const bool cut = spec.has_hole();
    const int cut_row = cut ? spec.hole_y_lo() + (spec.hole_ny - 1) / 2 : 0;
    const int cut_x_min = cut ? spec.hole_x_hi() + 1 : 0;

    for (int y = 1; y <= spec.ny; ++y) {
        for (int x = 1; x <= spec.nx; ++x) {
            const std::size_t i =
                static_cast<std::size_t>(y - 1) * static_cast<std::size_t>(spec.nx) +
                static_cast<std::size_t>(x - 1);
            double theta = static_cast<double>(x) * phi;
            if (cut && y == cut_row && x >= cut_x_min) theta -= spec.hole_flux;
            up[i] = wrap_to_pi(theta);
        }
    }
    return GaugeField(spec, std::move(right), std::move(up));
}

// ------------------------------- disorder -----------------------------------

struct Defect {
    Coord site;
    double detuning{0.0}; // on-site shift in units of T, overrides drawn disorder
};

struct DisorderSpec {
    double sigma_diag{0.0};    // std dev of on-site detuning, units of T
    double sigma_offdiag{0.0}; // std dev of hopping shift, units of T
    std::uint64_t seed{0};
    std::vector<Defect> defects;
};

// Drawn realization; kept separate so tests can regenerate it independently.
// Draw order is pinned: one normal per active site in dense-id order, then one
// per undirected link, iterating sites in id order and taking the +x link
// before the +y link. Draws are consumed even when a sigma is zero.
struct DisorderRealization {
    Eigen::VectorXd site_detuning;  // delta_omega per dense id
    std::vector<double> link_shift; // delta_T per link in draw order
};

inline DisorderRealization draw_disorder(const SiteTable& sites, const DisorderSpec& dis) {
    const LatticeSpec& spec = sites.spec();
    GaussianStream stream(dis.seed);
    DisorderRealization real;
    real.site_detuning.resize(sites.size());
    for (int i = 0; i < sites.size(); ++i)
        real.site_detuning[i] = dis.sigma_diag * spec.hopping * stream.next();
    for (int i = 0; i < sites.size(); ++i) {
        const Coord c = sites.coord(i);
        const Coord nbrs[2] = {{c.x + 1, c.y}, {c.x, c.y + 1}};
        for (const Coord n : nbrs)
            if (sites.active(n))
                real.link_shift.push_back(dis.sigma_offdiag * spec.hopping * stream.next());
    }
    for (const auto& d : dis.defects)
        real.site_detuning[sites.id(d.site)] = d.detuning * spec.hopping;
    return real;
}

// ------------------------------ Hamiltonian ---------------------------------

struct Hamiltonian {
    Eigen::MatrixXcd matrix; // Hermitian coupling matrix B, units of T
    SiteTable sites;
    LatticeSpec spec;
};

// B[r',r] = (T + dT) * exp(-i theta_{r',r}) on active nearest-neighbor links,
// diagonal delta_omega_r. Both triangles are written from the same phase, so
// the matrix is Hermitian exactly.
inline Hamiltonian build_hamiltonian(const LatticeSpec& spec, const GaugeField& gauge,
                                     const std::optional<DisorderSpec>& disorder = std::nullopt) {
    if (gauge.spec().nx != spec.nx || gauge.spec().ny != spec.ny ||
        gauge.spec().hole_nx != spec.hole_nx || gauge.spec().hole_ny != spec.hole_ny)
        throw std::invalid_argument("gauge field was built for a different lattice");

    SiteTable sites(spec);
    const int n = sites.size();
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(n, n);

    DisorderRealization real;
    if (disorder) {
        real = draw_disorder(sites, *disorder);
    } else {
        real.site_detuning = Eigen::VectorXd::Zero(n);
    }

    std::size_t link_index = 0;
    for (int i = 0; i < n; ++i) {
        B(i, i) = real.site_detuning[i];
        const Coord c = sites.coord(i);
        const Coord nbrs[2] = {{c.x + 1, c.y}, {c.x, c.y + 1}};
        for (const Coord nb : nbrs) {
            if (!sites.active(nb)) continue;
            double amp = spec.hopping;
            if (disorder) amp += real.link_shift[link_index];
            ++link_index;
            const int j = sites.id(nb);
            const Complex element = amp * std::exp(Complex(0.0, -gauge.phase(c, nb)));
            B(j, i) = element;           // hop c -> nb
            B(i, j) = std::conj(element);
        }
    }
    return Hamiltonian{std::move(B), std::move(sites), spec};
}

// ------------------------------- edge sets ----------------------------------

struct EdgeSets {
    std::vector<int> outer; // boundary sites, dense ids ascending
    std::vector<int> inner; // active sites 4-adjacent to the vacancy
    std::vector<int> bulk;  // everything else
};

inline EdgeSets edge_sets(const SiteTable& sites) {
    const LatticeSpec& spec = sites.spec();
    EdgeSets sets;
    for (int i = 0; i < sites.size(); ++i) {
        const Coord c = sites.coord(i);
        if (c.x == 1 || c.x == spec.nx || c.y == 1 || c.y == spec.ny) {
            sets.outer.push_back(i);
            continue;
        }
        const Coord nbrs[4] = {{c.x + 1, c.y}, {c.x - 1, c.y}, {c.x, c.y + 1}, {c.x, c.y - 1}};
        bool touches_hole = false;
        for (const Coord nb : nbrs) touches_hole = touches_hole || sites.in_hole(nb);
        if (touches_hole)
            sets.inner.push_back(i);
        else
            sets.bulk.push_back(i);
    }
    return sets;
}

// Chebyshev distance from a coordinate to the vacancy rectangle; 0 inside.
inline int hole_ring_distance(const LatticeSpec& spec, Coord c) {
    if (!spec.has_hole()) return -1;
    const int dx = std::max({spec.hole_x_lo() - c.x, 0, c.x - spec.hole_x_hi()});
    const int dy = std::max({spec.hole_y_lo() - c.y, 0, c.y - spec.hole_y_hi()});
    return std::max(dx, dy);
}

// Sites within `rings` Chebyshev rings of the vacancy; ring 1 alone is the
// inner rectangle including its corners. Used for mode classification.
inline std::vector<int> hole_ring_sites(const SiteTable& sites, int rings) {
    std::vector<int> ids;
    if (!sites.spec().has_hole()) return ids;
    for (int i = 0; i < sites.size(); ++i) {
        const int d = hole_ring_distance(sites.spec(), sites.coord(i));
        if (d >= 1 && d <= rings) ids.push_back(i);
    }
    return ids;
}

// Outer boundary ordered counterclockwise from (1,1); a closed loop.
inline std::vector<int> outer_loop(const SiteTable& sites) {
    const LatticeSpec& spec = sites.spec();
    std::vector<int> loop;
    for (int x = 1; x <= spec.nx; ++x) loop.push_back(sites.id({x, 1}));
    for (int y = 2; y <= spec.ny; ++y) loop.push_back(sites.id({spec.nx, y}));
    for (int x = spec.nx - 1; x >= 1; --x) loop.push_back(sites.id({x, spec.ny}));
    for (int y = spec.ny - 1; y >= 2; --y) loop.push_back(sites.id({1, y}));
    return loop;
}

// First ring around the vacancy (corners included) ordered counterclockwise.
inline std::vector<int> inner_loop(const SiteTable& sites) {
    const LatticeSpec& spec = sites.spec();
    if (!spec.has_hole()) throw std::invalid_argument("inner loop requires a vacancy");
    const int x0 = spec.hole_x_lo() - 1, x1 = spec.hole_x_hi() + 1;
    const int y0 = spec.hole_y_lo() - 1, y1 = spec.hole_y_hi() + 1;
    std::vector<int> loop;
    for (int x = x0; x <= x1; ++x) loop.push_back(sites.id({x, y0}));
    for (int y = y0 + 1; y <= y1; ++y) loop.push_back(sites.id({x1, y}));
    for (int x = x1 - 1; x >= x0; --x) loop.push_back(sites.id({x, y1}));
    for (int y = y1 - 1; y >= y0 + 1; --y) loop.push_back(sites.id({x0, y}));
    return loop;
}

} // namespace hofring::lattice
