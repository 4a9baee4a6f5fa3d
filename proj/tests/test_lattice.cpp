#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <set>

#include "hofring/lattice.hpp"

using namespace hofring;
using namespace hofring::lattice;

namespace {

LatticeSpec paper_spec(int p, int q, double alpha = 0.0) {
    LatticeSpec spec;
    spec.nx = spec.ny = 24;
    spec.hole_nx = spec.hole_ny = 6;
    spec.flux = Flux::fraction(p, q);
    spec.hole_flux = alpha;
    return spec;
}

// Counterclockwise phase sum around the plaquette with lower-left corner c,
// straight from the link-phase map.
double plaquette_sum(const GaugeField& g, Coord c) {
    const Coord a = c, b{c.x + 1, c.y}, d{c.x + 1, c.y + 1}, e{c.x, c.y + 1};
    return g.phase(a, b) + g.phase(b, d) + g.phase(d, e) + g.phase(e, a);
}

// Wilson loop along an explicit closed site path (path-product oracle).
double wilson_loop(const GaugeField& g, const std::vector<Coord>& path) {
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < path.size(); ++i) total += g.phase(path[i], path[i + 1]);
    total += g.phase(path.back(), path.front());
    return total;
}

// Rectangle loop through sites with corners (x0,y0)-(x1,y1), counterclockwise.
std::vector<Coord> rect_loop(int x0, int y0, int x1, int y1) {
    std::vector<Coord> path;
    for (int x = x0; x < x1; ++x) path.push_back({x, y0});
    for (int y = y0; y < y1; ++y) path.push_back({x1, y});
    for (int x = x1; x > x0; --x) path.push_back({x, y1});
    for (int y = y1; y > y0; --y) path.push_back({x0, y});
    return path;
}

double mod_2pi_distance(double a, double b) {
    return std::abs(wrap_to_pi(a - b));
}

} // namespace

TEST_CASE("site table is a deterministic row-major bijection", "[lattice]") {
    const LatticeSpec spec = paper_spec(1, 4);
    const SiteTable sites(spec);

    REQUIRE(sites.size() == 540); // 24*24 - 6*6

    // dense ids follow (y, x) row-major order over active sites
    for (int i = 0; i + 1 < sites.size(); ++i) {
        const Coord a = sites.coord(i), b = sites.coord(i + 1);
        REQUIRE((a.y < b.y || (a.y == b.y && a.x < b.x)));
    }
    for (int i = 0; i < sites.size(); ++i) REQUIRE(sites.id(sites.coord(i)) == i);

    // vacancy occupies x,y in [10,15]; those coords have no id
    REQUIRE(sites.in_hole({10, 10}));
    REQUIRE(sites.in_hole({15, 15}));
    REQUIRE_FALSE(sites.in_hole({9, 13}));
    REQUIRE_THROWS_AS(sites.id({12, 12}), std::out_of_range);
    REQUIRE_THROWS_AS(sites.id({0, 1}), std::out_of_range);
}

TEST_CASE("spec validation reports every violation", "[lattice]") {
    LatticeSpec bad = paper_spec(1, 4);
    bad.flux = Flux{2, 4, true, two_pi * 2.0 / 4.0};
    bad.hole_nx = 5; // breaks centering parity
    auto issues = validate(bad);
    REQUIRE(issues.size() >= 2);

    LatticeSpec one_ring = paper_spec(1, 4);
    one_ring.hole_nx = one_ring.hole_ny = 22; // exactly one ring left: legal
    REQUIRE(validate(one_ring).empty());

    LatticeSpec touching = paper_spec(1, 4);
    touching.hole_nx = touching.hole_ny = 24;
    REQUIRE_FALSE(validate(touching).empty());

    LatticeSpec alpha_no_hole = paper_spec(1, 4, 1.0);
    alpha_no_hole.hole_nx = alpha_no_hole.hole_ny = 0;
    REQUIRE_FALSE(validate(alpha_no_hole).empty());

    REQUIRE(validate(paper_spec(1, 4)).empty());
    REQUIRE(validate(paper_spec(1, 5, 3.0)).empty());
    REQUIRE_THROWS_AS(build_gauge(touching), std::invalid_argument);
}

TEST_CASE("zero field leaves all link phases zero", "[lattice]") {
    LatticeSpec spec;
    spec.nx = spec.ny = 2;
    spec.hole_nx = spec.hole_ny = 0;
    spec.flux = Flux::fraction(0, 1);
    const GaugeField g = build_gauge(spec);
    REQUIRE(g.phase({1, 1}, {2, 1}) == 0.0);
    REQUIRE(g.phase({1, 2}, {2, 2}) == 0.0);
    REQUIRE(g.phase({1, 1}, {1, 2}) == 0.0);
    REQUIRE(g.phase({2, 1}, {2, 2}) == 0.0);
}

TEST_CASE("every active plaquette carries flux phi", "[lattice]") {
    const LatticeSpec spec = paper_spec(1, 4);
    const GaugeField g = build_gauge(spec);
    const SiteTable sites(spec);
    const double phi = spec.flux.phi;

    int checked = 0;
    for (int y = 1; y < spec.ny; ++y) {
        for (int x = 1; x < spec.nx; ++x) {
            const Coord c{x, y};
            const bool all_active = sites.active(c) && sites.active({x + 1, y}) &&
                                    sites.active({x, y + 1}) && sites.active({x + 1, y + 1});
            if (!all_active) continue;
            REQUIRE(mod_2pi_distance(plaquette_sum(g, c), phi) < 1e-12);
            ++checked;
        }
    }
    REQUIRE(checked > 400);
}

TEST_CASE("gauge links are exactly antisymmetric", "[lattice]") {
    const GaugeField g = build_gauge(paper_spec(1, 5, 2.0));
    REQUIRE(g.phase({3, 4}, {3, 5}) == -g.phase({3, 5}, {3, 4}));
    REQUIRE(g.phase({3, 4}, {4, 4}) == -g.phase({4, 4}, {3, 4}));
}

TEST_CASE("Wilson loops around the vacancy enclose area flux plus alpha", "[lattice]") {
    const double alpha = two_pi / 2.0; // pi
    const LatticeSpec spec = paper_spec(1, 4, alpha);
    const GaugeField g = build_gauge(spec);
    const double phi = spec.flux.phi;

    // Tight rectangle through the first ring of active sites, (9,9)-(16,16):
    // encloses 7x7 elementary cells around and over the hole.
    {
        const double loop = wilson_loop(g, rect_loop(9, 9, 16, 16));
        const int cells = (16 - 9) * (16 - 9);
        REQUIRE(mod_2pi_distance(loop, cells * phi + alpha) < 1e-12);
        // frozen oracle value: 49*(pi/2) + pi = 3*pi/2 (mod 2pi)
        REQUIRE(mod_2pi_distance(loop, 1.5 * two_pi / 2.0) < 1e-12);
    }

    // A wider loop picks up the same alpha and its own cell count.
    {
        const double loop = wilson_loop(g, rect_loop(5, 6, 20, 19));
        const int cells = (20 - 5) * (19 - 6);
        REQUIRE(mod_2pi_distance(loop, cells * phi + alpha) < 1e-12);
    }

    // A loop not enclosing the vacancy sees only its area flux.
    {
        const double loop = wilson_loop(g, rect_loop(2, 2, 7, 8));
        const int cells = (7 - 2) * (8 - 2);
        REQUIRE(mod_2pi_distance(loop, cells * phi) < 1e-12);
    }
}

TEST_CASE("coupling matrix has the paper dimension and exact hermiticity", "[lattice]") {
    const LatticeSpec spec = paper_spec(1, 4);
    const Hamiltonian H = build_hamiltonian(spec, build_gauge(spec));
    REQUIRE(H.matrix.rows() == 540);
    REQUIRE(H.matrix.cols() == 540);
    REQUIRE((H.matrix - H.matrix.adjoint()).cwiseAbs().maxCoeff() == 0.0);

    // nonzeros only on nearest-neighbor active links, magnitude T
    for (int i = 0; i < 30; ++i) {
        for (int j = 0; j < 540; ++j) {
            const Coord a = H.sites.coord(i), b = H.sites.coord(j);
            const int dist = std::abs(a.x - b.x) + std::abs(a.y - b.y);
            const double mag = std::abs(H.matrix(i, j));
            if (dist == 1)
                REQUIRE(mag == Catch::Approx(spec.hopping));
            else
                REQUIRE(mag == 0.0);
        }
    }
}

TEST_CASE("2x2 ring at zero flux has the 4-cycle spectrum", "[lattice]") {
    LatticeSpec spec;
    spec.nx = spec.ny = 2;
    spec.hole_nx = spec.hole_ny = 0;
    spec.flux = Flux::fraction(0, 1);
    const Hamiltonian H = build_hamiltonian(spec, build_gauge(spec));
    REQUIRE(H.matrix.imag().cwiseAbs().maxCoeff() == 0.0);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H.matrix);
    const Eigen::VectorXd ev = solver.eigenvalues();
    REQUIRE(ev(0) == Catch::Approx(-2.0).margin(1e-12));
    REQUIRE(ev(1) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(ev(2) == Catch::Approx(0.0).margin(1e-12));
    REQUIRE(ev(3) == Catch::Approx(2.0).margin(1e-12));
}

TEST_CASE("spectrum is invariant under site-local gauge rotations", "[lattice]") {
    const LatticeSpec spec = paper_spec(1, 4, 1.0);
    const GaugeField g = build_gauge(spec);
    const SiteTable sites(spec);

    std::mt19937_64 rng(7);
    std::vector<double> chi(static_cast<std::size_t>(spec.nx * spec.ny));
    for (auto& v : chi) v = two_pi * static_cast<double>(rng() >> 11) * 0x1p-53;
    const auto chi_at = [&](Coord c) {
        return chi[static_cast<std::size_t>(c.y - 1) * spec.nx + (c.x - 1)];
    };

    // theta'_{r'r} = theta_{r'r} + chi(r') - chi(r)
    std::vector<double> right(chi.size()), up(chi.size());
    for (int y = 1; y <= spec.ny; ++y) {
        for (int x = 1; x <= spec.nx; ++x) {
            const Coord c{x, y};
            const std::size_t i = static_cast<std::size_t>(y - 1) * spec.nx + (x - 1);
            if (x < spec.nx) right[i] = g.phase(c, {x + 1, y}) + chi_at({x + 1, y}) - chi_at(c);
            if (y < spec.ny) up[i] = g.phase(c, {x, y + 1}) + chi_at({x, y + 1}) - chi_at(c);
        }
    }
    const GaugeField rotated(spec, std::move(right), std::move(up));

    const Hamiltonian H0 = build_hamiltonian(spec, g);
    const Hamiltonian H1 = build_hamiltonian(spec, rotated);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> s0(H0.matrix), s1(H1.matrix);
    REQUIRE((s0.eigenvalues() - s1.eigenvalues()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("clean spectrum is particle-hole symmetric", "[lattice]") {
    for (const double alpha : {0.0, two_pi / 2.0}) {
        const LatticeSpec spec = paper_spec(1, 4, alpha);
        const Hamiltonian H = build_hamiltonian(spec, build_gauge(spec));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(H.matrix);
        const Eigen::VectorXd ev = solver.eigenvalues();
        const int n = static_cast<int>(ev.size());
        double worst = 0.0;
        for (int i = 0; i < n; ++i) worst = std::max(worst, std::abs(ev(i) + ev(n - 1 - i)));
        REQUIRE(worst <= 1e-10);
    }
}

TEST_CASE("disorder draws match an independently seeded reference", "[lattice]") {
    const LatticeSpec spec = paper_spec(1, 4);
    DisorderSpec dis;
    dis.sigma_diag = 0.05;
    dis.sigma_offdiag = 0.02;
    dis.seed = 424242;
    dis.defects.push_back({{12, 23}, 30.0});

    const Hamiltonian H = build_hamiltonian(spec, build_gauge(spec), dis);

    // Reference generator, written out independently: mt19937_64 words mapped
    // to (0,1] doubles, Box-Muller pairs, diagonal draws first in id order.
    std::mt19937_64 raw(dis.seed);
    const auto unit = [&]() { return (static_cast<double>(raw() >> 11) + 1.0) * 0x1p-53; };
    std::vector<double> normals;
    while (normals.size() < 540) {
        const double u1 = unit(), u2 = unit();
        normals.push_back(std::sqrt(-2.0 * std::log(u1)) * std::cos(two_pi * u2));
        normals.push_back(std::sqrt(-2.0 * std::log(u1)) * std::sin(two_pi * u2));
    }

    const int defect_id = H.sites.id({12, 23});
    for (int i = 0; i < 540; ++i) {
        const double expected = (i == defect_id) ? 30.0 : dis.sigma_diag * normals[i];
        REQUIRE(H.matrix(i, i).real() == expected);
        REQUIRE(H.matrix(i, i).imag() == 0.0);
    }

    // off-diagonal disorder shifts magnitudes only
    const Hamiltonian clean = build_hamiltonian(spec, build_gauge(spec));
    for (int i = 0; i < 540; ++i) {
        for (int j = i + 1; j < 540; ++j) {
            if (std::abs(clean.matrix(i, j)) == 0.0) continue;
            const std::complex<double> ratio = H.matrix(i, j) / clean.matrix(i, j);
            REQUIRE(std::abs(ratio.imag()) < 1e-12); // phases untouched
        }
    }
}

TEST_CASE("identical seeds give bit-identical matrices", "[lattice]") {
    const LatticeSpec spec = paper_spec(1, 5, 1.25);
    DisorderSpec dis;
    dis.sigma_diag = 0.05;
    dis.sigma_offdiag = 0.05;
    dis.seed = 99;

    const Hamiltonian a = build_hamiltonian(spec, build_gauge(spec), dis);
    const Hamiltonian b = build_hamiltonian(spec, build_gauge(spec), dis);
    REQUIRE(std::memcmp(a.matrix.data(), b.matrix.data(),
                        sizeof(std::complex<double>) * 540 * 540) == 0);

    DisorderSpec other = dis;
    other.seed = 100;
    const Hamiltonian c = build_hamiltonian(spec, build_gauge(spec), other);
    REQUIRE(std::memcmp(a.matrix.data(), c.matrix.data(),
                        sizeof(std::complex<double>) * 540 * 540) != 0);
}

TEST_CASE("edge sets partition the lattice with the paper counts", "[lattice]") {
    const LatticeSpec spec = paper_spec(1, 4);
    const SiteTable sites(spec);
    const EdgeSets sets = edge_sets(sites);

    REQUIRE(sets.outer.size() == 92); // 4*24 - 4
    REQUIRE(sets.inner.size() == 24); // 4*6
    REQUIRE(sets.outer.size() + sets.inner.size() + sets.bulk.size() == 540);

    std::set<int> all;
    for (int i : sets.outer) all.insert(i);
    for (int i : sets.inner) all.insert(i);
    for (int i : sets.bulk) all.insert(i);
    REQUIRE(all.size() == 540);

    const int ies = sites.id({9, 13});
    REQUIRE(std::find(sets.inner.begin(), sets.inner.end(), ies) != sets.inner.end());
    const int bs = sites.id({5, 13});
    REQUIRE(std::find(sets.bulk.begin(), sets.bulk.end(), bs) != sets.bulk.end());
    const int oes = sites.id({1, 24});
    REQUIRE(std::find(sets.outer.begin(), sets.outer.end(), oes) != sets.outer.end());
}

TEST_CASE("edge loops are closed nearest-neighbor cycles", "[lattice]") {
    const LatticeSpec spec = paper_spec(1, 4);
    const SiteTable sites(spec);

    for (const auto& loop : {outer_loop(sites), inner_loop(sites)}) {
        REQUIRE(loop.size() >= 4);
        for (std::size_t i = 0; i < loop.size(); ++i) {
            const Coord a = sites.coord(loop[i]);
            const Coord b = sites.coord(loop[(i + 1) % loop.size()]);
            REQUIRE(std::abs(a.x - b.x) + std::abs(a.y - b.y) == 1);
        }
    }
    REQUIRE(outer_loop(sites).size() == 92);
    REQUIRE(inner_loop(sites).size() == 28);
}
