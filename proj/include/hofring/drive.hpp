// drive.hpp — driven-dissipative steady states and the pumping protocols:
// single-site spectroscopy, multi-site momentum scans, adiabatic flux scans.

#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "hofring/lattice.hpp"
#include "hofring/spectrum.hpp"
#include "hofring/topology.hpp"
#include "hofring/util.hpp"

namespace hofring::drive {

using Complex = std::complex<double>;

// Per-site photon loss rates, units of T. Pump sites sit on readout coils and
// decay faster; the default ratio is 20.
struct DecaySpec {
    double base{0.01};
    double pump_site{0.2};
};

struct PumpSpec {
    std::vector<lattice::Coord> sites; // ordered; one entry for a single-site pump
    std::vector<Complex> amplitudes;   // drive vector entries, aligned with sites
    double detuning{0.0};              // Omega, the rotating-frame probe energy
};

inline PumpSpec single_site_pump(lattice::Coord site, double strength, double detuning) {
    PumpSpec pump;
    pump.sites = {site};
    pump.amplitudes = {Complex(strength, 0.0)};
    pump.detuning = detuning;
    return pump;
}

// m-site pump with a phase gradient: the drive term carries exp(-i j k_p) on
// the j-th site, so the drive vector entry is P exp(+i j k_p), j = 1..m.
inline PumpSpec phase_gradient_pump(const std::vector<lattice::Coord>& sites, double strength,
                                    double k_p, double detuning) {
    PumpSpec pump;
    pump.sites = sites;
    pump.detuning = detuning;
    pump.amplitudes.reserve(sites.size());
    for (std::size_t j = 1; j <= sites.size(); ++j)
        pump.amplitudes.push_back(strength *
                                  std::exp(Complex(0.0, k_p * static_cast<double>(j))));
    return pump;
}

inline void require_straight_run(const std::vector<lattice::Coord>& sites) {
    if (sites.size() < 2) return;
    const int dx = sites[1].x - sites[0].x;
    const int dy = sites[1].y - sites[0].y;
    if (std::abs(dx) + std::abs(dy) != 1)
        throw std::invalid_argument("pump sites must be consecutive lattice neighbors");
    for (std::size_t i = 1; i < sites.size(); ++i)
        if (sites[i].x - sites[i - 1].x != dx || sites[i].y - sites[i - 1].y != dy)
            throw std::invalid_argument("pump sites must run along one straight edge segment");
}

// Loss-rate vector over active sites: base everywhere, pump_site on pump sites.
inline Eigen::VectorXd decay_vector(const lattice::SiteTable& sites, const PumpSpec& pump,
                                    const DecaySpec& decay) {
    if (!(decay.base > 0.0) || !(decay.pump_site > 0.0))
        throw std::invalid_argument("decay rates must be strictly positive");
    Eigen::VectorXd kappa =
        Eigen::VectorXd::Constant(sites.size(), decay.base * sites.spec().hopping);
    for (const auto& c : pump.sites) kappa[sites.id(c)] = decay.pump_site * sites.spec().hopping;
    return kappa;
}

inline Eigen::VectorXcd pump_vector(const lattice::SiteTable& sites, const PumpSpec& pump) {
    if (pump.sites.size() != pump.amplitudes.size())
        throw std::invalid_argument("pump sites and amplitudes differ in length");
    Eigen::VectorXcd P = Eigen::VectorXcd::Zero(sites.size());
    for (std::size_t i = 0; i < pump.sites.size(); ++i)
        P[sites.id(pump.sites[i])] += pump.amplitudes[i];
    return P;
}

struct SteadyState {
    Eigen::VectorXcd amplitudes;    // <a> over active sites
    Eigen::VectorXd photon_numbers; // |<a_r>|^2
    double residual{0.0};           // ||(B - Omega I - i K/2) <a> + P||
};

// Coherent steady state <a> = -(B - Omega I - i K/2)^{-1} P. The matrix is
// invertible for any strictly positive decay (its anti-Hermitian part is
// negative definite). One refinement pass keeps the residual at roundoff.
inline SteadyState steady_state_kappa(const lattice::Hamiltonian& H, const PumpSpec& pump,
                                      const Eigen::VectorXd& kappa) {
    const int n = H.sites.size();
    if (kappa.size() != n) throw std::invalid_argument("kappa length does not match lattice");
    if (kappa.minCoeff() <= 0.0)
        throw std::invalid_argument("steady state needs strictly positive decay everywhere");

    Eigen::MatrixXcd M = H.matrix;
    M.diagonal().array() -= Complex(pump.detuning, 0.0);
    M.diagonal().array() -= Complex(0.0, 0.5) * kappa.array().cast<Complex>();

    const Eigen::VectorXcd P = pump_vector(H.sites, pump);
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);
    Eigen::VectorXcd a = lu.solve(-P);
    a += lu.solve(-P - M * a);

    SteadyState out;
    out.amplitudes = std::move(a);
    out.photon_numbers = out.amplitudes.cwiseAbs2();
    out.residual = (M * out.amplitudes + P).norm();
    return out;
}

inline SteadyState steady_state(const lattice::Hamiltonian& H, const PumpSpec& pump,
                                const DecaySpec& decay = {}) {
    return steady_state_kappa(H, pump, decay_vector(H.sites, pump, decay));
}

// ------------------------------ peak detection -------------------------------

struct Peak {
    double position{0.0};
    double height{0.0};
    double fwhm{0.0};
};

namespace detail {

inline double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.end());
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

// Half-height width around maximum index k, linear interpolation, clamped to
// the window ends when the trace never falls below half height.
inline double fwhm_at(const std::vector<double>& axis, const std::vector<double>& trace,
                      std::size_t k) {
    const double base = *std::min_element(trace.begin(), trace.end());
    const double half = base + 0.5 * (trace[k] - base);
    double left = axis.front();
    for (std::size_t i = k; i-- > 0;) {
        if (trace[i] <= half) {
            const double f = (half - trace[i]) / (trace[i + 1] - trace[i]);
            left = axis[i] + f * (axis[i + 1] - axis[i]);
            break;
        }
    }
    double right = axis.back();
    for (std::size_t i = k + 1; i < trace.size(); ++i) {
        if (trace[i] <= half) {
            const double f = (trace[i - 1] - half) / (trace[i - 1] - trace[i]);
            right = axis[i - 1] + f * (axis[i] - axis[i - 1]);
            break;
        }
    }
    return right - left;
}

} // namespace detail

// Local maxima above threshold_factor times the trace median, then maxima
// closer than half the median peak spacing merge into the higher one.
inline std::vector<Peak> detect_peaks(const std::vector<double>& axis,
                                      const std::vector<double>& trace,
                                      double threshold_factor = 3.0) {
    if (axis.size() != trace.size()) throw std::invalid_argument("axis/trace length mismatch");
    if (axis.size() < 3) return {};

    const double floor = threshold_factor * detail::median(trace);
    std::vector<std::size_t> maxima;
    for (std::size_t i = 1; i + 1 < trace.size(); ++i)
        if (trace[i] > floor && trace[i] >= trace[i - 1] && trace[i] > trace[i + 1])
            maxima.push_back(i);
    if (maxima.empty()) return {};

    if (maxima.size() >= 3) {
        std::vector<double> spacings;
        for (std::size_t i = 0; i + 1 < maxima.size(); ++i)
            spacings.push_back(axis[maxima[i + 1]] - axis[maxima[i]]);
        const double merge_radius = 0.5 * detail::median(spacings);
        std::vector<std::size_t> merged;
        for (std::size_t idx : maxima) {
            if (!merged.empty() && axis[idx] - axis[merged.back()] < merge_radius) {
                if (trace[idx] > trace[merged.back()]) merged.back() = idx;
            } else {
                merged.push_back(idx);
            }
        }
        maxima = std::move(merged);
    }

    std::vector<Peak> peaks;
    peaks.reserve(maxima.size());
    for (std::size_t idx : maxima)
        peaks.push_back({axis[idx], trace[idx], detail::fwhm_at(axis, trace, idx)});
    return peaks;
}

// --------------------------------- scans ------------------------------------

struct SpectroScan {
    lattice::Coord site;
    double strength{0.0};
    std::vector<double> omega;
    std::vector<double> n_sp; // pump-site photon number per grid point
    std::vector<Peak> peaks;
};

// Pump-site photon number versus probe detuning. Each grid point is an
// independent solve; the loop parallelizes over the grid.
inline SpectroScan spectro_scan(const lattice::Hamiltonian& H, lattice::Coord site,
                                double strength, const std::vector<double>& omega_grid,
                                const DecaySpec& decay = {}, int threads = 1) {
    if (omega_grid.empty()) throw std::invalid_argument("empty probe grid");
    if (!H.sites.active(site))
        throw std::invalid_argument("pump site " + lattice::to_string(site) + " is not active");

    SpectroScan scan;
    scan.site = site;
    scan.strength = strength;
    scan.omega = omega_grid;
    scan.n_sp.assign(omega_grid.size(), 0.0);

    const int id = H.sites.id(site);
    parallel_for(omega_grid.size(), threads, [&](std::size_t i) {
        const PumpSpec pump = single_site_pump(site, strength, omega_grid[i]);
        scan.n_sp[i] = steady_state(H, pump, decay).photon_numbers[id];
    });
    scan.peaks = detect_peaks(scan.omega, scan.n_sp);
    return scan;
}

struct MomentumScan {
    std::vector<lattice::Coord> sites;
    double omega{0.0};
    double strength{0.0};
    std::vector<double> k_p;
    std::vector<double> n_mp; // summed photon number on the pump sites
    Peak main_peak;           // on the periodic k axis
};

namespace detail {

// Dominant peak of a 2pi-periodic trace: rotate so the maximum sits mid-array,
// then interpolate the half-height width there.
inline Peak periodic_main_peak(const std::vector<double>& k_grid,
                               const std::vector<double>& trace) {
    const std::size_t n = trace.size();
    const std::size_t k_max =
        static_cast<std::size_t>(std::max_element(trace.begin(), trace.end()) - trace.begin());
    const std::size_t half = n / 2;
    std::vector<double> axis(n), rotated(n);
    const double step = two_pi / static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t src = (k_max + n - half + i) % n;
        rotated[i] = trace[src];
        axis[i] = static_cast<double>(i) * step;
    }
    Peak peak = {k_grid[k_max], trace[k_max], detail::fwhm_at(axis, rotated, half)};
    return peak;
}

} // namespace detail

// Summed pump-site photon number versus the pump phase gradient, at fixed
// probe energy. One matrix factorization serves every k_p (only the drive
// vector changes).
inline MomentumScan momentum_scan(const lattice::Hamiltonian& H,
                                  const std::vector<lattice::Coord>& sites, double strength,
                                  double omega, const std::vector<double>& kp_grid,
                                  const DecaySpec& decay = {}) {
    if (kp_grid.empty()) throw std::invalid_argument("empty k_p grid");
    if (sites.empty()) throw std::invalid_argument("momentum scan needs pump sites");
    require_straight_run(sites);

    MomentumScan scan;
    scan.sites = sites;
    scan.omega = omega;
    scan.strength = strength;
    scan.k_p = kp_grid;
    scan.n_mp.assign(kp_grid.size(), 0.0);

    PumpSpec pump = phase_gradient_pump(sites, strength, 0.0, omega);
    const Eigen::VectorXd kappa = decay_vector(H.sites, pump, decay);

    Eigen::MatrixXcd M = H.matrix;
    M.diagonal().array() -= Complex(omega, 0.0);
    M.diagonal().array() -= Complex(0.0, 0.5) * kappa.array().cast<Complex>();
    const Eigen::PartialPivLU<Eigen::MatrixXcd> lu(M);

    std::vector<int> ids;
    ids.reserve(sites.size());
    for (const auto& c : sites) ids.push_back(H.sites.id(c));

    for (std::size_t i = 0; i < kp_grid.size(); ++i) {
        pump = phase_gradient_pump(sites, strength, kp_grid[i], omega);
        const Eigen::VectorXcd P = pump_vector(H.sites, pump);
        Eigen::VectorXcd a = lu.solve(-P);
        a += lu.solve(-P - M * a);
        double total = 0.0;
        for (int id : ids) total += std::norm(a[id]);
        scan.n_mp[i] = total;
    }
    scan.main_peak = detail::periodic_main_peak(kp_grid, scan.n_mp);
    return scan;
}

struct AlphaFrame {
    double alpha{0.0};
    std::vector<double> n_mp;
    std::vector<Peak> peaks;
};

struct AlphaScan {
    std::vector<double> omega;
    double k_p{0.0};
    std::vector<AlphaFrame> frames;
    double closure_error{0.0}; // relative mismatch between the 0 and 2pi frames

    std::vector<std::vector<double>> peak_positions() const {
        std::vector<std::vector<double>> frames_out;
        frames_out.reserve(frames.size());
        for (const auto& f : frames) {
            std::vector<double> positions;
            positions.reserve(f.peaks.size());
            for (const auto& p : f.peaks) positions.push_back(p.position);
            frames_out.push_back(std::move(positions));
        }
        return frames_out;
    }
};

// Adiabatic vacancy-flux scan: rebuild the gauge and matrix at every alpha,
// record the summed pump-site photon number over the probe window. The alpha
// grid must start at 0 and end at 2pi; those two frames must agree.
inline AlphaScan alpha_scan(const lattice::LatticeSpec& base,
                            const std::optional<lattice::DisorderSpec>& disorder,
                            const std::vector<lattice::Coord>& pump_sites, double strength,
                            double k_p, const std::vector<double>& alpha_grid,
                            const std::vector<double>& omega_grid, const DecaySpec& decay = {},
                            int threads = 1) {
    if (alpha_grid.size() < 2 || alpha_grid.front() != 0.0 ||
        std::abs(alpha_grid.back() - two_pi) > 1e-12)
        throw std::invalid_argument("alpha grid must run from 0 to 2pi inclusive");
    if (omega_grid.empty()) throw std::invalid_argument("empty probe grid");
    require_straight_run(pump_sites);

    AlphaScan scan;
    scan.omega = omega_grid;
    scan.k_p = k_p;
    scan.frames.resize(alpha_grid.size());

    const std::size_t n_omega = omega_grid.size();
    const std::size_t total = alpha_grid.size() * n_omega;
    std::vector<double> flat(total, 0.0);

    // Hamiltonians depend on alpha only; build each once up front.
    std::vector<lattice::Hamiltonian> hams;
    hams.reserve(alpha_grid.size());
    for (double alpha : alpha_grid) {
        lattice::LatticeSpec spec = base;
        spec.hole_flux = alpha;
        hams.push_back(lattice::build_hamiltonian(spec, lattice::build_gauge(spec), disorder));
    }

    std::vector<int> ids;
    for (const auto& c : pump_sites) ids.push_back(hams.front().sites.id(c));

    parallel_for(total, threads, [&](std::size_t idx) {
        const std::size_t ai = idx / n_omega;
        const std::size_t oi = idx % n_omega;
        const PumpSpec pump =
            phase_gradient_pump(pump_sites, strength, k_p, omega_grid[oi]);
        const SteadyState ss = steady_state(hams[ai], pump, decay);
        double total_n = 0.0;
        for (int id : ids) total_n += ss.photon_numbers[id];
        flat[idx] = total_n;
    });

    for (std::size_t ai = 0; ai < alpha_grid.size(); ++ai) {
        AlphaFrame& frame = scan.frames[ai];
        frame.alpha = alpha_grid[ai];
        frame.n_mp.assign(flat.begin() + static_cast<std::ptrdiff_t>(ai * n_omega),
                          flat.begin() + static_cast<std::ptrdiff_t>((ai + 1) * n_omega));
        frame.peaks = detect_peaks(omega_grid, frame.n_mp);
    }

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n_omega; ++i) {
        num = std::max(num, std::abs(scan.frames.front().n_mp[i] - scan.frames.back().n_mp[i]));
        den = std::max(den, std::abs(scan.frames.front().n_mp[i]));
    }
    scan.closure_error = den > 0.0 ? num / den : 0.0;
    return scan;
}

} // namespace hofring::drive

namespace hofring::topology {

// Winding number of the gap an alpha scan sweeps: signed count of edge-mode
// peaks crossing the window midpoint (or an explicit reference) as alpha
// advances from 0 to 2pi.
inline int extract_winding(const drive::AlphaScan& scan, std::optional<double> reference = {}) {
    const double lo = scan.omega.front();
    const double hi = scan.omega.back();
    return winding_from_peak_frames(scan.peak_positions(),
                                    reference.value_or(0.5 * (lo + hi)), lo, hi);
}

} // namespace hofring::topology
