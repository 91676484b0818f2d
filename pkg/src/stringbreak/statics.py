"""Static analysis: g=0 closed forms, spectra, avoided crossings,
long-range phase boundaries, and perturbation theory."""

import math
import warnings
from dataclasses import dataclass
from itertools import combinations

import numpy as np
import scipy.linalg
import scipy.optimize
import scipy.sparse.linalg

from . import observables
from .model import (
    ChainSpec,
    Exponential,
    PowerLaw,
    ResourceError,
    SolverError,
    StaticExternal,
    assemble_operator,
    coupling_strength,
    diagonal_energy,
    field_profile,
    kernel_tail,
    zeta_fn,
)

DENSE_DIM = 1024  # dense eigensolver up to this dimension on the fast path
_EIGSH_SEED = 12345  # fixed ARPACK start vector for deterministic output


@dataclass
class SpectrumSlice:
    control: float
    energies: np.ndarray
    magnetizations: np.ndarray
    eigenvectors: np.ndarray | None = None  # columns


@dataclass
class CrossingFit:
    control_c: float
    gap_c: float
    slope: float  # = ell * m_*
    residual: float


@dataclass
class PhaseBoundary:
    alpha_min: float
    alpha_max: float
    lc_table: dict  # alpha -> ell_c (int, 0, or math.inf)


def g0_energy_gap(chain, h=0.0):
    """E_bs - E_s from the kernel-appropriate closed form."""
    ell = chain.ell
    kernel = chain.kernel
    if isinstance(kernel, Exponential):
        x = np.exp(-1.0 / kernel.xi)
        gap0 = 4.0 * (1.0 - 2.0 * x) * (1.0 - np.exp(-ell / kernel.xi)) / (1.0 - x) ** 2
    else:
        j = np.arange(1, ell + 1, dtype=float)
        gap0 = -4.0 * ell * zeta_fn(kernel.alpha) + 4.0 * np.sum(
            (ell - j + 2.0) * j ** (-kernel.alpha)
        )
    return gap0 - 2.0 * ell * h


def g0_breaking_field(chain):
    """h_c(ell) where string and broken string are degenerate at g=0."""
    if not isinstance(chain.kernel, Exponential):
        raise ValueError("closed-form breaking field requires the exponential "
                         "kernel; use lr_phase_boundaries for power laws")
    return g0_energy_gap(chain, 0.0) / (2.0 * chain.ell)


def g0_potentials(chain, h):
    """(V_s, V_bs): string and broken-string potentials vs the vacuum,
    including the static-charge contributions."""
    kernel = chain.kernel
    if not isinstance(kernel, Exponential):
        raise ValueError("g0 potentials are tabulated for the exponential kernel")
    ell = chain.ell
    x = np.exp(-1.0 / kernel.xi)
    a_s = 4.0 / (1.0 - x) ** 2
    b_s = -4.0 / (np.exp(1.0 / kernel.xi) - 1.0) ** 2
    a_bs = 8.0 / (1.0 - x)
    b_bs = -4.0
    decay = np.exp(-ell / kernel.xi)
    v_s = 2.0 * h * (ell + 2) + a_s + b_s * decay
    v_bs = 4.0 * h + a_bs + b_bs * decay
    return v_s, v_bs


def config_energy(chain, h, down_sites, convention="main"):
    """Energy of a classical configuration given the -z sites (0 and ell+1
    included), relative to the all-up infinite chain.

    convention="main" is the first-principles energy consistent with the
    J(d) normalization of the bulk Hamiltonian; "appendix" evaluates the
    alternative bookkeeping with J(d) ~ e^(-d/xi) used for the qualitative
    bubble-crossing figure.
    """
    sites = list(down_sites)
    if sorted(sites) != sites or len(set(sites)) != len(sites):
        raise ValueError("down_sites must be strictly ascending")
    if not sites or sites[0] != 0 or sites[-1] != chain.ell + 1:
        raise ValueError("down_sites must start at 0 and end at ell+1")
    if any(s < 0 or s > chain.ell + 1 for s in sites):
        raise ValueError("down_sites out of range")
    n = len(sites)
    kernel = chain.kernel
    if convention == "appendix":
        if not isinstance(kernel, Exponential):
            raise ValueError("appendix convention is defined for the "
                             "exponential kernel")
        xi = kernel.xi
        energy = 2.0 * n * (1.0 / (np.exp(1.0 / xi) - 1.0) + h)
        for a in range(n):
            for b in range(a + 1, n):
                energy -= 2.0 * np.exp(-(sites[b] - sites[a]) / xi)
        return energy
    # per -z spin: 2 * (coupling to the rest of the chain) + 2h;
    # per -z pair at distance d: -4 J(d)
    energy = n * (4.0 * kernel_tail(kernel, 1) + 2.0 * h)
    for a in range(n):
        for b in range(a + 1, n):
            energy -= 4.0 * coupling_strength(kernel, sites[b] - sites[a])
    return energy


def edge_block_energy(chain, h, n_down):
    """E_*(n_down, ell): n_down dynamical -z spins adjacent to one edge."""
    if not 0 <= n_down <= chain.ell:
        raise ValueError("n_down must lie in 0..ell")
    sites = [0] + list(range(1, n_down + 1)) + [chain.ell + 1]
    return config_energy(chain, h, sites)


def enumerate_sector_minimum(chain, h, n_down):
    """Brute-force minimizer of config_energy in the fixed-n sector.

    Returns the dynamical-spin bitstring (1 <-> +z) and asserts the
    minimizer is an edge-adjacent block or its mirror.
    """
    ell = chain.ell
    if ell > 14:
        raise ResourceError("sector enumeration is limited to ell <= 14")
    if not 0 <= n_down <= ell:
        raise ValueError("n_down must lie in 0..ell")
    best, best_combo = None, None
    for combo in combinations(range(1, ell + 1), n_down):
        energy = config_energy(chain, h, [0, *combo, ell + 1])
        if best is None or energy < best - 1e-12:
            best, best_combo = energy, combo
    left = tuple(range(1, n_down + 1))
    right = tuple(range(ell - n_down + 1, ell + 1))
    if best_combo not in (left, right):
        raise AssertionError(
            f"sector minimum {best_combo} is not an edge-adjacent block"
        )
    bits = np.ones(ell, dtype=np.int64)
    bits[[s - 1 for s in best_combo]] = 0
    return bits


def bubble_crossing_fields(chain, h_max=10.0, tol=1e-10):
    """h_c(r, ell): field where the size-r edge bubble crosses the string."""
    if not isinstance(chain.kernel, Exponential):
        raise ValueError("bubble crossings are defined for the exponential kernel")
    ell = chain.ell
    out = {}
    for r in range(1, ell + 1):
        def diff(h, r=r):
            return edge_block_energy(chain, h, ell - r) - edge_block_energy(chain, h, ell)

        lo, hi = 0.0, h_max
        if diff(lo) * diff(hi) > 0:
            raise SolverError(f"no bubble crossing bracketed for r={r}")
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            if diff(lo) * diff(mid) <= 0:
                hi = mid
            else:
                lo = mid
        out[r] = 0.5 * (lo + hi)
    return out


def _fix_phase(vec):
    k = np.argmax(np.abs(vec))
    phase = vec[k] / abs(vec[k])
    return vec / phase


def lowest_spectrum(ham, k, want_vectors=False, method="auto"):
    """k lowest eigenpairs of the matrix-free Hamiltonian.

    method="auto" uses a dense solver for dim <= 1024 and Lanczos
    (ARPACK, deterministic start vector) above; "dense"/"lanczos" force
    a path.
    """
    dim = ham.dim
    if not 1 <= k <= dim:
        raise ValueError(f"k={k} outside 1..{dim}")
    if method == "auto":
        method = "dense" if dim <= DENSE_DIM else "lanczos"
    if ham.g == 0.0:
        # diagonal operator: sort the classical energies
        order = np.argsort(ham.diag, kind="stable")[:k]
        energies = ham.diag[order]
        vectors = None
        if want_vectors:
            vectors = np.zeros((dim, k))
            vectors[order, np.arange(k)] = 1.0
    elif method == "dense" or k > dim - 2:
        energies, vectors = scipy.linalg.eigh(ham.dense())
        energies, vectors = energies[:k], vectors[:, :k]
    elif method == "lanczos":
        rng = np.random.default_rng(_EIGSH_SEED)
        v0 = rng.standard_normal(dim)
        try:
            energies, vectors = scipy.sparse.linalg.eigsh(
                ham.as_linear_operator(), k=k, which="SA", v0=v0,
                maxiter=50 * dim,
            )
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            raise SolverError(f"Lanczos did not converge: {exc}") from exc
        order = np.argsort(energies)
        energies, vectors = energies[order], vectors[:, order]
        for i in range(k):
            res = np.linalg.norm(ham.apply(vectors[:, i]) - energies[i] * vectors[:, i])
            if res > 1e-8:
                raise SolverError(f"eigenpair {i} residual {res:.2e} exceeds 1e-8")
    else:
        raise ValueError(f"unknown method {method!r}")
    mags = np.empty(k)
    if vectors is not None:
        for i in range(k):
            vectors[:, i] = _fix_phase(vectors[:, i])
            mags[i], _ = observables.magnetization(vectors[:, i])
    else:
        mags[:] = np.nan
    return SpectrumSlice(
        control=np.nan,
        energies=np.asarray(energies, dtype=float),
        magnetizations=mags,
        eigenvectors=vectors if want_vectors else None,
    )


def _golden_min(fn, lo, hi, tol):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    while b - a > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return 0.5 * (a + b)


def _lz_gap_model(x, xc, gap, slope):
    return 2.0 * np.sqrt(slope**2 * (x - xc) ** 2 + (gap / 2.0) ** 2)


def gap_function(chain, fixed, mode):
    """Returns f(control) -> (E0, E1) for scan_h (fixed g) or scan_g (fixed h)."""
    if mode not in ("scan_h", "scan_g"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode == "scan_h":
        fields0 = field_profile(chain, h=0.0, g=fixed)
        base = assemble_operator(chain, fields0)
        signs = observables._signs(chain.n_spins)
        stot = signs.sum(axis=1)

        def two_lowest(x):
            ham = type(base)(chain=base.chain, fields=base.fields,
                             diag=base.diag - x * stot,
                             flip_amplitude=base.flip_amplitude)
            sl = lowest_spectrum(ham, 2)
            return sl.energies[0], sl.energies[1]
    else:
        fields0 = field_profile(chain, h=fixed, g=0.0)
        base = assemble_operator(chain, fields0)

        def two_lowest(x):
            ham = type(base)(chain=base.chain, fields=base.fields,
                             diag=base.diag, flip_amplitude=-x)
            sl = lowest_spectrum(ham, 2)
            return sl.energies[0], sl.energies[1]

    return two_lowest


def locate_avoided_crossing(chain, fixed, scan, mode="scan_h",
                            coarse_points=201, xtol=1e-8):
    """Minimize E1-E0 over the control parameter and fit the two-level form.

    The minimum is bracketed on a coarse grid and refined by golden-section
    search; the gap curve is then least-squares fitted to
    2 sqrt(slope^2 (x-xc)^2 + (gap/2)^2) in a window +-5 gap/slope.
    """
    lo, hi = scan
    two_lowest = gap_function(chain, fixed, mode)

    def gap(x):
        e0, e1 = two_lowest(x)
        return e1 - e0

    grid = np.linspace(lo, hi, coarse_points)
    gaps = np.array([gap(x) for x in grid])
    imin = int(np.argmin(gaps))
    if imin in (0, coarse_points - 1):
        raise SolverError("no interior gap minimum in the scan interval")
    xc0 = _golden_min(gap, grid[imin - 1], grid[imin + 1], xtol)
    gap0 = gap(xc0)
    # slope seed from a secant away from the minimum
    dx = max((hi - lo) / 20.0, 10 * xtol)
    slope0 = max(abs(gap(xc0 + dx) - gap0) / (2.0 * dx), 1e-12)
    xc, gapc, slope = xc0, gap0, slope0
    # Window starts at +-5 gap/slope and is halved until the fit residual
    # shows no contamination from higher-level repulsion.
    scale = 5.0
    best = None
    for _ in range(6):
        half = scale * gapc / slope
        xs = np.linspace(max(lo, xc - half), min(hi, xc + half), 41)
        ys = np.array([gap(x) for x in xs])
        popt, _ = scipy.optimize.curve_fit(
            _lz_gap_model, xs, ys, p0=(xc, gapc, slope),
            bounds=([lo, 0.0, 0.0], [hi, np.inf, np.inf]),
        )
        xc, gapc, slope = popt
        resid = float(np.sqrt(np.mean((_lz_gap_model(xs, *popt) - ys) ** 2)))
        if best is None or resid < best[3]:
            best = (float(xc), float(gapc), float(slope), resid)
        if resid <= 1e-3 * gapc:
            break
        scale /= 2.0
    xc, gapc, slope, resid = best
    return CrossingFit(control_c=xc, gap_c=gapc, slope=slope, residual=resid)


def gap_length_scaling(kernel, g, ell_list, scan_width=0.5):
    """Fit Delta_c proportional to (g/b)^ell; returns (base b, prefactor).

    Each gap is measured at the respective avoided crossing h_c(ell, g),
    bracketed around the g=0 closed-form breaking field.
    """
    if len(ell_list) < 4:
        raise ValueError("need at least 4 lengths for the scaling fit")
    ells, loggaps = [], []
    for ell in ell_list:
        chain = ChainSpec(ell=ell, kernel=kernel)
        hc0 = g0_breaking_field(chain)
        fit = locate_avoided_crossing(
            chain, g, (hc0 * (1 - scan_width), hc0 * (1 + scan_width)),
            mode="scan_h", coarse_points=41,
        )
        if fit.gap_c < 1e-13:
            warnings.warn(f"gap at ell={ell} below 1e-13; point excluded")
            continue
        ells.append(ell)
        loggaps.append(np.log(fit.gap_c))
    slope, intercept = np.polyfit(ells, loggaps, 1)
    base = g / np.exp(slope)
    return float(base), float(np.exp(intercept))


def _bisect(fn, lo, hi, tol):
    flo = fn(lo)
    if flo * fn(hi) > 0:
        raise SolverError("root not bracketed")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if flo * fn(mid) <= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def lr_phase_boundaries(alpha_grid, ell_max=200):
    """alpha window for finite string-breaking length, plus ell_c(alpha).

    alpha_min solves zeta(alpha) = 2; alpha_max solves
    2 zeta(alpha) = zeta(alpha - 1). ell_c(alpha) is the largest ell with
    E_bs - E_s > 0 at h = 0 (ties count as stable), or inf beyond ell_max.
    """
    alpha_min = _bisect(lambda a: zeta_fn(a) - 2.0, 1.3, 2.3, 1e-8)
    alpha_max = _bisect(lambda a: 2.0 * zeta_fn(a) - zeta_fn(a - 1.0), 2.05, 3.0, 1e-8)
    table = {}
    for alpha in alpha_grid:
        if alpha <= 1.0:
            raise ValueError("alpha grid values must exceed 1")
        lc = 0
        for ell in range(1, ell_max + 1):
            gap = g0_energy_gap(ChainSpec(ell=ell, kernel=PowerLaw(alpha=alpha)))
            if gap >= 0.0:
                lc = ell
            else:
                break
        table[float(alpha)] = math.inf if lc == ell_max else lc
    return PhaseBoundary(alpha_min=alpha_min, alpha_max=alpha_max, lc_table=table)


def perturbative_energies(chain, g):
    """Second-order string and broken-string energies at h = 0."""
    ell = chain.ell
    kernel = chain.kernel
    fields = field_profile(chain, h=0.0, g=0.0)
    h_eff = fields.h_eff
    h_tilde = np.array([
        sum(coupling_strength(kernel, abs(j - k))
            for k in range(1, ell + 1) if k != j)
        for j in range(1, ell + 1)
    ])
    if np.any(np.abs(h_tilde + h_eff) < 1e-12) or np.any(np.abs(h_tilde - h_eff) < 1e-12):
        raise SolverError("degenerate level: vanishing perturbative denominator")
    e_s0 = diagonal_energy(chain, fields, np.zeros(ell, dtype=np.int64))
    e_bs0 = diagonal_energy(chain, fields, np.ones(ell, dtype=np.int64))
    e_s = e_s0 - g**2 / 2.0 * np.sum(1.0 / (h_tilde + h_eff))
    e_bs = e_bs0 - g**2 / 2.0 * np.sum(1.0 / (h_tilde - h_eff))
    return float(e_s), float(e_bs)


@dataclass
class PotentialCurve:
    ells: list
    v_ground: list
    v_excited: list
    ell_c: int | None  # largest ell with string-like (m_z < 0) ground state


def static_potential_curve(kernel, g, h, ell_list):
    """V(ell) = E_level(ell) - E0_vac(ell) for the two lowest levels.

    The vacuum reference replaces the boundary-charge field with the
    no-charge field at the same (g, h). ell_c marks where the ground state
    loses its string character (magnetization sign change).
    """
    ells, vg, ve = [], [], []
    ell_c = None
    for ell in ell_list:
        chain = ChainSpec(ell=ell, kernel=kernel, boundary=StaticExternal())
        ham = assemble_operator(chain, field_profile(chain, h=h, g=g))
        sl = lowest_spectrum(ham, 2, want_vectors=True)
        ham_vac = assemble_operator(chain, field_profile(chain, h=h, g=g, vacuum=True))
        e_vac = lowest_spectrum(ham_vac, 1).energies[0]
        ells.append(ell)
        vg.append(float(sl.energies[0] - e_vac + 4.0 * h))
        ve.append(float(sl.energies[1] - e_vac + 4.0 * h))
        if sl.magnetizations[0] < 0.0:
            ell_c = ell
    return PotentialCurve(ells=ells, v_ground=vg, v_excited=ve, ell_c=ell_c)
