"""Time propagation through linear field ramps and the derived observables."""

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import observables
from .model import (
    ChainSpec,
    DynamicalExternal,
    Exponential,
    HamiltonianSpec,
    StaticExternal,
    StringBreakError,
    assemble_operator,
    field_profile,
)
from .statics import lowest_spectrum


class PropagationError(StringBreakError):
    pass


# Gauss nodes and weights of the fourth-order commutator-free scheme
_CF_C1 = 0.5 - math.sqrt(3.0) / 6.0
_CF_C2 = 0.5 + math.sqrt(3.0) / 6.0
_CF_X1 = (3.0 - 2.0 * math.sqrt(3.0)) / 12.0
_CF_X2 = (3.0 + 2.0 * math.sqrt(3.0)) / 12.0


@dataclass(frozen=True)
class RampSchedule:
    """Linear ramp control(t) = t/tau up to x_f, sampled uniformly in control."""

    mode: str  # "h" (fixed g) or "g" (fixed h)
    fixed: float
    x_f: float
    tau: float
    sample_count: int = 201

    def __post_init__(self):
        if self.mode not in ("h", "g"):
            raise ValueError(f"mode must be 'h' or 'g', got {self.mode!r}")
        if self.tau <= 0 or self.x_f <= 0:
            raise ValueError("tau and x_f must be positive")
        if self.sample_count < 2:
            raise ValueError("need at least two samples")

    @property
    def t_final(self):
        return self.tau * self.x_f


@dataclass(frozen=True)
class PropagatorConfig:
    step_dt: float = 0.01
    krylov_dim: int = 20
    norm_tol: float = 1e-10
    convergence_tol: float = 1e-6


class RampFamily:
    """Hamiltonians along a ramp, with the control-dependent part factored out."""

    def __init__(self, chain, mode, fixed, vacuum=False):
        self.chain = chain
        self.mode = mode
        self.fixed = float(fixed)
        self.vacuum = vacuum
        if mode == "h":
            fields = field_profile(chain, h=0.0, g=self.fixed, vacuum=vacuum)
            self._base = assemble_operator(chain, fields)
            signs = observables._signs(chain.n_spins)
            self._stot = signs.sum(axis=1)
        elif mode == "g":
            fields = field_profile(chain, h=self.fixed, g=0.0, vacuum=vacuum)
            self._base = assemble_operator(chain, fields)
            self._stot = None
        else:
            raise ValueError(f"mode must be 'h' or 'g', got {mode!r}")

    def diag_g(self, x):
        """(diagonal vector, transverse field) at control value x."""
        if self.mode == "h":
            return self._base.diag - x * self._stot, self.fixed
        return self._base.diag, x

    def spec(self, x):
        diag, g = self.diag_g(x)
        return HamiltonianSpec(chain=self.chain, fields=self._base.fields,
                               diag=diag, flip_amplitude=-g)

    def h_value(self, x):
        return x if self.mode == "h" else self.fixed


def krylov_expm_apply(diag, g, psi, dt, m):
    """exp(-i dt H) psi via a Lanczos subspace of dimension <= m.

    H is real symmetric, so the projected matrix is tridiagonal with real
    entries; full reorthogonalization keeps the basis clean. The map is
    unitary on the subspace, hence norm-preserving to roundoff.
    """
    from .kernels import apply_ising

    dim = psi.size
    m = min(m, dim)
    basis = np.empty((m, dim), dtype=np.complex128)
    alphas = np.empty(m)
    betas = np.empty(m)
    nrm = np.linalg.norm(psi)
    basis[0] = psi / nrm
    work = np.empty(dim, dtype=np.complex128)
    m_eff = m
    for j in range(m):
        apply_ising(diag, g, basis[j], work)
        alphas[j] = np.real(np.vdot(basis[j], work))
        work -= alphas[j] * basis[j]
        if j > 0:
            work -= betas[j - 1] * basis[j - 1]
        # full reorthogonalization
        for i in range(j + 1):
            work -= np.vdot(basis[i], work) * basis[i]
        beta = np.linalg.norm(work)
        betas[j] = beta
        if j + 1 < m:
            if beta < 1e-14:
                m_eff = j + 1
                break
            basis[j + 1] = work / beta
    evals, evecs = scipy.linalg.eigh_tridiagonal(
        alphas[:m_eff], betas[: m_eff - 1]
    )
    small = evecs @ (np.exp(-1j * dt * evals) * evecs[0, :])
    return nrm * (small @ basis[:m_eff])


@dataclass
class RampResult:
    schedule: RampSchedule
    config: PropagatorConfig
    chain: ChainSpec
    t: np.ndarray = None
    control: np.ndarray = None
    m_z: np.ndarray = None
    profile: np.ndarray = None  # (samples, n_spins)
    correlator: np.ndarray = None
    bubbles: np.ndarray = None  # (samples, n_spins + 1)
    populations: np.ndarray | None = None  # (samples, k)
    p_other: np.ndarray | None = None
    potential: np.ndarray | None = None
    norm_error: np.ndarray = None
    final_state: np.ndarray = None


def propagate_ramp(family, schedule, config=None, initial=None,
                   k_levels=8, want_potential=False, vacuum_family=None):
    """Integrate the time-dependent Schroedinger equation along the ramp.

    Fourth-order commutator-free exponential stepping: each substep applies
    two half-step Krylov exponentials of the Hamiltonian evaluated at
    Gauss-node combinations of the control, which is exact in structure
    because H is affine in the ramped parameter. Observables are recorded
    at the schedule's samples; instantaneous populations need k_levels > 0
    and the potential needs want_potential (static boundaries only).
    """
    config = config or PropagatorConfig()
    chain = family.chain
    if initial is None:
        sl0 = lowest_spectrum(family.spec(0.0), 1, want_vectors=True)
        psi = sl0.eigenvectors[:, 0].astype(np.complex128)
    else:
        psi = np.asarray(initial, dtype=np.complex128).copy()
    if want_potential and vacuum_family is None:
        if not isinstance(chain.boundary, StaticExternal):
            raise ValueError("potential needs a vacuum reference; static "
                             "boundaries only")
        vacuum_family = RampFamily(chain, family.mode, family.fixed, vacuum=True)

    ns = schedule.sample_count
    xs = np.linspace(0.0, schedule.x_f, ns)
    ts = schedule.tau * xs
    n = chain.n_spins
    res = RampResult(schedule=schedule, config=config, chain=chain)
    res.t, res.control = ts, xs
    res.m_z = np.empty(ns)
    res.profile = np.empty((ns, n))
    res.correlator = np.empty(ns)
    res.bubbles = np.empty((ns, n + 1))
    res.norm_error = np.empty(ns)
    if k_levels > 0:
        res.populations = np.empty((ns, k_levels))
        res.p_other = np.empty(ns)
    if want_potential:
        res.potential = np.empty(ns)

    for s in range(ns):
        if s > 0:
            t0, t1 = ts[s - 1], ts[s]
            n_sub = max(1, math.ceil((t1 - t0) / config.step_dt))
            dt = (t1 - t0) / n_sub
            for q in range(n_sub):
                xa = (t0 + (q + _CF_C1) * dt) / schedule.tau
                xb = (t0 + (q + _CF_C2) * dt) / schedule.tau
                for x_eff in (2.0 * (_CF_X2 * xa + _CF_X1 * xb),
                              2.0 * (_CF_X1 * xa + _CF_X2 * xb)):
                    diag, g = family.diag_g(x_eff)
                    psi = krylov_expm_apply(diag, g, psi, 0.5 * dt,
                                            config.krylov_dim)
        res.norm_error[s] = abs(np.linalg.norm(psi) - 1.0)
        if res.norm_error[s] > config.norm_tol:
            raise PropagationError(
                f"norm drift {res.norm_error[s]:.2e} at sample {s}; "
                "reduce step_dt"
            )
        res.m_z[s], res.profile[s] = observables.magnetization(psi)
        res.correlator[s] = observables.connected_correlator(psi)
        res.bubbles[s] = observables.bubble_histogram(psi)
        x = xs[s]
        if k_levels > 0:
            sl = lowest_spectrum(family.spec(x), k_levels, want_vectors=True)
            pops = observables.instantaneous_populations(psi, sl)
            res.populations[s] = pops
            res.p_other[s] = max(0.0, 1.0 - pops[: min(2, k_levels)].sum())
        if want_potential:
            ham = family.spec(x)
            energy = float(np.real(np.vdot(psi, ham.apply(psi))))
            e_vac = lowest_spectrum(vacuum_family.spec(x), 1).energies[0]
            res.potential[s] = energy - e_vac + 4.0 * family.h_value(x)
    res.final_state = psi
    return res


def landau_zener_probability(gap_c, slope, tau):
    """Diabatic transition probability exp(-pi gap^2 tau / (4 slope))."""
    if slope <= 0:
        raise ValueError("slope must be positive")
    return float(np.exp(-np.pi * gap_c**2 * tau / (4.0 * slope)))


def lz_timescale(gap_c, slope):
    """tau_* = 4 slope / (pi gap^2), where P_LZ = 1/e."""
    return float(4.0 * slope / (np.pi * gap_c**2))


def magnetization_population_estimate(m_z0, m_zf):
    """P_m = (m_z0 + m_zf) / (2 m_z0), from endpoint magnetizations."""
    if m_z0 == 0.0:
        raise ValueError("undefined estimate: initial magnetization is zero")
    return (m_z0 + m_zf) / (2.0 * m_z0)


def dynamical_potential(state, chain, h_now, g):
    """V = <H> - E0_vac + 4h at the instantaneous field values."""
    ham = assemble_operator(chain, field_profile(chain, h=h_now, g=g))
    energy = float(np.real(np.vdot(state, ham.apply(np.asarray(state, dtype=np.complex128)))))
    ham_vac = assemble_operator(chain, field_profile(chain, h=h_now, g=g, vacuum=True))
    e_vac = lowest_spectrum(ham_vac, 1).energies[0]
    return energy - e_vac + 4.0 * h_now


def locate_sign_change(result):
    """First control value where m_z crosses zero (linear interpolation).

    Returns (first, all_crossings); first is None when m_z never changes
    sign, which is a valid outcome for very diabatic ramps.
    """
    x, m = result.control, result.m_z
    crossings = []
    for i in range(1, len(m)):
        if m[i - 1] == 0.0:
            crossings.append(float(x[i - 1]))
        elif m[i - 1] * m[i] < 0.0:
            frac = m[i - 1] / (m[i - 1] - m[i])
            crossings.append(float(x[i - 1] + frac * (x[i] - x[i - 1])))
    return (crossings[0] if crossings else None), crossings


def scaling_fit(pairs, h_c):
    """Power-law fit h_sb - h_c = prefactor * tau^exponent (log-log LSQ)."""
    taus, deltas = [], []
    for tau, h_sb in pairs:
        if h_sb - h_c <= 0:
            warnings.warn(f"h_sb <= h_c at tau={tau}; point excluded")
            continue
        taus.append(tau)
        deltas.append(h_sb - h_c)
    if len(taus) < 5:
        raise ValueError("need at least 5 usable (tau, h_sb) pairs")
    exponent, logpref = np.polyfit(np.log(taus), np.log(deltas), 1)
    return float(np.exp(logpref)), float(exponent)


def collapse_curves(results, h_c, exponent):
    """Rescaled (x, m_z) curves: x = (control - h_c) * tau^(-exponent)."""
    out = []
    for res in results:
        x = (res.control - h_c) * res.schedule.tau ** (-exponent)
        out.append((res.schedule.tau, x, res.m_z.copy()))
    return out


@dataclass
class ExtendedComparison:
    static_result: RampResult
    dynamical_result: RampResult
    inner_slice: slice
    max_inner_difference: float


def run_extended_chain(tau, g, xi=1.0, ell=5, n_ext=3, h_f=1.0,
                       config=None, sample_count=101):
    """Same h ramp with static vs dynamical external spins (inner-profile check)."""
    kernel = Exponential(xi=xi)
    sched = RampSchedule(mode="h", fixed=g, x_f=h_f, tau=tau,
                         sample_count=sample_count)
    chain_s = ChainSpec(ell=ell, kernel=kernel, boundary=StaticExternal())
    res_s = propagate_ramp(RampFamily(chain_s, "h", g), sched, config,
                           k_levels=0)
    chain_d = ChainSpec(ell=ell, kernel=kernel,
                        boundary=DynamicalExternal(n_ext=n_ext))
    res_d = propagate_ramp(RampFamily(chain_d, "h", g), sched, config,
                           k_levels=0)
    inner = slice(n_ext, n_ext + ell)
    diff = np.max(np.abs(res_d.profile[:, inner] - res_s.profile))
    return ExtendedComparison(static_result=res_s, dynamical_result=res_d,
                              inner_slice=inner, max_inner_difference=float(diff))
