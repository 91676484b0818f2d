"""One recipe per figure layout, consuming the documented CSV schemas."""

from dataclasses import dataclass, field

import numpy as np
import matplotlib.pyplot as plt

from .render import long_form_heatmap, spacetime_heatmap


@dataclass(frozen=True)
class InputSpec:
    filename: str
    required: tuple = ()
    prefixes: tuple = ()


@dataclass(frozen=True)
class FigureRecipe:
    figure_id: str
    inputs: dict  # role -> InputSpec
    output: str = ""
    builder: callable = None
    json_inputs: dict = field(default_factory=dict)  # role -> (file, keys)

    def __post_init__(self):
        if not self.output:
            object.__setattr__(self, "output", f"{self.figure_id}.svg")


def _fit_guide(ax, x, y, logx=True, logy=True):
    """Straight-line least-squares guide on the plotted scale."""
    mask = np.isfinite(x) & np.isfinite(y)
    if logy:
        mask &= y > 0
    if logx:
        mask &= x > 0
    if mask.sum() < 2:
        return
    u = np.log(x[mask]) if logx else x[mask]
    v = np.log(y[mask]) if logy else y[mask]
    slope, intercept = np.polyfit(u, v, 1)
    xs = np.linspace(u.min(), u.max(), 50)
    ys = slope * xs + intercept
    ax.plot(np.exp(xs) if logx else xs, np.exp(ys) if logy else ys,
            "k--", linewidth=1.0)


def build_fig2(tables):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.2, 3.0),
                                   constrained_layout=True)
    spec = tables["spectrum"]
    h = spec.col("control")
    names, energies = spec.prefixed("E_")
    for name, col in zip(names, energies.T):
        ax1.plot(h, col, label=name)
    ax1.set_xlabel("h")
    ax1.set_ylabel("E")
    ax1.legend(fontsize=7)
    gs = tables["gapscaling"]
    ax2.plot(gs.col("ell"), gs.col("gap_c"), "o")
    _fit_guide(ax2, gs.col("ell"), gs.col("gap_c"), logx=False)
    ax2.set_yscale("log")
    ax2.set_xlabel("ell")
    ax2.set_ylabel("minimal gap")
    return fig


def build_fig3(tables):
    ramp = tables["ramp"]
    fig, axes = plt.subplots(3, 1, figsize=(4.2, 6.0), sharex=True,
                             constrained_layout=True)
    x = ramp.col("control")
    axes[0].plot(x, ramp.col("m_z"))
    axes[0].set_ylabel("m_z")
    names, pops = ramp.prefixed("P_")
    for name, col in zip(names, pops.T):
        axes[1].plot(x, col, label=name)
    axes[1].set_ylabel("populations")
    axes[1].legend(fontsize=7)
    axes[2].plot(x, ramp.col("C"))
    axes[2].set_ylabel("C")
    axes[2].set_xlabel("h(t)")
    return fig


def build_fig4(tables):
    roles = ["lzsweep_l5", "lzsweep_l7", "lzsweep_l9"]
    fig, axes = plt.subplots(1, 3, figsize=(8.4, 2.8), sharey=True,
                             constrained_layout=True)
    for ax, role in zip(axes, roles):
        t = tables[role]
        tau = t.col("tau")
        ax.plot(tau, t.col("P1_final"), "o-", label="P1")
        ax.plot(tau, t.col("P_LZ"), ":", label="P_LZ")
        ax.plot(tau, t.col("P_m"), "--", label="P_m")
        ax.set_xscale("log")
        ax.set_xlabel("tau")
        ax.set_title(role.split("_")[-1])
    axes[0].set_ylabel("transition probability")
    axes[0].legend(fontsize=7)
    return fig


def build_fig5(tables):
    ramp = tables["ramp"]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(4.6, 5.0),
                                   constrained_layout=True)
    ax1.plot(ramp.col("control"), ramp.col("V"))
    ax1.set_xlabel("h(t)")
    ax1.set_ylabel("V")
    _, profile = ramp.prefixed("mz_site_")
    spacetime_heatmap(ax2, ramp.col("t"), profile, "site")
    return fig


def build_fig6(tables):
    roles = sorted(tables)
    fig, axes = plt.subplots(1, len(roles), figsize=(3.4 * len(roles), 2.8),
                             constrained_layout=True)
    axes = np.atleast_1d(axes)
    for ax, role in zip(axes, roles):
        t = tables[role]
        long_form_heatmap(ax, t.col("t"), t.col("r"), t.col("P_d"),
                          "t", "bubble size r")
        ax.set_title(role)
    return fig


def build_fig7(tables):
    fig, ax = plt.subplots(figsize=(4.0, 3.0), constrained_layout=True)
    for role in sorted(tables):
        t = tables[role]
        ax.plot(t.col("r"), t.col("h_c"), "o-", label=role)
    ax.set_xlabel("bubble size r")
    ax.set_ylabel("crossing field h_c(r)")
    ax.legend(fontsize=7)
    return fig


def build_fig8(tables, meta):
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(7.2, 3.0),
                                   constrained_layout=True)
    collapse = tables["collapse"]
    taus = np.unique(collapse.col("tau"))
    for tau in taus:
        mask = collapse.col("tau") == tau
        ax1.plot(collapse.col("x_rescaled")[mask], collapse.col("m_z")[mask],
                 label=f"tau={tau:g}")
    ax1.set_xlabel("(h - h_c) tau^(-exponent)")
    ax1.set_ylabel("m_z")
    ax1.legend(fontsize=7)
    hsb = tables["hsb"]
    h_c = meta["scaling"]["h_c"]
    delta = hsb.col("h_sb") - h_c
    ax2.plot(hsb.col("tau"), delta, "o")
    _fit_guide(ax2, hsb.col("tau"), delta)
    ax2.set_xscale("log")
    ax2.set_yscale("log")
    ax2.set_xlabel("tau")
    ax2.set_ylabel("h_sb - h_c")
    return fig


def build_fig9(tables):
    fig, ax = plt.subplots(figsize=(4.2, 3.0), constrained_layout=True)
    for role in sorted(tables):
        t = tables[role]
        ax.plot(t.col("ell"), t.col("V_ground"), "o-", label=f"{role} ground")
        ax.plot(t.col("ell"), t.col("V_excited"), "s--",
                label=f"{role} excited")
    ax.set_xlabel("ell")
    ax.set_ylabel("V")
    ax.legend(fontsize=7)
    return fig


def build_fig10(tables):
    ramp = tables["ramp"]
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(4.2, 4.6), sharex=True,
                                   constrained_layout=True)
    x = ramp.col("control")
    ax1.plot(x, ramp.col("m_z"))
    ax1.set_ylabel("m_z")
    names, pops = ramp.prefixed("P_")
    for name, col in zip(names, pops.T):
        ax2.plot(x, col, label=name)
    ax2.set_ylabel("populations")
    ax2.set_xlabel("g(t)")
    ax2.legend(fontsize=7)
    return fig


def build_fig11(tables):
    ramp = tables["ramp"]
    fig, ax = plt.subplots(figsize=(4.6, 3.0), constrained_layout=True)
    _, profile = ramp.prefixed("mz_site_")
    spacetime_heatmap(ax, ramp.col("t"), profile, "site")
    return fig


def build_fig12(tables):
    t = tables["lrphase"]
    fig, ax = plt.subplots(figsize=(4.0, 3.0), constrained_layout=True)
    alpha = t.col("alpha")
    lc = t.col("ell_c")
    finite = np.isfinite(lc)
    ax.plot(alpha[finite], lc[finite], "o-")
    if np.any(~finite):
        ax.axvline(alpha[~finite].min(), color="k", linestyle=":",
                   linewidth=1.0)
    ax.set_yscale("log")
    ax.set_xlabel("alpha")
    ax.set_ylabel("critical length")
    return fig


def build_fig13(tables):
    fig, axes = plt.subplots(1, 2, figsize=(7.2, 2.8),
                             constrained_layout=True)
    for ax, role in zip(axes, ["static", "dynamical"]):
        t = tables[role]
        _, profile = t.prefixed("mz_site_")
        spacetime_heatmap(ax, t.col("t"), profile, "site")
        ax.set_title(role)
    return fig


_RAMP_SPEC = InputSpec("ramp.csv", required=("t", "control", "m_z", "C"),
                       prefixes=("mz_site_", "P_"))
_BUBBLE_SPEC = InputSpec("bubbles.csv", required=("t", "r", "P_d"))

RECIPES = {
    "fig2": FigureRecipe("fig2", {
        "spectrum": InputSpec("fig2/spectrum.csv", required=("control",),
                              prefixes=("E_", "m_")),
        "gapscaling": InputSpec("fig2/gapscaling.csv",
                                required=("ell", "gap_c")),
    }, builder=build_fig2),
    "fig3": FigureRecipe("fig3", {
        "ramp": InputSpec("fig3/ramp.csv", _RAMP_SPEC.required,
                          _RAMP_SPEC.prefixes),
    }, builder=build_fig3),
    "fig4": FigureRecipe("fig4", {
        f"lzsweep_l{ell}": InputSpec(
            f"fig4/lzsweep_l{ell}.csv",
            required=("tau", "P1_final", "P_LZ", "P_m"))
        for ell in (5, 7, 9)
    }, builder=build_fig4),
    "fig5": FigureRecipe("fig5", {
        "ramp": InputSpec("fig5/ramp.csv",
                          required=("t", "control", "V"),
                          prefixes=("mz_site_",)),
    }, builder=build_fig5),
    "fig6": FigureRecipe("fig6", {
        "ell5": InputSpec("fig6/bubbles_l5.csv", _BUBBLE_SPEC.required),
        "ell7": InputSpec("fig6/bubbles_l7.csv", _BUBBLE_SPEC.required),
    }, builder=build_fig6),
    "fig7": FigureRecipe("fig7", {
        "ell5": InputSpec("fig7/crossing_fields_l5.csv",
                          required=("r", "h_c")),
        "ell7": InputSpec("fig7/crossing_fields_l7.csv",
                          required=("r", "h_c")),
    }, builder=build_fig7),
    "fig8": FigureRecipe("fig8", {
        "hsb": InputSpec("fig8/hsb.csv", required=("tau", "h_sb")),
        "collapse": InputSpec("fig8/collapse.csv",
                              required=("tau", "x_rescaled", "m_z")),
    }, builder=build_fig8,
        json_inputs={"scaling": ("fig8/metadata.json", ("h_c", "exponent"))}),
    "fig9": FigureRecipe("fig9", {
        "g0": InputSpec("fig9/lrpotential_g0.csv",
                        required=("ell", "V_ground", "V_excited")),
        "g1": InputSpec("fig9/lrpotential_g1.csv",
                        required=("ell", "V_ground", "V_excited")),
    }, builder=build_fig9),
    "fig10": FigureRecipe("fig10", {
        "ramp": InputSpec("fig10/ramp.csv", required=("t", "control", "m_z"),
                          prefixes=("P_",)),
    }, builder=build_fig10),
    "fig11": FigureRecipe("fig11", {
        "ramp": InputSpec("fig10/ramp.csv", required=("t",),
                          prefixes=("mz_site_",)),
    }, builder=build_fig11),
    "fig12": FigureRecipe("fig12", {
        "lrphase": InputSpec("fig12/lrphase.csv", required=("alpha", "ell_c")),
    }, builder=build_fig12),
    "fig13": FigureRecipe("fig13", {
        "static": InputSpec("fig13/extended_static.csv", required=("t",),
                            prefixes=("mz_site_",)),
        "dynamical": InputSpec("fig13/extended_dynamical.csv",
                               required=("t",), prefixes=("mz_site_",)),
    }, builder=build_fig13),
}
