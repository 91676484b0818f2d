"""Regenerate the golden CSV inputs for the figure recipes.

Runs small, fast parameter sets through the stringbreak CLI; the outputs
are committed so `make figures` works without recomputing physics.
"""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

GOLDEN = Path(__file__).parent / "golden"

RUNS = {
    "fig2": [
        ["spectrum", "--kernel=exp", "--xi=1.0", "--ell=5", "--g=1.2",
         "--h_min=0", "--h_max=0.5", "--points=41", "--k=4"],
        ["gapscaling", "--kernel=exp", "--xi=1.0", "--ells=5,6,7,8", "--g=1.2"],
    ],
    "fig3": [
        ["ramp", "--kernel=exp", "--xi=1.0", "--ell=5", "--g=1.2", "--tau=5",
         "--x_f=0.5", "--sample_count=41", "--k=2"],
    ],
    "fig4": [
        ["lzsweep", "--kernel=exp", "--xi=1.0", "--ell=5", "--g=1.2",
         "--taus=4,6,10,20,40", "--x_f=0.5", "--scan_min=0.15",
         "--scan_max=0.35", "__rename__lzsweep.csv=lzsweep_l5.csv"],
        ["lzsweep", "--kernel=exp", "--xi=1.0", "--ell=7", "--g=1.2",
         "--taus=5.6,10,20,40", "--x_f=0.36", "--scan_min=0.12",
         "--scan_max=0.26", "__rename__lzsweep.csv=lzsweep_l7.csv"],
        ["lzsweep", "--kernel=exp", "--xi=1.0", "--ell=9", "--g=1.2",
         "--taus=7.1,15,40", "--x_f=0.28", "--scan_min=0.09",
         "--scan_max=0.19", "__rename__lzsweep.csv=lzsweep_l9.csv"],
    ],
    "fig5": [
        ["ramp", "--kernel=exp", "--xi=1.0", "--ell=5", "--g=1.2", "--tau=10",
         "--x_f=0.6", "--sample_count=41", "--k=0", "--potential=1"],
    ],
    "fig6": [
        ["bubbles", "--kernel=exp", "--xi=1.0", "--ell=5", "--g=1.2",
         "--tau=10", "--x_f=1.0", "--sample_count=41",
         "__rename__bubbles.csv=bubbles_l5.csv"],
        ["bubbles", "--kernel=exp", "--xi=1.0", "--ell=7", "--g=1.2",
         "--tau=10", "--x_f=1.0", "--sample_count=41",
         "__rename__bubbles.csv=bubbles_l7.csv"],
    ],
    "fig7": [
        ["bubbles", "--kernel=exp", "--xi=1.0", "--ell=5", "--g=1.2",
         "--tau=5", "--x_f=1.0", "--sample_count=11",
         "__rename__crossing_fields.csv=crossing_fields_l5.csv"],
        ["bubbles", "--kernel=exp", "--xi=1.0", "--ell=7", "--g=1.2",
         "--tau=5", "--x_f=1.0", "--sample_count=11",
         "__rename__crossing_fields.csv=crossing_fields_l7.csv"],
    ],
    "fig8": [
        ["scaling", "--kernel=exp", "--xi=1.0", "--ell=5", "--g=1.2",
         "--taus=5,8,12,20,35,60", "--x_f=1.0", "--h_c=0.2521",
         "--sample_count=101"],
    ],
    "fig9": [
        ["lrpotential", "--kernel=powerlaw", "--alpha=2.2", "--g=0.0",
         "--ells=3,4,5,6,7,8,9", "__rename__lrpotential.csv=lrpotential_g0.csv"],
        ["lrpotential", "--kernel=powerlaw", "--alpha=2.2", "--g=1.0",
         "--ells=3,4,5,6,7,8,9", "__rename__lrpotential.csv=lrpotential_g1.csv"],
    ],
    "fig10": [
        ["ramp", "--kernel=powerlaw", "--alpha=2.2", "--ell=7", "--mode=g",
         "--h=0.0", "--tau=10", "--x_f=1.2", "--sample_count=41", "--k=2"],
    ],
    "fig12": [
        ["lrphase", "--alphas=1.75,1.8,1.9,2.0,2.1,2.2,2.3,2.4,2.45,2.5",
         "--ell_max=100"],
    ],
    "fig13": [
        ["extended", "--tau=5", "--g=1.2", "--sample_count=41"],
    ],
}


def main():
    for fid, runs in RUNS.items():
        dest = GOLDEN / fid
        dest.mkdir(parents=True, exist_ok=True)
        for run in runs:
            args = [a for a in run if not a.startswith("__rename__")]
            renames = dict(a[len("__rename__"):].split("=", 1)
                           for a in run if a.startswith("__rename__"))
            with tempfile.TemporaryDirectory() as tmp:
                cmd = ["stringbreak", *args, f"--outdir={tmp}"]
                print("+", " ".join(cmd[:4]), "...", flush=True)
                subprocess.run(cmd, check=True)
                for src in Path(tmp).iterdir():
                    shutil.copy(src, dest / renames.get(src.name, src.name))
    return 0


if __name__ == "__main__":
    sys.exit(main())
