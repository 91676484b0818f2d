"""CSV/JSON loading with schema checks and deterministic SVG rendering."""

import csv
import json
from pathlib import Path

import matplotlib
import numpy as np

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

# one house style for every figure; nothing here depends on the data
STYLE = {
    "figure.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.4,
    "image.cmap": "viridis",
    "svg.hashsalt": "stringbreak-figs",
    "svg.fonttype": "path",
}


class SchemaError(RuntimeError):
    pass


class Table:
    def __init__(self, path, columns, data):
        self.path = path
        self.columns = columns
        self._data = data  # (rows, cols) float array, possibly 0 rows

    def col(self, name):
        return self._data[:, self.columns.index(name)]

    def prefixed(self, prefix):
        """(names, matrix) for every column starting with the prefix."""
        names = [c for c in self.columns if c.startswith(prefix)]
        idx = [self.columns.index(c) for c in names]
        return names, self._data[:, idx]


def load_table(path, required=(), prefixes=()):
    """Read a CSV, insisting on named columns and column-family prefixes."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: input file missing")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file, no header row") from None
        rows = [[float(v) for v in row] for row in reader if row]
    for name in required:
        if name not in header:
            raise SchemaError(f"{path}: missing required column {name!r}")
    for prefix in prefixes:
        if not any(c.startswith(prefix) for c in header):
            raise SchemaError(
                f"{path}: no column matching prefix {prefix!r}"
            )
    data = np.array(rows, dtype=float).reshape(len(rows), len(header))
    return Table(path, header, data)


def load_json_artifact(path, required_keys):
    """Derived-values block of a run's metadata JSON, with key checks."""
    path = Path(path)
    if not path.exists():
        raise SchemaError(f"{path}: input file missing")
    derived = json.loads(path.read_text()).get("derived", {})
    for key in required_keys:
        if key not in derived:
            raise SchemaError(f"{path}: missing derived key {key!r}")
    return derived


def spacetime_heatmap(ax, t, site_matrix, label):
    """Site index vs time heat map; tolerates zero samples."""
    if site_matrix.size:
        ax.imshow(site_matrix.T, aspect="auto", origin="lower",
                  vmin=-1.0, vmax=1.0,
                  extent=(t[0], t[-1], 0.5, site_matrix.shape[1] + 0.5))
    ax.set_xlabel("t")
    ax.set_ylabel(label)


def long_form_heatmap(ax, t, r, w, xlabel, ylabel):
    """Heat map from long-form (t, r, weight) triples on a regular grid."""
    if t.size:
        ts = np.unique(t)
        rs = np.unique(r)
        grid = np.zeros((rs.size, ts.size))
        ti = np.searchsorted(ts, t)
        ri = np.searchsorted(rs, r)
        grid[ri, ti] = w
        ax.imshow(grid, aspect="auto", origin="lower", vmin=0.0, vmax=1.0,
                  extent=(ts[0], ts[-1], rs[0] - 0.5, rs[-1] + 0.5))
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)


def render_figure(recipe, data_dir, out_dir):
    """Render one recipe; returns the output path. Deterministic output:
    fixed style, salted SVG ids, no embedded timestamps."""
    data_dir = Path(data_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    tables = {
        role: load_table(data_dir / spec.filename, spec.required, spec.prefixes)
        for role, spec in recipe.inputs.items()
    }
    meta = {
        role: load_json_artifact(data_dir / filename, keys)
        for role, (filename, keys) in recipe.json_inputs.items()
    }
    with plt.rc_context(STYLE):
        fig = recipe.builder(tables, meta) if meta else recipe.builder(tables)
        fig.suptitle(recipe.figure_id)
        out_path = out_dir / recipe.output
        fig.savefig(out_path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return out_path
