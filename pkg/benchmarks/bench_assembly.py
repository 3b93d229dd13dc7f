"""Benchmark: compiled kernel backend vs the pure-Python fallback.

Runs the dense operator assembly and the off-surface field evaluation on
icosphere meshes and prints a timing table.  Usage:

    python benchmarks/bench_assembly.py [max_subdiv]
"""

import sys
import time

import numpy as np

from diracshell import bem
from diracshell.algebra import spectral_point
from diracshell.geometry import generate_sphere
from diracshell.kernels import _py

try:
    from diracshell.kernels import _cy
except ImportError:
    _cy = None


def _assemble(mod, mesh, point, nthreads=0):
    va, vb, vc, cent, areas, diams = bem._mesh_arrays(mesh)
    farb, farw, nearb, nearw, glx, glw = bem._quad_tables()
    rows = np.arange(mesh.n_panels, dtype=np.int64)
    out = np.zeros((4 * mesh.n_panels, 4 * mesh.n_panels), dtype=complex)
    t0 = time.perf_counter()
    mod.assemble_m_rows(va, vb, vc, cent, areas, diams, rows,
                        complex(point.z), complex(point.k),
                        farb, farw, nearb, nearw, glx, glw, 2.0, out, nthreads)
    return time.perf_counter() - t0, out


def _eval(mod, mesh, point, targets, density):
    va, vb, vc, cent, areas, diams = bem._mesh_arrays(mesh)
    farb, farw, nearb, nearw, _, _ = bem._quad_tables()
    out = np.zeros((len(targets), 4), dtype=complex)
    t0 = time.perf_counter()
    mod.eval_potential(va, vb, vc, cent, areas, diams, targets,
                       complex(point.z), complex(point.k),
                       farb, farw, nearb, nearw, density, out, 0, 4)
    return time.perf_counter() - t0, out


def main():
    max_subdiv = int(sys.argv[1]) if len(sys.argv) > 1 else 2
    point = spectral_point(0.3)
    print(f"{'task':<22}{'N':>6}{'python [s]':>12}{'cython [s]':>12}{'speedup':>9}{'max|diff|':>11}")
    for subdiv in range(1, max_subdiv + 1):
        mesh = generate_sphere(1.0, subdiv)
        tp, mp_ = _assemble(_py, mesh, point)
        if _cy is not None:
            tc, mc = _assemble(_cy, mesh, point)
            diff = np.abs(mp_ - mc).max()
            print(f"{'assemble M':<22}{mesh.n_panels:>6}{tp:>12.3f}{tc:>12.3f}"
                  f"{tp / tc:>9.1f}{diff:>11.2e}")
        else:
            print(f"{'assemble M':<22}{mesh.n_panels:>6}{tp:>12.3f}{'-':>12}{'-':>9}{'-':>11}")
        rng = np.random.default_rng(0)
        targets = rng.normal(size=(64, 3))
        targets = targets / np.linalg.norm(targets, axis=1)[:, None] * 1.7
        targets = np.ascontiguousarray(targets)
        density = np.ascontiguousarray(bem.smooth_density(mesh, seed=1))
        tp, up = _eval(_py, mesh, point, targets, density)
        if _cy is not None:
            tc, uc = _eval(_cy, mesh, point, targets, density)
            diff = np.abs(up - uc).max()
            print(f"{'evaluate field (64)':<22}{mesh.n_panels:>6}{tp:>12.3f}{tc:>12.3f}"
                  f"{tp / tc:>9.1f}{diff:>11.2e}")
        else:
            print(f"{'evaluate field (64)':<22}{mesh.n_panels:>6}{tp:>12.3f}{'-':>12}{'-':>9}{'-':>11}")


if __name__ == "__main__":
    main()
