"""Batch command-line front end.

Commands: mesh generate/validate, spectrum (gap eigenvalue search), scatter
(on-shell scattering matrix with diagnostics), validate (invariant suites).
A JSON config file can prefill any option; explicit flags win.  All reports
embed the resolved-config hash, the mesh fingerprint, and the code version,
and floats are printed with 17 significant digits so identical runs produce
byte-identical files.

Exit codes: 0 success, 2 input error, 3 unsupported coupling regime,
4 numerical failure (ill-conditioning), 5 validation failure.
"""

from __future__ import annotations

import hashlib
import json
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, bem, scattering, spectrum, validate
from .algebra import Regime, Side, coupling, fiber_projector, spectral_point
from .bem import DiscreteOperator, NearSingularError, save_operator
from .geometry import (
    MeshError,
    generate_ellipsoid,
    generate_sphere,
    load_mesh,
    save_mesh,
    validate_mesh,
)

EXIT_INPUT = 2
EXIT_REGIME = 3
EXIT_NUMERICAL = 4
EXIT_VALIDATION = 5


def _fmt(value):
    if isinstance(value, float):
        return format(value, ".17g")
    if isinstance(value, dict):
        return {k: _fmt(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_fmt(v) for v in value]
    if isinstance(value, np.ndarray):
        return _fmt(value.tolist())
    if isinstance(value, (np.floating,)):
        return format(float(value), ".17g")
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, complex):
        return [_fmt(value.real), _fmt(value.imag)]
    return value


def dumps_report(obj) -> str:
    """Deterministic JSON: sorted keys, floats as 17-significant-digit strings."""
    return json.dumps(_fmt(obj), indent=1, sort_keys=True)


def _config_hash(resolved: dict) -> str:
    return hashlib.sha256(dumps_report(resolved).encode()).hexdigest()[:16]


def _load_config(path):
    if path is None:
        return {}
    try:
        with open(path) as f:
            return json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise click.UsageError(f"cannot read config {path}: {e}")


def _resolve(flag_value, config, key, default=None):
    if flag_value is not None:
        return flag_value
    if key in config:
        return config[key]
    return default


def _emit(report: dict, out_path):
    text = dumps_report(report)
    if out_path:
        Path(out_path).write_text(text + "\n")
    click.echo(text)


@click.group()
@click.version_option(__version__)
def main():
    """Shell-interaction boundary-element solver."""


# ---------------------------------------------------------------------------
# mesh

@main.group()
def mesh():
    """Generate and validate closed triangulated surfaces."""


@mesh.command("generate")
@click.option("--shape", type=click.Choice(["sphere", "ellipsoid"]), default="sphere")
@click.option("--radius", type=float, default=1.0)
@click.option("--semi-axes", nargs=3, type=float, default=None,
              help="Ellipsoid semi-axes a b c.")
@click.option("--subdiv", type=int, default=3)
@click.option("-o", "--output", required=True, type=click.Path())
def mesh_generate(shape, radius, semi_axes, subdiv, output):
    """Write an OFF/OBJ mesh for a builtin shape."""
    try:
        if shape == "sphere":
            m = generate_sphere(radius, subdiv)
        else:
            if semi_axes is None:
                raise ValueError("ellipsoid needs --semi-axes a b c")
            m = generate_ellipsoid(*semi_axes, subdiv=subdiv)
        save_mesh(m, output)
    except (ValueError, MeshError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    rep = validate_mesh(m)
    click.echo(dumps_report({"written": str(output), "fingerprint": m.fingerprint,
                             "report": rep.as_dict()}))


@mesh.command("validate")
@click.argument("path", type=click.Path(exists=True))
def mesh_validate(path):
    """Validate a mesh file and print its geometry report."""
    try:
        m = load_mesh(path)
    except MeshError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    rep = validate_mesh(m)
    click.echo(dumps_report({"fingerprint": m.fingerprint, "report": rep.as_dict()}))
    if not rep.ok:
        sys.exit(EXIT_VALIDATION)


def _load_surface(path):
    try:
        return load_mesh(path)
    except (MeshError, OSError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)


def _coupling_or_exit(eta, tau):
    c = coupling(eta, tau)
    if c.regime is Regime.CRITICAL:
        click.echo(
            f"error: coupling eta={eta} tau={tau} is critical "
            "(eta^2 - tau^2 = 4); this regime is not supported", err=True)
        sys.exit(EXIT_REGIME)
    return c


# ---------------------------------------------------------------------------
# spectrum

@main.command("spectrum")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--mesh", "mesh_path", type=click.Path(exists=True), default=None)
@click.option("--eta", type=float, default=None)
@click.option("--tau", type=float, default=None)
@click.option("--gap-grid", type=int, default=None, help="Number of gap grid points.")
@click.option("--lambda-min", type=float, default=None)
@click.option("--lambda-max", type=float, default=None)
@click.option("--tol", type=float, default=None)
@click.option("--threads", type=int, default=None)
@click.option("-o", "--output", type=click.Path(), default=None)
def cmd_spectrum(config, mesh_path, eta, tau, gap_grid, lambda_min, lambda_max,
                 tol, threads, output):
    """Gap eigenvalue search via the characteristic boundary operator."""
    cfg = _load_config(config)
    mesh_path = _resolve(mesh_path, cfg, "mesh")
    if mesh_path is None:
        raise click.UsageError("--mesh is required (flag or config)")
    eta = _resolve(eta, cfg, "eta", 0.0)
    tau = _resolve(tau, cfg, "tau", 0.0)
    n_grid = _resolve(gap_grid, cfg, "gap_grid", 81)
    lo = _resolve(lambda_min, cfg, "lambda_min", -0.995)
    hi = _resolve(lambda_max, cfg, "lambda_max", 0.995)
    tol = _resolve(tol, cfg, "tol", 1e-4)
    threads = _resolve(threads, cfg, "threads", 0)
    resolved = {"command": "spectrum", "mesh": str(mesh_path), "eta": eta, "tau": tau,
                "gap_grid": n_grid, "lambda_min": lo, "lambda_max": hi, "tol": tol}
    m = _load_surface(mesh_path)
    coup = _coupling_or_exit(eta, tau)
    try:
        report = spectrum.find_gap_eigenvalues(
            m, coup, tol=tol, grid=np.linspace(lo, hi, n_grid), nthreads=threads)
    except NearSingularError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_NUMERICAL)
    except ValueError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    out = {
        "version": __version__,
        "config_hash": _config_hash(resolved),
        "config": resolved,
        "mesh_fingerprint": m.fingerprint,
        "essential_spectrum": spectrum.essential_spectrum()["description"],
        "eigenvalues": report.eigenvalues,
        "suspects": report.suspects,
        "grid": report.grid,
        "sigma_min": report.sigma_min,
    }
    _emit(out, output)


# ---------------------------------------------------------------------------
# scatter

def _parse_grid(spec: str) -> scattering.DirectionGrid:
    try:
        scheme, order = spec.split(":")
        return scattering.direction_grid(scheme, int(order))
    except (ValueError, KeyError) as e:
        raise click.UsageError(f"bad --grid {spec!r} (want scheme:order): {e}")


@main.command("scatter")
@click.option("--config", type=click.Path(exists=True), default=None)
@click.option("--mesh", "mesh_path", type=click.Path(exists=True), default=None)
@click.option("--eta", type=float, default=None)
@click.option("--tau", type=float, default=None)
@click.option("--lambda", "lambdas", type=float, multiple=True,
              help="On-shell energy; repeatable.")
@click.option("--side", type=click.Choice(["upper", "lower"]), default=None)
@click.option("--grid", "grid_spec", type=str, default=None,
              help="Direction grid scheme:order, e.g. lebedev:26 or icosahedral:2.")
@click.option("--threads", type=int, default=None)
@click.option("--out-dir", type=click.Path(), default=None)
def cmd_scatter(config, mesh_path, eta, tau, lambdas, side, grid_spec, threads, out_dir):
    """Sample the on-shell scattering matrix with unitarity diagnostics."""
    cfg = _load_config(config)
    mesh_path = _resolve(mesh_path, cfg, "mesh")
    if mesh_path is None:
        raise click.UsageError("--mesh is required (flag or config)")
    eta = _resolve(eta, cfg, "eta", 0.0)
    tau = _resolve(tau, cfg, "tau", 0.0)
    lambdas = list(lambdas) or list(cfg.get("lambdas", []))
    if not lambdas:
        raise click.UsageError("at least one --lambda is required")
    side = _resolve(side, cfg, "side", "upper")
    grid_spec = _resolve(grid_spec, cfg, "grid", "lebedev:26")
    threads = _resolve(threads, cfg, "threads", 0)
    out_dir = Path(_resolve(out_dir, cfg, "out_dir", "."))
    for lam in lambdas:
        if abs(lam) <= 1.0:
            click.echo(f"error: --lambda {lam} is inside [-1, 1]; scattering "
                       "energies must satisfy |lambda| > 1", err=True)
            sys.exit(EXIT_INPUT)
    m = _load_surface(mesh_path)
    coup = _coupling_or_exit(eta, tau)
    grid = _parse_grid(grid_spec)
    out_dir.mkdir(parents=True, exist_ok=True)
    resolved = {"command": "scatter", "mesh": str(mesh_path), "eta": eta, "tau": tau,
                "lambdas": list(lambdas), "side": side, "grid": grid_spec}
    side_tag = Side.UPPER if side == "upper" else Side.LOWER
    results = []
    for lam in lambdas:
        try:
            sample = scattering.scattering_matrix(m, coup, lam, grid,
                                                  side=side_tag, nthreads=threads)
        except NearSingularError as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_NUMERICAL)
        tag = f"S_lam{lam:+.6g}".replace("+", "p").replace("-", "m").replace(".", "_")
        op = DiscreteOperator(matrix=sample.matrix, kind="S",
                              point=spectral_point(lam, side_tag),
                              mesh_fingerprint=m.fingerprint,
                              meta={"eta": eta, "tau": tau})
        bin_path, json_path = save_operator(op, out_dir / tag)
        defect = scattering.unitarity_defect(sample)
        entry = {"lambda": lam, "unitarity_defect": defect,
                 "warnings": sample.warnings, "s_matrix": str(bin_path),
                 "sidecar": str(json_path)}
        if m.meta.get("shape") == "sphere":
            entry["eigenphases_csv"] = str(out_dir / f"{tag}_phases.csv")
            _write_phase_csv(out_dir / f"{tag}_phases.csv", m, coup, sample)
        entry["cross_section_csv"] = str(out_dir / f"{tag}_xsec.csv")
        sigma_tot = _write_xsec_csv(out_dir / f"{tag}_xsec.csv", sample)
        entry["sigma_total"] = sigma_tot
        results.append(entry)
    report = {"version": __version__, "config_hash": _config_hash(resolved),
              "config": resolved, "mesh_fingerprint": m.fingerprint,
              "results": results}
    _emit(report, out_dir / "scatter_report.json")


def _physical_phase(sample, kappa):
    from .oracle import channel_projector

    blk = scattering.partial_wave_project(sample, kappa, 1)
    pch = channel_projector(sample.lam)
    w, v = np.linalg.eigh(pch)
    u = v[:, int(np.argmax(w.real))]
    s_phys = complex(u.conj() @ blk @ u)
    return float(np.mod(0.5 * np.angle(s_phys), np.pi)), abs(s_phys)


def _write_phase_csv(path, m, coup, sample):
    from .oracle import oracle_phase_shifts

    radius = m.meta.get("radius", 1.0)
    oracle = {o["kappa"]: o for o in
              oracle_phase_shifts(radius, coup, sample.lam, kappa_max=3, side=sample.side)}
    with open(path, "w") as f:
        f.write("kappa,phase,phase_oracle,abs_s,flagged\n")
        for kappa in (-3, -2, -1, 1, 2, 3):
            ph, mag = _physical_phase(sample, kappa)
            o = oracle[kappa]
            f.write(f"{kappa},{ph:.17g},{o['phase']:.17g},{mag:.17g},{int(o['flagged'])}\n")


def _write_xsec_csv(path, sample):
    node_idx = int(np.argmax(sample.grid.nodes @ np.array([0.0, 0.0, 1.0])))
    xi0 = sample.grid.nodes[node_idx]
    p0 = fiber_projector(sample.lam, xi0)
    spinor = p0[:, 0]
    nrm = np.linalg.norm(spinor)
    if nrm < 1e-12:
        spinor = p0[:, 2]
        nrm = np.linalg.norm(spinor)
    spinor = spinor / nrm
    xs = scattering.cross_sections(sample, xi0, spinor)
    with open(path, "w") as f:
        f.write("xi_x,xi_y,xi_z,dsigma\n")
        for xi, ds in zip(xs["directions"], xs["dsigma"]):
            f.write(f"{xi[0]:.17g},{xi[1]:.17g},{xi[2]:.17g},{ds:.17g}\n")
    return xs["sigma_total"]


# ---------------------------------------------------------------------------
# validate

@main.command("validate")
@click.option("--suite", type=str, default="all",
              help="algebra|kernel|geometry|bem|oracle|spectrum|scatter|all")
@click.option("--json-out", type=click.Path(), default=None)
@click.option("--inject-wrong-side", is_flag=True, hidden=True,
              help="Deliberately flip the +i0 side (fault-injection self-test).")
def cmd_validate(suite, json_out, inject_wrong_side):
    """Run invariant suites and report measured values against tolerances."""
    try:
        out = validate.run_suite(suite, inject_wrong_side=inject_wrong_side)
    except KeyError as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(EXIT_INPUT)
    out["version"] = __version__
    _emit(out, json_out)
    if not out["passed"]:
        sys.exit(EXIT_VALIDATION)


if __name__ == "__main__":
    main()
