"""Command-line front end: sampling, covariance extraction, spectral
diagnostics, CIM convergence studies, and the 1D/cross-method oracle suite.

Every command writes CSV data plus a JSON run manifest, and renders the
matching matplotlib figure alongside unless ``--no-plot`` is given.  Numeric
output uses 17 significant digits, so reruns with identical flags and seed
are byte-identical.

Exit codes: 0 success, 1 usage error, 2 numeric failure, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import ast
import hashlib
import json
import math
import os
import sys
import threading
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, analysis, cim, fem, plots, reference1d, riesz, spectral
from .errors import RieszError
from .mesh import generate_rectangle, load_mesh, mesh_hash
from .numerics import GaussianStream
from .riesz import floyd_warshall

_SAMPLE_LOCK = threading.Lock()


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# ---------------------------------------------------------------------------
# small helpers

def _fmt(v):
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return format(float(v), ".17g")


def _write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8") as f:
        f.write(header + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(path, command, params, seed, domain_hash, outputs, extra=None):
    doc = {
        "command": command,
        "parameters": params,
        "seed": seed,
        "mesh_hash": domain_hash,
        "version": __version__,
        "outputs": outputs,
    }
    if extra:
        doc.update(extra)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(doc, f, indent=2, sort_keys=True)
        f.write("\n")


def _parse_bc(text, markers):
    mapping = {}
    if not text:
        raise UsageError("boundary conditions required (--bc)")
    for part in text.split(","):
        bits = part.strip().split(":")
        if len(bits) < 2:
            raise UsageError(f"bad --bc entry {part!r}, expected marker:kind[:gamma]")
        tag, kind = bits[0], bits[1].lower()
        if kind == "dirichlet":
            cond = fem.DIRICHLET
        elif kind == "neumann":
            cond = fem.NEUMANN
        elif kind == "robin":
            if len(bits) != 3:
                raise UsageError(f"robin condition needs a coefficient: {part!r}")
            cond = fem.robin(float(bits[2]))
        else:
            raise UsageError(f"unknown boundary condition kind {kind!r}")
        if tag == "all":
            for m in markers:
                mapping[m] = cond
        else:
            mapping[int(tag)] = cond
    return mapping


def _parse_point(text):
    vals = [float(v) for v in text.split(",")]
    if len(vals) not in (1, 2):
        raise UsageError(f"bad point {text!r}")
    return vals


def _parse_neumann_mode(text):
    if text is None or text == "drop":
        return spectral.DropZeroMode()
    if text.startswith("pin:"):
        return spectral.PinAtOrigin(tuple(_parse_point(text[4:])))
    raise UsageError(f"bad --neumann-mode {text!r}, expected 'drop' or 'pin:X,Y'")


_EXPR_FUNCS = {"atan": np.arctan, "sin": np.sin, "cos": np.cos, "exp": np.exp}
_EXPR_BINOPS = {ast.Add: np.add, ast.Sub: np.subtract,
                ast.Mult: np.multiply, ast.Div: np.divide}


def hurst_expression(text):
    """Compile the restricted --H-expr grammar into a function of (x, y).

    Allowed: +, -, *, /, unary sign, atan/sin/cos/exp, the names x and y,
    and numeric constants.
    """
    try:
        tree = ast.parse(text, mode="eval")
    except SyntaxError as exc:
        raise UsageError(f"bad --H-expr: {exc}") from None

    def build(node):
        if isinstance(node, ast.Expression):
            return build(node.body)
        if isinstance(node, ast.BinOp) and type(node.op) in _EXPR_BINOPS:
            op = _EXPR_BINOPS[type(node.op)]
            left, right = build(node.left), build(node.right)
            return lambda x, y: op(left(x, y), right(x, y))
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
            inner = build(node.operand)
            sign = 1.0 if isinstance(node.op, ast.UAdd) else -1.0
            return lambda x, y: sign * inner(x, y)
        if isinstance(node, ast.Call) and isinstance(node.func, ast.Name) \
                and node.func.id in _EXPR_FUNCS and len(node.args) == 1 \
                and not node.keywords:
            fn = _EXPR_FUNCS[node.func.id]
            inner = build(node.args[0])
            return lambda x, y: fn(inner(x, y))
        if isinstance(node, ast.Name) and node.id in ("x", "y"):
            return (lambda x, y: x) if node.id == "x" else (lambda x, y: y)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            val = float(node.value)
            return lambda x, y: val
        raise UsageError(f"--H-expr: unsupported construct {ast.dump(node)}")

    return build(tree)


def _worker_count():
    raw = os.environ.get("RIESZ_THREADS", "")
    try:
        n = int(raw) if raw else 1
    except ValueError:
        n = 1
    return max(1, min(n, os.cpu_count() or 1))


# ---------------------------------------------------------------------------
# domain construction shared by the commands

def _build_domain(args, need_bc):
    """Mesh or interval system from the generator/file flags.

    Returns (mesh, system, domain_hash, descriptor).  ``system`` is None when
    boundary conditions are not needed (riesz method).
    """
    if args.mesh:
        with open(args.mesh, "r", encoding="utf-8") as f:
            mesh = load_mesh(f.read())
        descr = {"mesh_file": args.mesh}
    elif args.gen_rect:
        nx, ny = int(args.gen_rect[0]), int(args.gen_rect[1])
        w, h = float(args.gen_rect[2]), float(args.gen_rect[3])
        mesh = generate_rectangle(nx, ny, w, h)
        descr = {"gen_rect": [nx, ny, w, h]}
    elif args.gen_interval:
        n = int(args.gen_interval)
        length = float(args.length)
        bc = _parse_bc(args.bc, [1, 2])
        system = fem.assemble_interval(n, length, bc.get(1, fem.DIRICHLET),
                                       bc.get(2, fem.DIRICHLET))
        descr = {"gen_interval": n, "length": length, "bc": args.bc}
        digest = hashlib.sha256(json.dumps(descr, sort_keys=True).encode()).hexdigest()
        return None, system, digest, descr
    else:
        raise UsageError("a domain is required: --mesh, --gen-rect or --gen-interval")
    if not need_bc:
        return mesh, None, mesh_hash(mesh), descr
    bc = _parse_bc(args.bc, mesh.markers())
    system = fem.assemble(mesh, bc)
    descr["bc"] = args.bc
    return mesh, system, mesh_hash(mesh), descr


def _field_spec(args, system):
    truncation = "all" if args.K == "all" else int(args.K)
    return spectral.RieszFieldSpec(
        hurst=float(args.H),
        dim=system.dim,
        truncation=truncation,
        neumann_mode=_parse_neumann_mode(args.neumann_mode),
        bc=system.bc,
    )


def _vertex_rows(system_or_mesh, values):
    pts = system_or_mesh.points if hasattr(system_or_mesh, "points") else system_or_mesh.vertices
    if pts.shape[1] == 1:
        return [(pts[i, 0], 0.0, values[i]) for i in range(pts.shape[0])]
    return [(pts[i, 0], pts[i, 1], values[i]) for i in range(pts.shape[0])]


def _sample_one(args, mesh, system, table, hurst_values, stream):
    if args.method == "eig":
        return spectral.sample_spectral(system, _field_spec(args, system), stream)
    if args.method == "cim":
        return cim.sample_cim(system, _field_spec(args, system), stream, int(args.N))
    return riesz.sample_riesz(mesh, table, hurst_values, stream, args.weight_mode)


def _riesz_inputs(args, mesh):
    if mesh is None:
        raise UsageError("the riesz method needs a 2D mesh")
    table = riesz.geodesic_table(mesh)
    if args.H_expr:
        fn = hurst_expression(args.H_expr)
        hurst_values = np.asarray(fn(mesh.vertices[:, 0], mesh.vertices[:, 1]), dtype=float)
        hurst_values = np.broadcast_to(hurst_values, (mesh.n_vertices,)).copy()
    else:
        hurst_values = float(args.H)
    return table, hurst_values


# ---------------------------------------------------------------------------
# commands

def _write_vtk(path, mesh, values, name="field"):
    """Legacy ASCII VTK unstructured grid with one point-data scalar."""
    lines = ["# vtk DataFile Version 2.0", name, "ASCII", "DATASET UNSTRUCTURED_GRID",
             f"POINTS {mesh.n_vertices} double"]
    lines += [f"{_fmt(x)} {_fmt(y)} 0" for x, y in mesh.vertices]
    nt = mesh.n_triangles
    lines.append(f"CELLS {nt} {4 * nt}")
    lines += [f"3 {i} {j} {k}" for i, j, k in mesh.triangles]
    lines.append(f"CELL_TYPES {nt}")
    lines += ["5"] * nt
    lines += [f"POINT_DATA {mesh.n_vertices}", f"SCALARS {name} double 1",
              "LOOKUP_TABLE default"]
    lines += [_fmt(v) for v in values]
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def cmd_sample(args):
    mesh, system, domain_hash, descr = _build_domain(args, need_bc=args.method != "riesz")
    table = hurst_values = None
    if args.method == "riesz":
        table, hurst_values = _riesz_inputs(args, mesh)
    stream = GaussianStream(args.seed)
    path = _sample_one(args, mesh, system, table, hurst_values, stream)

    prefix = args.out
    csv_path = f"{prefix}.csv"
    outputs = [csv_path]
    holder = system if system is not None else mesh
    _write_csv(csv_path, "x,y,value", _vertex_rows(holder, path.values))
    if args.vtk:
        if mesh is None:
            raise UsageError("--vtk needs a 2D mesh")
        vtk_path = f"{prefix}.vtk"
        _write_vtk(vtk_path, mesh, path.values)
        outputs.append(vtk_path)
    extra = {}
    if system is not None and args.method == "eig":
        spec = _field_spec(args, system)
        tail = spectral.truncation_tail_estimate(system, spec)
        if tail > 0:
            extra["truncation_tail_estimate"] = tail
    if not args.no_plot:
        png = f"{prefix}.png"
        if mesh is not None:
            plots.save_field(mesh, path.values, png, title=f"{path.method}, H={args.H_expr or args.H}")
        else:
            plots.save_profile(system.points[:, 0], path.values, png, title=path.method)
        outputs.append(png)
    params = dict(descr, method=args.method, H=args.H, H_expr=args.H_expr, K=args.K,
                  N=args.N, weight_mode=args.weight_mode, neumann_mode=args.neumann_mode,
                  vtk=args.vtk)
    manifest = f"{prefix}.manifest.json"
    _write_manifest(manifest, "sample", params, args.seed, domain_hash,
                    outputs + [manifest], extra)
    print(f"wrote {csv_path} ({path.values.size} vertices, method {path.method})")
    return 0


def cmd_covariance(args):
    mesh, system, domain_hash, descr = _build_domain(args, need_bc=args.method != "riesz")
    if args.method == "riesz":
        table, hurst_values = _riesz_inputs(args, mesh)
        C = riesz.covariance_riesz(mesh, table, hurst_values, args.weight_mode)
        full_index = np.arange(mesh.n_vertices)
        holder = mesh
    else:
        spec = _field_spec(args, system)
        if args.method == "cim":
            C = cim.covariance_cim(system, spec, int(args.N))
        else:
            C = spectral.covariance_spectral(system, spec)
        full_index = system.free_nodes
        holder = system

    prefix = args.out
    outputs = []
    snap_note = ""
    if args.ref_point:
        pts = holder.points if hasattr(holder, "points") else holder.vertices
        target = np.asarray(_parse_point(args.ref_point))
        if pts.shape[1] == 1:
            target = target[:1]
        d2 = ((pts - target[None, :]) ** 2).sum(axis=1)
        vertex = int(np.argmin(d2))
        snap = math.sqrt(float(d2[vertex]))
        column = np.zeros(pts.shape[0])
        pos = np.nonzero(full_index == vertex)[0]
        if pos.size:
            column[full_index] = C[:, pos[0]]
        csv_path = f"{prefix}.csv"
        _write_csv(csv_path, "x,y,value", _vertex_rows(holder, column))
        outputs.append(csv_path)
        snap_note = f"snapped to vertex {vertex} at distance {snap:.3e}"
        print(f"reference point {args.ref_point} {snap_note}")
        if not args.no_plot:
            png = f"{prefix}.png"
            if mesh is not None:
                plots.save_field(mesh, column, png, title=f"covariance vs vertex {vertex}")
            else:
                plots.save_profile(holder.points[:, 0], column, png,
                                   title=f"covariance vs vertex {vertex}")
            outputs.append(png)
    else:
        csv_path = f"{prefix}.csv"
        rows = ((int(full_index[i]), int(full_index[j]), C[i, j])
                for i in range(C.shape[0]) for j in range(C.shape[1]))
        _write_csv(csv_path, "i,j,value", rows)
        outputs.append(csv_path)
        if not args.no_plot:
            png = f"{prefix}.png"
            plots.save_matrix(C, png, title=f"covariance ({args.method})")
            outputs.append(png)

    params = dict(descr, method=args.method, H=args.H, H_expr=args.H_expr, K=args.K,
                  N=args.N, weight_mode=args.weight_mode, neumann_mode=args.neumann_mode,
                  ref_point=args.ref_point)
    manifest = f"{prefix}.manifest.json"
    _write_manifest(manifest, "covariance", params, args.seed, domain_hash,
                    outputs + [manifest], {"snap": snap_note} if snap_note else None)
    print(f"wrote {outputs[0]}")
    return 0


def cmd_psd(args):
    n_grid = int(args.grid)
    realizations = int(args.realizations)
    if realizations < 1:
        raise UsageError("--realizations must be >= 1")
    root = GaussianStream(args.seed)

    if args.white_noise:
        domain_hash, descr = "white-noise", {"white_noise": True}
        grids = [root.child(r).normal((n_grid, n_grid)) for r in range(realizations)]
        pgram = analysis.periodogram(grids, dx=1.0 / n_grid, dy=1.0 / n_grid, taper=args.taper)
    else:
        mesh, system, domain_hash, descr = _build_domain(args, need_bc=args.method != "riesz")
        table = hurst_values = None
        if args.method == "riesz":
            table, hurst_values = _riesz_inputs(args, mesh)
        if mesh is None:
            raise UsageError("psd needs a 2D domain")
        _warm_caches(args, system)

        def job(r):
            child = root.child(r)
            with _SAMPLE_LOCK:
                path = _sample_one(args, mesh, system, table, hurst_values, child)
            return analysis.interpolate_to_grid(mesh, path, n_grid, n_grid)

        workers = _worker_count()
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                grids = list(pool.map(job, range(realizations)))
        else:
            grids = [job(r) for r in range(realizations)]
        pgram = analysis.periodogram(grids, taper=args.taper)

    freqs, log_psd = analysis.radial_average(pgram, int(args.bins))
    fit = analysis.fit_power_law(freqs, log_psd, float(args.cutoff))

    prefix = args.out
    grid_csv = f"{prefix}_periodogram.csv"
    fx, fy = np.meshgrid(pgram.freq_x, pgram.freq_y, indexing="xy")
    _write_csv(grid_csv, "fx,fy,psd",
               zip(fx.ravel(), fy.ravel(), pgram.power.ravel()))
    radial_csv = f"{prefix}_radial.csv"
    _write_csv(radial_csv, "freq,log10_psd", zip(freqs, log_psd))
    outputs = [grid_csv, radial_csv]
    if not args.no_plot:
        p2d, prad = f"{prefix}_psd.png", f"{prefix}_radial.png"
        plots.save_psd(pgram, p2d, title=f"PSD ({realizations} realizations)")
        plots.save_radial_fit(freqs, log_psd, fit, float(args.cutoff), prad,
                              title="radial PSD")
        outputs += [p2d, prad]
    params = dict(descr, method=args.method, H=args.H, H_expr=args.H_expr, K=args.K,
                  N=args.N, weight_mode=args.weight_mode, neumann_mode=args.neumann_mode,
                  realizations=realizations, grid=n_grid, bins=int(args.bins),
                  cutoff=float(args.cutoff), taper=args.taper)
    manifest = f"{prefix}.manifest.json"
    _write_manifest(manifest, "psd", params, args.seed, domain_hash,
                    outputs + [manifest],
                    {"slope": fit.slope, "slope_stderr": fit.stderr})
    print(f"fitted slope {fit.slope:.4f} +/- {fit.stderr:.4f} "
          f"(cutoff {args.cutoff}, {realizations} realizations)")
    return 0


def _warm_caches(args, system):
    """Populate eigen/factorization caches before any parallel sampling."""
    if system is None:
        return
    if args.method == "eig":
        spec = _field_spec(args, system)
        spectral.field_from_load(system, spec, np.zeros(system.n_free))
    elif args.method == "cim":
        spec = _field_spec(args, system)
        cim.field_from_load(system, spec, np.zeros(system.n_free), int(args.N))


def cmd_convergence(args):
    levels = [int(v) for v in args.levels.split(",")]
    n_list = [int(v) for v in args.N_list.split(",")]
    if not levels or not n_list:
        raise UsageError("--levels and --N-list must be non-empty")
    stream = GaussianStream(args.seed)
    rows = []
    for li, cells in enumerate(levels):
        mesh = generate_rectangle(cells, cells, 1.0, 1.0)
        system = fem.assemble(mesh, {m: fem.DIRICHLET for m in mesh.markers()})
        spec = spectral.RieszFieldSpec(hurst=float(args.H), dim=2, bc=system.bc)
        load = spectral.white_noise_load(system, stream.child(li))
        if system.n_free <= 3000:
            reference = spectral.field_from_load(system, spec, load)
            ref_tag = "spectral"
        else:
            reference = cim.field_from_load(system, spec, load, 100)
            ref_tag = "cim(N=100)"
        lam_min, lam_max = cim.spectral_interval_of(system)
        kappa = lam_max / lam_min
        scale = np.abs(reference).max()
        for n in n_list:
            x = cim.field_from_load(system, spec, load, n)
            err = float(np.abs(x - reference).max() / scale)
            rows.append((li + 1, system.n_free, kappa, n, err))
        print(f"level {li + 1}: {system.n_free} nodes, kappa ~ {kappa:.1f}, "
              f"reference {ref_tag}")

    prefix = args.out
    csv_path = f"{prefix}.csv"
    _write_csv(csv_path, "level,nodes,kappa,N,rel_linf_error", rows)
    outputs = [csv_path]
    if not args.no_plot:
        png = f"{prefix}.png"
        plots.save_convergence(rows, png, title=f"CIM convergence, H={args.H}")
        outputs.append(png)
    params = {"levels": levels, "N_list": n_list, "H": args.H}
    manifest = f"{prefix}.manifest.json"
    _write_manifest(manifest, "convergence", params, args.seed, "generated-rectangles",
                    outputs + [manifest])
    print(f"wrote {csv_path}")
    return 0


# ---------------------------------------------------------------------------
# oracle suite

def _check_bridge(inject=False):
    system = fem.assemble_interval(512, 1.0, fem.DIRICHLET, fem.DIRICHLET)
    hurst = 0.7 if inject else 0.5
    spec = spectral.RieszFieldSpec(hurst=hurst, dim=1)
    C = spectral.covariance_spectral(system, spec)
    x = system.points[system.free_nodes, 0]
    target = np.minimum.outer(x, x) - np.outer(x, x)
    return float(np.abs(C - target).max())


def _check_brownian():
    system = fem.assemble_interval(512, 1.0, fem.DIRICHLET, fem.NEUMANN)
    spec = spectral.RieszFieldSpec(hurst=0.5, dim=1)
    C = spectral.covariance_spectral(system, spec)
    x = system.points[system.free_nodes, 0]
    target = np.minimum.outer(x, x)
    return float(np.abs(C - target).max())


def _check_hosking_slope(seed=7):
    hspec = reference1d.HoskingSpec(beta=0.5, length=2 ** 14)
    stream = GaussianStream(seed)
    series = [reference1d.hosking_sample(hspec, stream.child(r)) for r in range(100)]
    freqs, psd = analysis.periodogram_1d(np.vstack(series))
    n = hspec.length
    mid = 0.5 * (np.log10(1.0 / n) + np.log10(0.5))
    lo, hi = 10 ** (mid - 1.0), 10 ** (mid + 1.0)
    sel = (freqs >= lo) & (freqs <= hi)
    fit = analysis.fit_power_law(freqs[sel], np.log10(psd[sel]), 0.0)
    return fit.slope


def _check_fgn_consistency(seed=11):
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(20):
        hurst = rng.uniform(0.05, 0.95)
        t = rng.uniform(0.0, 3.0)
        h = rng.uniform(0.05, 1.5)
        n = int(rng.integers(0, 8))
        direct = reference1d.fgn_autocovariance(n, h, hurst)
        s = t + n * h
        from_fbm = (reference1d.fbm_covariance(t + h, s + h, hurst)
                    - reference1d.fbm_covariance(t + h, s, hurst)
                    - reference1d.fbm_covariance(t, s + h, hurst)
                    + reference1d.fbm_covariance(t, s, hurst))
        worst = max(worst, abs(direct - from_fbm))
    return worst


def _check_floyd(seed=3):
    rng = np.random.default_rng(seed)
    worst = 0
    for _ in range(5):
        n = 50
        w = rng.integers(1, 1000, size=(n, n)).astype(float)
        w = np.minimum(w, w.T)
        mask = rng.uniform(size=(n, n)) < 0.7
        mask = mask | mask.T
        w[~mask] = np.inf
        np.fill_diagonal(w, 0.0)
        from scipy.sparse.csgraph import dijkstra as _dij
        finite = np.where(np.isfinite(w), w, 0.0)
        reference = _dij(finite, directed=False)
        ours = floyd_warshall(w)
        worst = max(worst, int(np.sum(ours != reference)))
    return worst


def cmd_oracle(args):
    checks = []
    bridge = _check_bridge(inject=args.inject_wrong_exponent)
    checks.append(("bridge covariance vs min(s,t)-st", bridge <= 1e-2,
                   f"max abs err {bridge:.3e}", "<= 1e-2"))
    brownian = _check_brownian()
    checks.append(("brownian covariance vs min(s,t)", brownian <= 1e-2,
                   f"max abs err {brownian:.3e}", "<= 1e-2"))
    slope = _check_hosking_slope()
    checks.append(("hosking periodogram slope", -1.15 <= slope <= -0.85,
                   f"slope {slope:.4f}", "in [-1.15, -0.85]"))
    fgn = _check_fgn_consistency()
    checks.append(("fGn autocovariance vs fBm differences", fgn <= 1e-12,
                   f"max abs err {fgn:.3e}", "<= 1e-12"))
    floyd_bad = _check_floyd()
    checks.append(("floyd-warshall vs dijkstra", floyd_bad == 0,
                   f"{floyd_bad} mismatched entries", "exact"))
    all_ok = True
    for name, ok, measured, tol in checks:
        tag = "PASS" if ok else "FAIL"
        all_ok &= ok
        print(f"[{tag}] {name}: {measured} (tolerance {tol})")
    return 0 if all_ok else 2


# ---------------------------------------------------------------------------
# argument wiring

def _add_domain_flags(p):
    p.add_argument("--mesh", help="mesh file in the package text format")
    p.add_argument("--gen-rect", nargs=4, metavar=("NX", "NY", "W", "H"),
                   help="structured rectangle: cells and size")
    p.add_argument("--gen-interval", type=int, metavar="N",
                   help="1D interval with N cells")
    p.add_argument("--length", type=float, default=1.0, help="interval length")
    p.add_argument("--bc", default="",
                   help="boundary conditions, e.g. all:dirichlet or 1:neumann,2:robin:0.5")


def _add_field_flags(p):
    p.add_argument("--method", choices=("eig", "cim", "riesz"), default="eig")
    p.add_argument("--H", type=float, default=0.5, help="Hurst parameter")
    p.add_argument("--H-expr", dest="H_expr", default=None,
                   help="spatially varying Hurst expression in x,y (riesz only)")
    p.add_argument("--K", default="all", help="spectral truncation (mode count or 'all')")
    p.add_argument("--N", type=int, default=40, help="CIM quadrature nodes")
    p.add_argument("--weight-mode", choices=riesz.WEIGHT_MODES, default="sqrt-area")
    p.add_argument("--neumann-mode", default="drop",
                   help="zero-mode policy: 'drop' or 'pin:X,Y'")


def _add_common_flags(p, default_out):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=default_out, help="output file prefix")
    p.add_argument("--no-plot", action="store_true", help="skip figure rendering")


def build_parser():
    parser = _Parser(prog="rieszfield",
                     description="Gaussian power-law random fields on triangulated domains")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sample", help="draw one field realization")
    _add_domain_flags(p)
    _add_field_flags(p)
    _add_common_flags(p, "riesz_sample")
    p.add_argument("--vtk", action="store_true",
                   help="also write a legacy ASCII VTK unstructured grid")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("covariance", help="exact covariance matrix or column")
    _add_domain_flags(p)
    _add_field_flags(p)
    _add_common_flags(p, "riesz_covariance")
    p.add_argument("--ref-point", default=None,
                   help="extract the covariance column of the nearest vertex")
    p.set_defaults(func=cmd_covariance)

    p = sub.add_parser("psd", help="averaged periodogram, radial curve, slope fit")
    _add_domain_flags(p)
    _add_field_flags(p)
    _add_common_flags(p, "riesz_psd")
    p.add_argument("--realizations", type=int, default=100)
    p.add_argument("--grid", type=int, default=64, help="grid size (power of two)")
    p.add_argument("--bins", type=int, default=16, help="radial bins")
    p.add_argument("--cutoff", type=float, default=5.0,
                   help="discard radial frequencies below this")
    p.add_argument("--taper", action="store_true",
                   help="apply a cosine window before transforming")
    p.add_argument("--white-noise", action="store_true",
                   help="debug mode: i.i.d. grids instead of field samples")
    p.set_defaults(func=cmd_psd)

    p = sub.add_parser("convergence", help="CIM error against quadrature size per mesh level")
    _add_common_flags(p, "riesz_convergence")
    p.add_argument("--levels", default="13,24",
                   help="comma-separated cell counts of unit-square levels")
    p.add_argument("--N-list", dest="N_list", default="4,8,12,16,24,40,100")
    p.add_argument("--H", type=float, default=0.25)
    p.set_defaults(func=cmd_convergence)

    p = sub.add_parser("oracle", help="run the 1D and cross-method oracle suite")
    p.add_argument("--inject-wrong-exponent", action="store_true",
                   help="negative control: corrupt the bridge exponent")
    p.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (RieszError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
