"""``rf-lab`` command line.

Exit codes: 0 ok, 2 usage or input error, 3 engine incompatibility, 4 resource cap.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import itertools
import warnings
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import statevector as sv
from .circuit import Circuit, build_brickwall_1d, build_hva_tfi, build_ladder
from .errors import CapacityError, EngineError
from .models import ModelSpec, build_model, exact_solution_circuit
from .pauli import Hamiltonian
from .rf import SamplePlan, relative_fluctuation

EXIT_OK, EXIT_USAGE, EXIT_ENGINE, EXIT_CAP = 0, 2, 3, 4

SWEEP_COLUMNS = [
    "key", "ansatz", "n", "depth", "template", "family", "h", "instance",
    "m", "m_eff", "m_eff_source", "sigma", "sigma_stderr", "sigma0", "rf", "rf_stderr",
    "sigma_haar", "bound", "mean_cost", "engine", "samples", "batches", "seed", "error",
]


class UsageError(Exception):
    pass


# -- shared argument groups -------------------------------------------------------


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("sampling")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--samples", type=int, default=2000)
    g.add_argument("--batches", type=int, default=10)
    g.add_argument("--engine", choices=["clifford", "continuous"], default="clifford")
    g.add_argument("--block-measure", choices=["angles", "haar"], default="angles")
    g.add_argument("--meff", choices=["auto", "qfi", "m"], default="auto")
    g.add_argument("--jobs", type=int, default=None, help="worker processes (default: $RF_LAB_JOBS or 1)")
    g.add_argument("--out", help="write JSON or CSV output here")
    return p


def _circuit_args(p: argparse.ArgumentParser):
    g = p.add_argument_group("circuit")
    g.add_argument("--circuit", help="circuit JSON file")
    g.add_argument("--ansatz", choices=["brickwall", "ladder", "hva", "exact"], default="brickwall")
    g.add_argument("--template", default="su4")
    g.add_argument("--n", type=int)
    g.add_argument("--depth", type=int, default=1)


def _model_args(p: argparse.ArgumentParser, prefix: str = ""):
    g = p.add_argument_group("model")
    g.add_argument("--hamiltonian", help="Hamiltonian file (JSON or text)")
    g.add_argument(f"--{prefix}family" if prefix else "--model", dest="family")
    g.add_argument("--h", type=float, default=0.0)
    g.add_argument("--model-depth", type=int, default=None, help="back-evolution depth (defaults to --depth)")
    g.add_argument("--model-seed", type=int, default=0)


def _plan(a) -> SamplePlan:
    try:
        return SamplePlan(a.samples, a.batches, a.seed, a.engine, a.block_measure)
    except ValueError as e:
        raise UsageError(str(e)) from None


def _jobs(a) -> int:
    if a.jobs is not None:
        return max(1, a.jobs)
    return max(1, int(os.environ.get("RF_LAB_JOBS", "1")))


def _make_circuit(ansatz: str, n: int, depth: int, template: str, family: str | None = None) -> Circuit:
    if ansatz == "brickwall":
        return build_brickwall_1d(n, depth, template)
    if ansatz == "ladder":
        return build_ladder(n, depth, template)
    if ansatz == "hva":
        return build_hva_tfi(n, depth)
    return exact_solution_circuit(family or "cluster", n)


def _load_circuit(a) -> Circuit:
    if a.circuit:
        if not os.path.exists(a.circuit):
            raise UsageError(f"circuit file not found: {a.circuit}")
        return Circuit.load(a.circuit)
    if a.n is None:
        raise UsageError("pass --circuit FILE or --n with builder flags")
    return _make_circuit(a.ansatz, a.n, a.depth, a.template, getattr(a, "family", None))


def _load_hamiltonian(a, n: int | None, depth: int | None = None) -> Hamiltonian:
    if a.hamiltonian:
        if not os.path.exists(a.hamiltonian):
            raise UsageError(f"Hamiltonian file not found: {a.hamiltonian}")
        return Hamiltonian.load(a.hamiltonian)
    if not a.family:
        raise UsageError("pass --hamiltonian FILE or --model FAMILY")
    d = a.model_depth if a.model_depth is not None else depth
    return build_model(ModelSpec(a.family, n, a.h, d, a.model_seed)).hamiltonian


def _emit(text: str, path: str | None):
    if path:
        with open(path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# -- subcommands ---------------------------------------------------------------------


def cmd_build(a) -> int:
    c = _load_circuit(a)
    _emit(c.to_json(indent=1) + "\n", a.out)
    return EXIT_OK


def cmd_model(a) -> int:
    if a.n is None or not a.family:
        raise UsageError("model needs --family and --n")
    m = build_model(ModelSpec(a.family, a.n, a.h, a.depth, a.model_seed))
    if a.out:
        m.hamiltonian.save(a.out)
    else:
        sys.stdout.write(m.hamiltonian.to_text())
    if m.v is not None and a.v_out:
        m.v.save(a.v_out)
    return EXIT_OK


def cmd_rf(a) -> int:
    c = _load_circuit(a)
    h = _load_hamiltonian(a, c.n_qubits, a.depth)
    if h.n_qubits != c.n_qubits:
        raise UsageError(f"circuit has {c.n_qubits} qubits but the Hamiltonian has {h.n_qubits}")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # surfaced as a note in the summary
        rep = relative_fluctuation(c, h, _plan(a), a.meff)
    print(rep.summary())
    if a.out:
        _emit(rep.to_json(indent=1) + "\n", a.out)
    return EXIT_OK


def _parse_candidates(text: str) -> list[tuple[str, int]]:
    out = []
    for item in text.split(","):
        name, _, depth = item.strip().partition(":")
        if not name:
            continue
        out.append((name.lower(), int(depth or 1)))
    if not out:
        raise UsageError("no candidates given")
    return out


def _rank_rows(a):
    rows = []
    for template, depth in _parse_candidates(a.candidates):
        c = build_brickwall_1d(a.n, depth, template)
        h = _load_hamiltonian(a, a.n, depth)
        rep = relative_fluctuation(c, h, _plan(a), a.meff)
        rows.append({"candidate": f"{template}-D{depth}", "m": rep.m, "m_eff": rep.m_eff, "rf": rep.rf, "rf_stderr": rep.rf_stderr, "c": c, "h": h})
    rows.sort(key=lambda r: (-r["rf"], r["m"]))
    for i, r in enumerate(rows):
        nxt = rows[i + 1] if i + 1 < len(rows) else None
        r["overlap"] = bool(nxt and r["rf"] - r["rf_stderr"] <= nxt["rf"] + nxt["rf_stderr"])
    return rows


def cmd_rank(a) -> int:
    if a.n is None:
        raise UsageError("rank needs --n")
    rows = _rank_rows(a)
    print(f"{'rank':>4}  {'candidate':<12} {'M':>6} {'M_eff':>6} {'RF':>8} {'stderr':>8}")
    for i, r in enumerate(rows, 1):
        flag = "  ~ overlaps next" if r["overlap"] else ""
        print(f"{i:>4}  {r['candidate']:<12} {r['m']:>6} {r['m_eff']:>6} {r['rf']:>8.4f} {r['rf_stderr']:>8.4f}{flag}")
    if a.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["rank", "candidate", "m", "m_eff", "rf", "rf_stderr", "overlaps_next"])
        for i, r in enumerate(rows, 1):
            w.writerow([i, r["candidate"], r["m"], r["m_eff"], repr(r["rf"]), repr(r["rf_stderr"]), int(r["overlap"])])
        _emit(buf.getvalue(), a.out)
    return EXIT_OK


def cmd_validate(a) -> int:
    if a.n is None:
        raise UsageError("validate needs --n")
    if a.restarts < 1:
        raise UsageError("--restarts must be at least 1")
    if a.n > sv.TRAIN_MAX_QUBITS:
        raise CapacityError(f"training is capped at {sv.TRAIN_MAX_QUBITS} qubits")
    rows = _rank_rows(a)
    print(f"{'candidate':<12} {'RF':>8} {'eps_mean':>10} {'eps_std':>10} {'best_dE':>10}")
    out = []
    for r in rows:
        tr = sv.train_adam(r["c"], r["h"], a.lr, a.iters, a.restarts, a.seed)
        out.append((r["candidate"], r["rf"], tr.eps_mean, tr.eps_std, tr.best_error))
        print(f"{r['candidate']:<12} {r['rf']:>8.4f} {tr.eps_mean:>10.3e} {tr.eps_std:>10.3e} {tr.best_error:>10.3e}")
    eps = [o[2] for o in out]
    ordered = all(eps[i] <= eps[i + 1] + 1e-12 for i in range(len(eps) - 1))
    print(f"higher RF gives lower error: {'yes' if ordered else 'no'}")
    if a.out:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["candidate", "rf", "eps_mean", "eps_std", "best_delta_e"])
        for o in out:
            w.writerow([o[0]] + [repr(float(v)) for v in o[1:]])
        _emit(buf.getvalue(), a.out)
    return EXIT_OK


def cmd_qfi(a) -> int:
    c = _load_circuit(a)
    res = [sv.qfi_matrix(c, p) for p in _qfi_points(c, a.points, a.seed)]
    ranks = [r.rank for r in res]
    print(f"M = {c.n_params}, M_eff = {max(ranks)}, ranks at {len(ranks)} points: {ranks}")
    if a.out:
        _emit(json.dumps({"m": c.n_params, "m_eff": max(ranks), "ranks": ranks}) + "\n", a.out)
    return EXIT_OK


def _qfi_points(c: Circuit, k: int, seed: int):
    import numpy as np

    rng = np.random.default_rng(seed)
    return [rng.uniform(0, 2 * np.pi, c.n_params) for _ in range(k)]


# -- sweeps --------------------------------------------------------------------------


def _cells(cfg: dict) -> list[dict]:
    axes = cfg.get("axes") or {}
    ns, depths = axes.get("n", []), axes.get("depth", [])
    if not ns or not depths:
        raise UsageError("sweep axes need nonempty 'n' and 'depth' lists")
    templates = axes.get("template", ["su4"])
    families = axes.get("family", ["cluster"])
    fields = axes.get("h", [0.0])
    instances = int(axes.get("instances", 1))
    cells = []
    for n, d, t, fam, h, inst in itertools.product(ns, depths, templates, families, fields, range(instances)):
        cells.append({"ansatz": cfg.get("ansatz", "brickwall"), "n": int(n), "depth": int(d), "template": t, "family": fam, "h": float(h), "instance": inst})
    return cells


def _cell_key(cell: dict, plan: dict, meff: str) -> str:
    blob = json.dumps({"cell": cell, "plan": plan, "meff": meff}, sort_keys=True)
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _cell_seed(key: str) -> int:
    return int(key, 16) & ((1 << 63) - 1)


def _run_cell(cell: dict, plan: dict, meff: str) -> dict:
    key = _cell_key(cell, plan, meff)
    seed = _cell_seed(key)
    row = {k: "" for k in SWEEP_COLUMNS}
    row.update({k: cell[k] for k in ("ansatz", "n", "depth", "template", "family", "h", "instance")})
    row.update(key=key, seed=seed, samples=plan["n_samples"], batches=plan["n_batches"])
    try:
        c = _make_circuit(cell["ansatz"], cell["n"], cell["depth"], cell["template"], cell["family"])
        spec = ModelSpec(cell["family"], cell["n"], cell["h"], cell["depth"], cell["instance"])
        h = build_model(spec).hamiltonian
        p = SamplePlan(plan["n_samples"], plan["n_batches"], seed, plan["engine"], plan.get("block_measure", "angles"))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            rep = relative_fluctuation(c, h, p, meff)
        row.update(
            m=rep.m, m_eff=rep.m_eff, m_eff_source=rep.m_eff_source, sigma=repr(rep.sigma),
            sigma_stderr=repr(rep.sigma_stderr), sigma0=repr(rep.sigma0), rf=repr(rep.rf),
            rf_stderr=repr(rep.rf_stderr), sigma_haar=repr(rep.sigma_haar), bound=repr(rep.theorem1_bound),
            mean_cost=repr(rep.mean_cost), engine=rep.engine,
        )
    except Exception as e:  # recorded per row; the sweep goes on
        row["error"] = f"{type(e).__name__}: {e}"
    return row


def _write_rows(path: str, rows: list[dict]):
    tmp = path + ".tmp"
    with open(tmp, "w", newline="") as fh:
        w = csv.DictWriter(fh, SWEEP_COLUMNS, lineterminator="\n")
        w.writeheader()
        w.writerows(rows)
    os.replace(tmp, path)


def run_sweep(cfg: dict, out: str, jobs: int = 1, log=print) -> list[dict]:
    """Run every cell of ``cfg`` and write CSV rows in config order; completed rows are reused."""
    plan_cfg = {"n_samples": 2000, "n_batches": 10, "engine": "clifford", "block_measure": "angles"}
    plan_cfg.update(cfg.get("plan", {}))
    SamplePlan(plan_cfg["n_samples"], plan_cfg["n_batches"], 0, plan_cfg["engine"], plan_cfg["block_measure"])
    meff = cfg.get("meff", "auto")
    cells = _cells(cfg)
    log(f"sweep: {len(cells)} cells")
    done = {}
    if os.path.exists(out):
        with open(out, newline="") as fh:
            for r in csv.DictReader(fh):
                if not r.get("error"):
                    done[r["key"]] = r
    keys = [_cell_key(c, plan_cfg, meff) for c in cells]
    todo = [i for i, k in enumerate(keys) if k not in done]
    log(f"sweep: {len(cells) - len(todo)} cached, {len(todo)} to run")
    results: dict[int, dict] = {i: done[k] for i, k in enumerate(keys) if k in done}

    def flush():
        _write_rows(out, [results[i] for i in range(len(cells)) if i in results])

    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(jobs) as ex:
            futs = {i: ex.submit(_run_cell, cells[i], plan_cfg, meff) for i in todo}
            for i in todo:
                results[i] = futs[i].result()
                flush()
    else:
        for i in todo:
            results[i] = _run_cell(cells[i], plan_cfg, meff)
            flush()
    flush()
    return [results[i] for i in range(len(cells))]


def cmd_sweep(a) -> int:
    if not os.path.exists(a.config):
        raise UsageError(f"config file not found: {a.config}")
    with open(a.config) as fh:
        cfg = json.load(fh)
    out = a.out or cfg.get("output")
    if not out:
        raise UsageError("sweep needs --out or an 'output' entry in the config")
    rows = run_sweep(cfg, out, _jobs(a), log=lambda m: print(m, file=sys.stderr))
    failed = sum(1 for r in rows if r["error"])
    print(f"wrote {len(rows)} rows to {out} ({failed} failed)")
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    p = argparse.ArgumentParser(prog="rf-lab", description="Relative-fluctuation learnability toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("build", parents=[common], help="build a circuit and print its JSON")
    _circuit_args(s)
    s.add_argument("--family", default=None, help="family for --ansatz exact")
    s.set_defaults(func=cmd_build)

    s = sub.add_parser("model", parents=[common], help="build a model Hamiltonian")
    s.add_argument("--family", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--h", type=float, default=0.0)
    s.add_argument("--depth", type=int, default=None, help="back-evolution depth")
    s.add_argument("--model-seed", type=int, default=0)
    s.add_argument("--v-out", help="write the back-evolution circuit here")
    s.set_defaults(func=cmd_model)

    s = sub.add_parser("rf", parents=[common], help="estimate the relative fluctuation")
    _circuit_args(s)
    _model_args(s)
    s.set_defaults(func=cmd_rf)

    s = sub.add_parser("sweep", parents=[common], help="run a sweep config and write CSV")
    s.add_argument("config")
    s.set_defaults(func=cmd_sweep)

    for name, func, helptext in (("rank", cmd_rank, "rank brickwall candidates by RF"), ("validate", cmd_validate, "join RF with trained errors")):
        s = sub.add_parser(name, parents=[common], help=helptext)
        s.add_argument("--candidates", default="su4:1,rycz:1,rycx:1,rxcx:1", help="template:depth list")
        s.add_argument("--n", type=int)
        _model_args(s)
        if name == "validate":
            s.add_argument("--restarts", type=int, default=10)
            s.add_argument("--iters", type=int, default=2000)
            s.add_argument("--lr", type=float, default=0.1)
        s.set_defaults(func=func)

    s = sub.add_parser("qfi", parents=[common], help="QFI rank of a circuit")
    _circuit_args(s)
    s.add_argument("--points", type=int, default=3)
    s.set_defaults(func=cmd_qfi)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        a = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return a.func(a)
    except (UsageError, ValueError, FileNotFoundError, KeyError) as e:
        print(f"rf-lab: error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except CapacityError as e:
        print(f"rf-lab: resource cap: {e}", file=sys.stderr)
        return EXIT_CAP
    except EngineError as e:
        hint = "" if "--engine" in str(e) else " (try --engine continuous)"
        print(f"rf-lab: engine error: {e}{hint}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
