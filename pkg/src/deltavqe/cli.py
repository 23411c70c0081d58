"""Command-line front end.

Subcommands: ``sweep``, ``depth-scan``, ``vqe``, ``exact`` and ``models``.
Every CSV written with ``--out PATH`` gets a ``PATH.manifest.json`` sidecar
holding the fully resolved configuration; passing that file back through
``--config`` reproduces the run.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import tempfile
from pathlib import Path

from . import __version__
from .ansatz import HvaAnsatz, ReferenceId
from .delta import SweepConfig, depth_scan, resolve_refs, sweep
from .oracle import lowest_levels
from .pauli import ModelId, build_model
from .vqe import OptimizerConfig, optimize

log = logging.getLogger("deltavqe")

OPTIMIZER_KEYS = {
    # flag name -> OptimizerConfig field
    "restarts": "restarts",
    "max-iters": "max_iterations",
    "grad-tol": "grad_tolerance",
    "energy-tol": "energy_tolerance",
    "seed": "seed",
    "init-width": "init_half_width",
}


class UsageError(Exception):
    """Bad flag values; reported with exit status 2."""


def fmt(x) -> str:
    """12 significant digits, locale independent; blank for missing values."""
    if x is None:
        return ""
    return format(float(x), ".12g")


def parse_int_list(text: str) -> list[int]:
    """``"1..6"``, ``"1,2,4"`` or a mix such as ``"1..3,6"``."""
    out: list[int] = []
    for part in text.split(","):
        part = part.strip()
        if not part:
            continue
        if ".." in part:
            lo, hi = part.split("..", 1)
            out.extend(range(int(lo), int(hi) + 1))
        else:
            out.append(int(part))
    return out


def parse_float_list(text: str) -> list[float]:
    return [float(p) for p in text.split(",") if p.strip()]


def _add_common(p: argparse.ArgumentParser, depth: bool = True):
    p.add_argument("--config", type=Path, help="JSON file of flag values (e.g. a run manifest)")
    p.add_argument("--model", choices=[m.value for m in ModelId])
    p.add_argument("--sites", type=int, help="number of qubits N")
    if depth:
        p.add_argument("--depth", type=int, help="HVA layers p")
    p.add_argument("--out", type=Path, help="CSV output path (default: standard output)")


def _add_optimizer(p: argparse.ArgumentParser):
    d = OptimizerConfig()
    p.add_argument("--restarts", type=int, help=f"random restarts (default {d.restarts})")
    p.add_argument("--max-iters", type=int, help=f"iterations per restart (default {d.max_iterations})")
    p.add_argument("--grad-tol", type=float, help=f"gradient inf-norm stop (default {d.grad_tolerance:g})")
    p.add_argument("--energy-tol", type=float, help=f"per-step improvement stop (default {d.energy_tolerance:g})")
    p.add_argument("--seed", type=int, help=f"base random seed (default {d.seed})")
    p.add_argument("--init-width", type=float, help="half width of the uniform initial draw, radians")
    p.add_argument("--threads", type=int, help="worker processes; 1 is fully deterministic (default 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="deltavqe", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="energy difference over an h grid")
    _add_common(p)
    p.add_argument("--h-min", type=float)
    p.add_argument("--h-max", type=float)
    p.add_argument("--h-step", type=float)
    p.add_argument("--refs", help="two references, e.g. zero,plus-x")
    p.add_argument("--order", action="append",
                   help="layer order for a reference, e.g. x,zz; give once per reference")
    p.add_argument("--exact", action="store_true", default=None, help="add the exact ground energy")
    p.add_argument("--warm-start", action="store_true", default=None,
                   help="seed each point with the previous optimum (off for reproductions)")
    _add_optimizer(p)

    p = sub.add_parser("depth-scan", help="energy difference for each (h, p) pair")
    _add_common(p, depth=False)
    p.add_argument("--h-list", help="comma separated h values")
    p.add_argument("--p-list", help="depths, e.g. 1..6 or 1,2,4")
    p.add_argument("--refs")
    p.add_argument("--exact", action="store_true", default=None)
    _add_optimizer(p)

    p = sub.add_parser("vqe", help="optimize a single reference at one h")
    _add_common(p)
    p.add_argument("--h", type=float)
    p.add_argument("--reference")
    p.add_argument("--order")
    _add_optimizer(p)

    p = sub.add_parser("exact", help="exact E0, E1 and gap")
    _add_common(p, depth=False)
    p.add_argument("--h", type=float, help="single h value")
    p.add_argument("--h-list")
    p.add_argument("--h-min", type=float)
    p.add_argument("--h-max", type=float)
    p.add_argument("--h-step", type=float)

    p = sub.add_parser("models", help="print the Pauli terms of the catalog models")
    p.add_argument("--model", choices=[m.value for m in ModelId])
    p.add_argument("--sites", type=int, default=8)
    return parser


def _merge_config(args: argparse.Namespace) -> dict:
    """Flags override config-file values; returns a flag-name keyed dict."""
    values: dict = {}
    cfg_path = getattr(args, "config", None)
    if cfg_path is not None:
        try:
            data = json.loads(Path(cfg_path).read_text())
        except (OSError, ValueError) as exc:
            raise UsageError(f"--config: cannot read {cfg_path}: {exc}") from None
        values.update({k.replace("_", "-"): v for k, v in data.items()})
    for key, val in vars(args).items():
        if val is not None and key not in ("config", "command", "verbose"):
            values[key.replace("_", "-")] = val
    return values


def _require(values: dict, *keys):
    missing = [k for k in keys if values.get(k) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + k for k in missing))


def _optimizer(values: dict) -> OptimizerConfig:
    kwargs = {field: values[flag] for flag, field in OPTIMIZER_KEYS.items()
              if values.get(flag) is not None}
    try:
        return OptimizerConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"optimizer flags: {exc}") from None


def _threads(values: dict) -> int:
    threads = int(values["threads"]) if values.get("threads") is not None else 1
    if threads < 1:
        raise UsageError("--threads must be >= 1")
    return threads


def _model_sites(values: dict) -> tuple[ModelId, int]:
    _require(values, "model", "sites")
    model = ModelId.parse(values["model"])
    sites = int(values["sites"])
    if not 2 <= sites <= 16:
        raise UsageError(f"--sites must be between 2 and 16, got {sites}")
    if model is ModelId.CLUSTER_ISING and sites < 3:
        raise UsageError("--sites must be >= 3 for the cluster model")
    return model, sites


def _refs(values: dict, model: ModelId):
    raw = values.get("refs")
    if isinstance(raw, str):
        raw = [r for r in raw.split(",") if r.strip()]
    try:
        return resolve_refs(model, raw)
    except ValueError as exc:
        raise UsageError(f"--refs: {exc}") from None


def _manifest(command: str, values: dict, **resolved) -> dict:
    keep = {k: v for k, v in values.items() if k not in ("out",)}
    keep.update(resolved)
    keep["command"] = command
    keep["version"] = __version__
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(keep.items())}


def _write_outputs(out: Path | None, header: list[str], rows: list[list], manifest: dict | None):
    """Write CSV (and sidecar) atomically, or print CSV to stdout."""
    lines = [",".join(header)] + [",".join(r) for r in rows]
    text = "\n".join(lines) + "\n"
    if out is None:
        sys.stdout.write(text)
        return
    out = Path(out)
    side = Path(str(out) + ".manifest.json")
    tmp_paths = []
    try:
        for path, body in ((out, text),
                           (side, json.dumps(manifest, indent=2, sort_keys=True) + "\n")):
            fd, tmp = tempfile.mkstemp(dir=path.parent or ".", prefix=path.name, suffix=".tmp")
            tmp_paths.append(tmp)
            with os.fdopen(fd, "w", newline="\n") as fh:
                fh.write(body)
        os.replace(tmp_paths[0], out)
        os.replace(tmp_paths[1], side)
    except BaseException:
        for tmp in tmp_paths:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise


def cmd_sweep(values: dict) -> int:
    model, sites = _model_sites(values)
    _require(values, "depth")
    refs = _refs(values, model)
    d = SweepConfig()
    h_min = float(values.get("h-min", d.h_min))
    h_max = float(values.get("h-max", d.h_max))
    h_step = float(values.get("h-step", d.h_step))
    if not h_min <= h_max:
        raise UsageError(f"--h-min ({h_min:g}) must not exceed --h-max ({h_max:g})")
    if not h_step > 0:
        raise UsageError(f"--h-step must be positive, got {h_step:g}")
    if int(values["depth"]) < 1:
        raise UsageError("--depth must be >= 1")
    orders = values.get("order")
    if orders is not None:
        if len(orders) != 2:
            raise UsageError("--order must be given exactly twice (one per reference)")
        orders = tuple(orders)
    H = build_model(model, sites)
    for ref, order in zip(refs, orders or (None, None)):
        try:
            HvaAnsatz.for_model(H, ref, int(values["depth"]), order)
        except ValueError as exc:
            raise UsageError(f"--refs/--order: {exc}") from None
    cfg = SweepConfig(h_min, h_max, h_step, int(values["depth"]), _optimizer(values),
                      bool(values.get("exact", False)), bool(values.get("warm-start", False)))
    threads = _threads(values)

    curve = sweep(model, sites, cfg, refs, threads=threads, orders=orders)
    rows = [[fmt(p.h), fmt(p.e0), fmt(p.e1), fmt(p.delta), fmt(p.e_exact)] for p in curve.points]
    manifest = _manifest("sweep", values, model=model.value, sites=sites, depth=cfg.depth,
                         refs=[r.value for r in refs], **{"h-min": h_min, "h-max": h_max,
                         "h-step": h_step, "exact": cfg.compute_exact,
                         "warm-start": cfg.warm_start, "threads": threads},
                         **_optimizer_flags(cfg.optimizer))
    _write_outputs(values.get("out"), ["h", "e0", "e1", "delta", "e_exact"], rows, manifest)
    print(f"h_c = {fmt(curve.located_minimum)}")
    return 0


def _optimizer_flags(opt: OptimizerConfig) -> dict:
    return {flag: getattr(opt, field) for flag, field in OPTIMIZER_KEYS.items()}


def cmd_depth_scan(values: dict) -> int:
    model, sites = _model_sites(values)
    _require(values, "h-list", "p-list")
    try:
        h_list = values["h-list"]
        h_list = parse_float_list(h_list) if isinstance(h_list, str) else [float(h) for h in h_list]
        p_list = values["p-list"]
        p_list = parse_int_list(p_list) if isinstance(p_list, str) else [int(p) for p in p_list]
    except ValueError as exc:
        raise UsageError(f"cannot parse --h-list/--p-list: {exc}") from None
    if not h_list:
        raise UsageError("--h-list is empty")
    if not p_list:
        raise UsageError("--p-list is empty")
    if min(p_list) < 1:
        raise UsageError("--p-list depths must be >= 1")
    refs = _refs(values, model)
    opt = _optimizer(values)
    threads = _threads(values)
    exact = bool(values.get("exact", False))

    scan = depth_scan(model, sites, h_list, p_list, refs, opt, threads=threads, exact=exact)
    header = ["p", "h", "e0", "e1", "delta"] + (["e_exact"] if exact else [])
    rows = []
    for p, pt in scan.rows():
        row = [str(p), fmt(pt.h), fmt(pt.e0), fmt(pt.e1), fmt(pt.delta)]
        if exact:
            row.append(fmt(pt.e_exact))
        rows.append(row)
    manifest = _manifest("depth-scan", values, model=model.value, sites=sites,
                         refs=[r.value for r in refs], exact=exact, threads=threads,
                         **{"h-list": h_list, "p-list": p_list}, **_optimizer_flags(opt))
    _write_outputs(values.get("out"), header, rows, manifest)
    return 0


def cmd_vqe(values: dict) -> int:
    model, sites = _model_sites(values)
    _require(values, "depth", "h", "reference")
    try:
        ref = ReferenceId.parse(values["reference"])
        H = build_model(model, sites)
        ansatz = HvaAnsatz.for_model(H, ref, int(values["depth"]), values.get("order"))
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    opt = _optimizer(values)
    h = float(values["h"])
    res = optimize(ansatz, h, opt)
    rows = [[str(r), fmt(e), str(it), str(int(c))] for r, (e, it, c) in
            enumerate(zip(res.per_restart_energies, res.iterations_used, res.converged))]
    manifest = _manifest("vqe", values, model=model.value, sites=sites,
                         reference=ref.value, order=list(ansatz.layer_order),
                         **_optimizer_flags(opt))
    _write_outputs(values.get("out"), ["restart", "energy", "iterations", "converged"], rows, manifest)
    theta = " ".join(fmt(t) for t in res.best_theta.ravel())
    print(f"best_energy = {fmt(res.best_energy)}")
    print(f"best_theta = {theta}")
    return 0


def cmd_exact(values: dict) -> int:
    model, sites = _model_sites(values)
    if values.get("h") is not None:
        hs = [float(values["h"])]
    elif values.get("h-list") is not None:
        raw = values["h-list"]
        hs = parse_float_list(raw) if isinstance(raw, str) else [float(h) for h in raw]
    else:
        d = SweepConfig()
        try:
            cfg = SweepConfig(float(values.get("h-min", d.h_min)), float(values.get("h-max", d.h_max)),
                              float(values.get("h-step", d.h_step)))
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        hs = [float(h) for h in cfg.grid()]
    if not hs:
        raise UsageError("no h values given")
    H = build_model(model, sites)
    rows = []
    for h in hs:
        e0, e1 = lowest_levels(H, h, 2)
        rows.append([fmt(h), fmt(e0), fmt(e1), fmt(max(0.0, e1 - e0))])
    manifest = _manifest("exact", values, model=model.value, sites=sites, **{"h-list": hs})
    _write_outputs(values.get("out"), ["h", "E0", "E1", "gap"], rows, manifest)
    return 0


def cmd_models(values: dict) -> int:
    sites = int(values.get("sites", 8))
    models = [ModelId.parse(values["model"])] if values.get("model") else list(ModelId)
    for model in models:
        try:
            H = build_model(model, sites)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        weights = ["1", "h"]
        for g, w in zip(H.groups, weights):
            print(f"# {model.value} N={sites} group {g.label} weight {w}")
            for line in g.lines():
                print(line)
    return 0


COMMANDS = {
    "sweep": cmd_sweep,
    "depth-scan": cmd_depth_scan,
    "vqe": cmd_vqe,
    "exact": cmd_exact,
    "models": cmd_models,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        values = _merge_config(args)
        return COMMANDS[args.command](values)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"deltavqe {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (ArithmeticError, RuntimeError, ValueError, MemoryError, OSError) as exc:
        print(f"deltavqe {args.command}: computation failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
