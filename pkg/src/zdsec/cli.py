"""Command-line experiment runner.

Every run is a pure function of its configuration and seed. Each emitted
file gets a ``<name>.meta.json`` sidecar echoing the configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import platform
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .adversary import posterior_report
from .causal_rd import (
    DEFAULT_LIMIT,
    Quadruple,
    hamming,
    rc_curve,
    rc_si_curve,
    region_check_no_si,
    region_check_si,
)
from .codes import InstantaneousCode, build_huffman, huffman_length
from .envelope import INFEASIBLE
from .errors import ConfigError, InfeasibleTarget, StateSpaceTooLarge, ZdsecError
from .keystream import KeyStream, PrivateRandomness
from .secure_causal import design_separation, simulate
from .source_models import JointSourceModel, SourceModel, load_model, sample
from .zd_block import (
    decode_sequence,
    encode_sequence,
    independence_tv,
    joint_block_distribution,
    region_points,
)
from .zd_stream import decode_stream, encode_stream

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_LIMIT = 0, 1, 2, 3

SCHEMES = ("block", "stream", "audit", "region", "causal", "causal_si", "check")


@dataclass
class ExperimentConfig:
    scheme: str
    pmf: str | None = None
    joint: str | None = None
    dist: str | None = None
    code: str | None = None
    seed: int = 0
    n: int | None = None
    n_list: list[int] = field(default_factory=list)
    audit_scheme: str = "stream"
    grid: str | None = None
    m: int = 8
    trials: int = 1
    workers: int | None = None
    target_D: float | None = None
    target_h: float | None = None
    R: float | None = None
    R_k: float | None = None
    D: float | None = None
    h: float | None = None
    sw_margin: float = 0.1
    sw_block_len: int = 20
    emit: list[str] = field(default_factory=list)
    limit_states: int = DEFAULT_LIMIT

    def validate(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}")
        for name in ("pmf", "joint", "dist", "code"):
            path = getattr(self, name)
            if path is not None and path != "hamming" and not Path(path).is_file():
                raise ConfigError(f"--{name} file not found: {path}")
        need = {
            "block": ("pmf", "n"),
            "stream": ("pmf", "n"),
            "audit": ("pmf", "n_list"),
            "causal": ("dist", "target_D", "target_h", "n"),
            "causal_si": ("joint", "dist", "target_D", "target_h", "n"),
            "check": ("dist", "R", "R_k", "D", "h"),
        }.get(self.scheme, ())
        for name in need:
            if getattr(self, name) in (None, []):
                raise ConfigError(f"{self.scheme} needs --{name.replace('_', '-')}")
        if self.scheme == "causal" and self.pmf is None and self.joint is None:
            raise ConfigError("causal needs --pmf or --joint")
        if self.scheme == "check" and self.pmf is None and self.joint is None:
            raise ConfigError("check needs --pmf or --joint")
        if self.scheme == "region":
            if self.joint is None and self.pmf is None:
                raise ConfigError("region needs --pmf (R-R_k region) or --joint with --dist (curve)")
            if self.joint is not None and (self.dist is None or self.grid is None):
                raise ConfigError("region --joint needs --dist and --grid")
        if self.n is not None and self.n < 0:
            raise ConfigError("--n must be >= 0")
        if self.trials < 1 or self.m < 1:
            raise ConfigError("--trials and --m must be >= 1")
        if self.audit_scheme not in ("block", "stream"):
            raise ConfigError("--scheme must be block or stream")


# --- file helpers -----------------------------------------------------------


def _meta(config: ExperimentConfig, path: Path, extra: dict | None = None):
    meta = {
        "file": path.name,
        "seed": config.seed,
        "versions": {"zdsec": __version__, "numpy": np.__version__, "python": platform.python_version()},
        "config": asdict(config),
    }
    if extra:
        meta.update(extra)
    Path(str(path) + ".meta.json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows, config: ExperimentConfig, extra=None):
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    _meta(config, path, extra)


def write_json(path, obj, config: ExperimentConfig):
    path = Path(path)
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    _meta(config, path)


def load_distortion(spec: str, k: int) -> np.ndarray:
    """``hamming`` or a JSON file holding a matrix (bare or under ``"d"``)."""
    if spec == "hamming":
        return hamming(k)
    raw = json.loads(Path(spec).read_text())
    if isinstance(raw, dict):
        raw = raw.get("d", raw.get("distortion"))
    d = np.asarray(raw, dtype=np.float64)
    if d.ndim != 2 or d.shape[0] != k:
        raise ConfigError(f"distortion must be a {k}-row matrix")
    return d


def _load(path) -> SourceModel | JointSourceModel:
    try:
        return load_model(path)
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(f"bad model file {path}: {exc}") from exc


def _source(config: ExperimentConfig) -> SourceModel:
    model = _load(config.pmf or config.joint)
    return model.px if isinstance(model, JointSourceModel) else model


def _parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, steps = spec.split(":")
        return np.linspace(float(lo), float(hi), int(steps))
    except ValueError as exc:
        raise ConfigError(f"--grid must be lo:hi:steps, got {spec!r}") from exc


def _by_suffix(config, handlers: dict):
    for path in config.emit:
        for suffix, fn in handlers.items():
            if path.endswith(suffix):
                fn(path)
                break
        else:
            raise ConfigError(f"cannot emit {path!r} here; expected one of {sorted(handlers)}")


# --- subcommands ------------------------------------------------------------


def _run_block(config: ExperimentConfig) -> dict:
    model = _source(config)
    code = build_huffman(model)
    x = sample(model, config.n, config.seed)
    trace = encode_sequence(code, x, KeyStream(config.seed), PrivateRandomness(config.seed))
    decoded = decode_sequence(code, trace.blocks, KeyStream(config.seed))
    summary = {
        "n": config.n,
        "block_len": code.max_len,
        "huffman_length": huffman_length(model),
        "key_bits": trace.key_bits,
        "coding_bits": trace.coding_bits,
        "key_rate": trace.key_rate,
        "coding_rate": trace.coding_rate,
        "lossless": decoded == [int(v) for v in x],
        "codewords": list(code.codewords),
    }

    def region_csv(path):
        points, _ = region_points(model)
        rows = [("-".join(map(str, p.profile)), p.R, p.R_k, p.on_envelope) for p in points]
        write_csv(path, ["profile", "R", "R_k", "on_envelope"], rows, config)

    _by_suffix(config, {
        ".csv": region_csv,
        ".json": lambda p: write_json(p, {**summary, "blocks_head": trace.blocks[:64]}, config),
    })
    return summary


def _run_stream(config: ExperimentConfig) -> dict:
    model = _source(config)
    code = build_huffman(model)
    x = sample(model, config.n, config.seed)
    key = KeyStream(config.seed)
    stream = encode_stream(code, x, key)
    decoded = decode_stream(code, stream, KeyStream(config.seed), config.n)
    n = max(config.n, 1)
    summary = {
        "n": config.n,
        "huffman_length": huffman_length(model),
        "stream_bits": len(stream),
        "key_bits": key.consumed_bits,
        "coding_rate": len(stream) / n,
        "key_rate": key.consumed_bits / n,
        "lossless": decoded == [int(v) for v in x],
    }

    def view(path):
        Path(path).write_text(stream.adversary_view())
        _meta(config, Path(path), {"format": "ASCII '0'/'1', no framing"})

    _by_suffix(config, {".json": lambda p: write_json(p, summary, config), ".bin": view})
    return summary


def _load_code(config: ExperimentConfig, model: SourceModel) -> InstantaneousCode:
    if config.code is None:
        return build_huffman(model)
    code = InstantaneousCode.from_text(Path(config.code).read_text())
    if code.alphabet_size != model.alphabet_size:
        raise ConfigError("code and pmf differ in alphabet size")
    return code


def _run_audit(config: ExperimentConfig) -> dict:
    model = _source(config)
    code = _load_code(config, model)
    n_list = sorted(config.n_list)
    rows = []
    for n in n_list:
        x = sample(model, n, config.seed)
        key = KeyStream(config.seed)
        if config.audit_scheme == "stream":
            rep = posterior_report(code, model, n, config.limit_states)
            bits = len(encode_stream(code, x, key))
            rows.append((n, rep.expected_tv, rep.max_tv, key.consumed_bits / n, bits / n))
        else:
            # stages are i.i.d., so the exact one-stage dependence measures every n
            tv = independence_tv(joint_block_distribution(code, model))
            trace = encode_sequence(code, x, key, PrivateRandomness(config.seed))
            rows.append((n, tv, tv, trace.key_rate, trace.coding_rate))
    header = ["n", "expected_tv", "max_tv", "key_rate", "coding_rate"]
    _by_suffix(config, {".csv": lambda p: write_csv(p, header, rows, config)})
    return {"rows": [dict(zip(header, r)) for r in rows]}


def _curve(model, d, limit):
    if isinstance(model, JointSourceModel):
        return rc_si_curve(model, d, limit)
    return rc_curve(model, d, limit)


def _run_region(config: ExperimentConfig) -> dict:
    if config.joint is None:
        model = _source(config)
        points, _ = region_points(model)
        rows = [("-".join(map(str, p.profile)), p.R, p.R_k, p.on_envelope) for p in points]
        header = ["profile", "R", "R_k", "on_envelope"]
    else:
        model = _load(config.joint)
        k = (model.px if isinstance(model, JointSourceModel) else model).alphabet_size
        curve = _curve(model, load_distortion(config.dist, k), config.limit_states)
        rows = []
        for D in _parse_grid(config.grid):
            best = curve.witness(D)
            if best is INFEASIBLE:
                rows.append((float(D), "infeasible", "infeasible", "", ""))
                continue
            g = best.witness.g_str() if hasattr(best.witness, "g_str") else ""
            rows.append((float(D), float(best.rate), float(curve(D)), str(best.witness), g))
        header = ["D", "r_c", "r_c_envelope", "witness_f", "witness_g"]
    _by_suffix(config, {".csv": lambda p: write_csv(p, header, rows, config)})
    return {"rows": [dict(zip(header, r)) for r in rows]}


def _trial(args):
    scheme, d, n, seed = args
    return simulate(scheme, d, n, seed)


def _run_causal(config: ExperimentConfig) -> dict:
    model = _load(config.joint or config.pmf)
    if config.scheme == "causal" and isinstance(model, JointSourceModel):
        model = model.px
    if config.scheme == "causal_si" and not isinstance(model, JointSourceModel):
        raise ConfigError("causal_si needs a joint model with py_given_x")
    k = (model.px if isinstance(model, JointSourceModel) else model).alphabet_size
    d = load_distortion(config.dist, k)
    scheme = design_separation(
        model, d, config.target_D, config.target_h, m=config.m,
        sw_margin=config.sw_margin, sw_block_len=config.sw_block_len,
        sw_seed=config.seed, limit=config.limit_states,
    )
    if not scheme.side_info and config.n % config.m:
        raise ConfigError(f"--n={config.n} must be a multiple of --m={config.m}")
    seeds = [int(np.random.SeedSequence([config.seed, t]).generate_state(1)[0]) for t in range(config.trials)]
    jobs = [(scheme, d, config.n, s) for s in seeds]
    workers = config.workers or 1
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_trial, jobs))
    else:
        results = [_trial(j) for j in jobs]
    header = ["trial", "seed", "n", "R_emp", "Rk_emp", "D_emp", "h_bound", "sw_error", "messages_ok"]
    rows = [
        (t, s, r.n, r.R_emp, r.Rk_emp, r.D_emp, r.h_bound, r.sw_error, r.messages_ok)
        for t, (s, r) in enumerate(zip(seeds, results))
    ]
    design = {
        "quantizers": [str(q) for q in scheme.quantizers],
        "lam": scheme.lam,
        "key_rate": scheme.key_rate,
        "side_info": scheme.side_info,
    }
    _by_suffix(config, {".csv": lambda p: write_csv(p, header, rows, config, {"design": design})})
    return {"design": design, "rows": [dict(zip(header, r)) for r in rows]}


def _run_check(config: ExperimentConfig) -> dict:
    model = _load(config.joint or config.pmf)
    q = Quadruple(config.R, config.R_k, config.D, config.h)
    if isinstance(model, JointSourceModel):
        d = load_distortion(config.dist, model.px.alphabet_size)
        rep = region_check_si(model, d, q, curve=rc_si_curve(model, d, config.limit_states))
    else:
        d = load_distortion(config.dist, model.alphabet_size)
        rep = region_check_no_si(model, d, q, curve=rc_curve(model, d, config.limit_states))
    out = {
        "member": bool(rep.member),
        "slack": {k: float(v) for k, v in rep.slack.items()},
        "binding": list(rep.binding),
        "envelope_value": rep.envelope_value,
        "no_encryption": None if rep.no_encryption is None else bool(rep.no_encryption),
    }

    def csv_out(path):
        rows = [(name, v, name in rep.binding) for name, v in rep.slack.items()]
        write_csv(path, ["constraint", "slack", "binding"], rows, config, {"member": rep.member})

    _by_suffix(config, {".json": lambda p: write_json(p, out, config), ".csv": csv_out})
    return out


RUNNERS = {
    "block": _run_block,
    "stream": _run_stream,
    "audit": _run_audit,
    "region": _run_region,
    "causal": _run_causal,
    "causal_si": _run_causal,
    "check": _run_check,
}


def run(config: ExperimentConfig, out=None) -> int:
    """Run one experiment; returns the process exit code."""
    out = sys.stdout if out is None else out
    err = sys.stderr
    try:
        config.validate()
        summary = RUNNERS[config.scheme](config)
    except InfeasibleTarget as exc:
        print(f"infeasible target: {exc}", file=err)
        return EXIT_INFEASIBLE
    except StateSpaceTooLarge as exc:
        print(f"state-space limit: {exc}", file=err)
        return EXIT_LIMIT
    except (ZdsecError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=err)
        return EXIT_CONFIG
    print(json.dumps(summary, indent=2, sort_keys=True, default=_fmt), file=out)
    return EXIT_OK


# --- argument parsing -------------------------------------------------------


def _int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--emit", action="append", default=[], help="output file; repeatable")
    common.add_argument("--limit-states", type=int, default=DEFAULT_LIMIT)

    p = argparse.ArgumentParser(prog="zdsec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    b = sub.add_parser("block", parents=[common], help="constant-length perfectly secret scheme")
    b.add_argument("--pmf", required=True)
    b.add_argument("--n", type=int, required=True)

    s = sub.add_parser("stream", parents=[common], help="unframed one-time-padded Huffman stream")
    s.add_argument("--pmf", required=True)
    s.add_argument("--n", type=int, required=True)

    a = sub.add_parser("audit", parents=[common], help="eavesdropper posterior audit")
    a.add_argument("--scheme", choices=["block", "stream"], default="stream")
    a.add_argument("--pmf", required=True)
    a.add_argument("--code", help="code file, one 'symbol<TAB>bits' per line (default: Huffman)")
    a.add_argument("--n-list", type=_int_list, required=True)

    r = sub.add_parser("region", parents=[common], help="R-R_k region or causal rate-distortion curve")
    r.add_argument("--pmf")
    r.add_argument("--joint")
    r.add_argument("--dist", help="distortion matrix JSON file, or 'hamming'")
    r.add_argument("--grid", help="lo:hi:steps")

    c = sub.add_parser("causal-sim", parents=[common], help="separation scheme simulation")
    c.add_argument("--joint", help="model file; without py_given_x the no-SI scheme runs")
    c.add_argument("--pmf")
    c.add_argument("--dist", required=True)
    c.add_argument("--target-D", type=float, required=True)
    c.add_argument("--target-h", type=float, required=True)
    c.add_argument("--n", type=int, required=True)
    c.add_argument("--m", type=int, default=8)
    c.add_argument("--trials", type=int, default=1)
    c.add_argument("--workers", type=int, default=None)
    c.add_argument("--sw-margin", type=float, default=0.1)
    c.add_argument("--sw-block-len", type=int, default=20)

    k = sub.add_parser("check", parents=[common], help="region membership of (R, R_k, D, h)")
    k.add_argument("--pmf")
    k.add_argument("--joint")
    k.add_argument("--dist", required=True)
    k.add_argument("--R", type=float, required=True)
    k.add_argument("--Rk", type=float, required=True)
    k.add_argument("--D", type=float, required=True)
    k.add_argument("--h", type=float, required=True)
    return p


def config_from_args(ns: argparse.Namespace) -> ExperimentConfig:
    cfg = ExperimentConfig(
        scheme=ns.command,
        seed=ns.seed,
        emit=list(ns.emit),
        limit_states=ns.limit_states,
    )
    for name in ("pmf", "joint", "dist", "code", "n", "grid", "m", "trials", "workers",
                 "target_D", "target_h", "R", "D", "h", "sw_margin", "sw_block_len"):
        if hasattr(ns, name):
            setattr(cfg, name, getattr(ns, name))
    if hasattr(ns, "Rk"):
        cfg.R_k = ns.Rk
    if ns.command == "audit":
        cfg.n_list = ns.n_list
        cfg.audit_scheme = ns.scheme
    if ns.command == "causal-sim":
        model = _load(ns.joint or ns.pmf) if (ns.joint or ns.pmf) else None
        cfg.scheme = "causal_si" if isinstance(model, JointSourceModel) else "causal"
    return cfg


def main(argv=None) -> int:
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        config = config_from_args(ns)
    except (ZdsecError, ValueError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
