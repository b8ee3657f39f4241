"""``phasecone`` command-line interface.

Every verb accepts the shared configuration flags (``--fock-dim``,
``--half-extent``, ``--points``, ...), which override values from
``--config`` or ``$PHASECONE_CONFIG``. Outputs go to ``--outdir`` and each run
appends an entry with file hashes to ``manifest.json`` there. Warnings are
reported but never change the exit status.
"""

from __future__ import annotations

import argparse
import csv
import io as _io
import json
import logging
import sys
import warnings
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from . import experiments
from .config import ExperimentRecord, RunConfig, check_manifest
from .errors import PhaseconeError
from .fock import (
    DensityState,
    purity,
    state_cat,
    state_coherent,
    state_fock,
    state_thermal,
    state_vacuum,
)
from .io import load_field, load_operator, save_field, save_operator, write_json
from .phase import grid_integral, l2_norm
from .positivity import (
    INTERPOLATIONS,
    SampleSet,
    pd_test_classical,
    pd_test_quantum,
    standard_sample_sets,
)
from .semigroups import (
    GaussianSemigroupParams,
    cq_apply,
    gaussian_char,
    purity_from_char,
    twirl_apply,
)
from .transforms import WignerField, char_function, dequantize, symplectic_fourier

log = logging.getLogger("phasecone")

EXIT_OK = 0
EXIT_FAIL = 1
EXIT_ERROR = 2


def fmt(x) -> str:
    """17 significant digits, the round-trip precision of float64."""
    return f"{float(x):.17g}"


def _complex_json(z: complex) -> dict:
    return {"re": float(np.real(z)), "im": float(np.imag(z))}


class _WarningLog:
    """Collects warnings raised during a command so they can annotate the output."""

    def __init__(self):
        self.messages: list[str] = []
        self._ctx = warnings.catch_warnings(record=True)

    def __enter__(self):
        self._caught = self._ctx.__enter__()
        warnings.simplefilter("always")
        return self

    def __exit__(self, *exc):
        self.messages = [f"{w.category.__name__}: {w.message}" for w in self._caught]
        for m in self.messages:
            print(f"warning: {m}", file=sys.stderr)
        return self._ctx.__exit__(*exc)


# ---------------------------------------------------------------------------
# Argument parsing


def _config_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration")
    g.add_argument("--config", help="JSON config file (default: $PHASECONE_CONFIG)")
    g.add_argument("--fock-dim", type=int, dest="fock_dim")
    g.add_argument("--half-extent", type=float, dest="half_extent")
    g.add_argument("--points", type=int)
    g.add_argument("--psd-tol", type=float, dest="psd_tol")
    g.add_argument("--psd-tol-field", type=float, dest="psd_tol_field")
    g.add_argument("--quad-scheme", choices=["gauss_hermite", "monte_carlo"], dest="quad_scheme")
    g.add_argument("--quad-order", type=int, dest="quad_order")
    g.add_argument("--quad-samples", type=int, dest="quad_samples")
    g.add_argument("--seed", type=int)
    g.add_argument("--outdir")
    g.add_argument("--threads", type=int, help="cap on BLAS worker threads")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    parent = _config_parent()
    parser = argparse.ArgumentParser(prog="phasecone", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("state", parents=[parent], help="write a corpus density matrix")
    p.add_argument("kind", choices=["vacuum", "coherent", "fock", "thermal", "cat"])
    p.add_argument("--alpha", type=complex, default=1.0, help="coherent / cat amplitude")
    p.add_argument("--k", type=int, default=1, help="Fock index")
    p.add_argument("--nbar", type=float, default=1.0, help="thermal occupation")
    p.add_argument("--name", help="output stem (default: the kind)")
    p.add_argument("--format", choices=["bin", "csv"], default="bin")

    for verb in ("char", "wigner"):
        p = sub.add_parser(verb, parents=[parent], help=f"sample the {verb} function of a state file")
        p.add_argument("state_file")
        p.add_argument("--name", help="output stem")
        p.add_argument("--format", choices=["bin", "csv"], default="bin")

    p = sub.add_parser("positivity", parents=[parent], help="finite-sample positive-definiteness test")
    p.add_argument("side", choices=["classical", "quantum"])
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--fn", help="one | gauss:c=C | gaussian-char:var=V[,vq=..,vp=..,t=..]")
    src.add_argument("--field", help="field file written by `char` (or any field file)")
    src.add_argument("--state", help="state file; its characteristic function is evaluated exactly")
    p.add_argument("--samples", default="lattice-50", help="lattice-50 | random-50 | path to q,p CSV")
    p.add_argument("--interp", choices=INTERPOLATIONS, default="sinc")
    p.add_argument("--tol", type=float)
    p.add_argument("--expect", choices=["pass", "fail"])
    p.add_argument("--name", help="report stem")

    p = sub.add_parser("evolve", parents=[parent], help="Gaussian semigroup trajectory of a state")
    p.add_argument("state_file")
    p.add_argument("--variance", type=float, default=0.5, help="isotropic diffusion sigma^2")
    p.add_argument("--covariance", help="explicit 2x2 covariance as s11,s12,s22")
    p.add_argument("--drift", default="0,0", help="drift velocity vq,vp")
    p.add_argument("--times", default="0,0.25,0.5,1.0")
    p.add_argument("--mode", choices=["cq", "twirl", "both"], default="both")
    p.add_argument("--name", help="CSV stem")

    p = sub.add_parser("verify", parents=[parent], help="run identity suites")
    p.add_argument("suite", choices=[*experiments.SUITES, "all"])
    p.add_argument("--flip-multiplier", action="store_true", help="debug: conjugate the Weyl multiplier")
    p.add_argument("--name", help="summary stem")

    p = sub.add_parser("check-manifest", parents=[parent], help="re-hash the files listed in a manifest")
    p.add_argument("directory", nargs="?")
    return parser


def _load_config(args) -> RunConfig:
    keys = RunConfig.keys()
    overrides = {k: getattr(args, k) for k in keys if getattr(args, k, None) is not None}
    return RunConfig.load(args.config, overrides)


def _thread_limit(n: int):
    if not n:
        return nullcontext()
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:  # pragma: no cover - threadpoolctl ships with scipy's usual stacks
        warnings.warn("threadpoolctl unavailable; --threads ignored", RuntimeWarning, stacklevel=2)
        return nullcontext()
    return threadpool_limits(limits=n)


# ---------------------------------------------------------------------------
# Verbs


def cmd_state(args, cfg: RunConfig, rec: ExperimentRecord, out: Path) -> int:
    N = cfg.fock_dim
    builders = {
        "vacuum": lambda: state_vacuum(N),
        "coherent": lambda: state_coherent(args.alpha, N),
        "fock": lambda: state_fock(args.k, N),
        "thermal": lambda: state_thermal(args.nbar, N),
        "cat": lambda: state_cat(args.alpha, N),
    }
    rho = builders[args.kind]()
    stem = out / (args.name or args.kind)
    paths = save_operator(stem, rho, args.format)
    m = rho.matrix
    eig = np.linalg.eigvalsh(0.5 * (m + m.conj().T))
    report = {
        "kind": args.kind,
        "N": N,
        "trace": float(np.trace(m).real),
        "min_eig": float(eig[0]),
        "hermiticity_defect": float(np.max(np.abs(m - m.conj().T))),
        "purity": purity(rho),
        "verdict": "pass",
    }
    paths.append(write_json(Path(f"{stem}_cert.json"), report))
    rec.add(*paths)
    rec.summary = report
    print(f"state {args.kind}: purity {fmt(report['purity'])} trace {fmt(report['trace'])} -> {paths[0]}")
    return EXIT_OK


def _state_from_file(path: str) -> DensityState:
    return load_operator(path, as_state=True)


def _char_summary(chi, grid) -> dict:
    return {
        "chi_origin": _complex_json(chi.origin_value),
        "chi_sup": float(np.max(np.abs(chi.values))),
        "haar_l2": l2_norm(chi, "haar"),
    }


def cmd_char(args, cfg, rec, out) -> int:
    grid = cfg.grid
    with _WarningLog() as wl:
        rho = _state_from_file(args.state_file)
        chi = dequantize(rho, grid)
        summary = _char_summary(chi, grid)
    summary["warnings"] = wl.messages
    stem = out / (args.name or f"{Path(args.state_file).with_suffix('').name}_char")
    paths = save_field(stem, chi, args.format)
    paths.append(write_json(Path(f"{stem}_summary.json"), summary))
    rec.add(*paths)
    rec.summary = summary
    _print_summary(summary)
    return EXIT_OK


def cmd_wigner(args, cfg, rec, out) -> int:
    grid = cfg.grid
    with _WarningLog() as wl:
        rho = _state_from_file(args.state_file)
        chi = dequantize(rho, grid)
        w = WignerField(grid, symplectic_fourier(chi).values / (2 * np.pi))
        summary = _char_summary(chi, grid)
        summary["wigner_integral"] = _complex_json(grid_integral(w, "lebesgue"))
        summary["wigner_min"] = float(np.min(w.values.real))
        summary["wigner_max_imag"] = float(np.max(np.abs(w.values.imag)))
    summary["warnings"] = wl.messages
    stem = out / (args.name or f"{Path(args.state_file).with_suffix('').name}_wigner")
    paths = save_field(stem, w, args.format)
    paths.append(write_json(Path(f"{stem}_summary.json"), summary))
    rec.add(*paths)
    rec.summary = summary
    _print_summary(summary)
    return EXIT_OK


def _print_summary(summary: dict):
    for key, value in summary.items():
        if key == "warnings":
            continue
        if isinstance(value, dict):
            sign = "-" if value["im"] < 0 else "+"
            value = f"{fmt(value['re'])} {sign} {fmt(abs(value['im']))}i"
        elif isinstance(value, float):
            value = fmt(value)
        print(f"{key:>18}: {value}")


def parse_function(spec: str):
    """Named analytic families for the positivity command."""
    name, _, rest = spec.partition(":")
    kw = {}
    for item in filter(None, rest.split(",")):
        key, _, val = item.partition("=")
        kw[key.strip()] = float(val)
    if name == "one":
        return lambda q, p: np.ones(np.broadcast(q, p).shape, dtype=complex)
    if name == "gauss":
        return experiments.gaussian(kw.get("c", 0.25))
    if name == "gaussian-char":
        params = GaussianSemigroupParams((kw.get("vq", 0.0), kw.get("vp", 0.0)), kw.get("var", 1.0))
        return gaussian_char(params, kw.get("t", 1.0))
    raise ValueError(f"unknown function spec {spec!r}")


def parse_samples(spec: str) -> SampleSet:
    sets = standard_sample_sets()
    if spec in sets:
        return sets[spec]
    return SampleSet.from_csv(Path(spec).read_text())


def cmd_positivity(args, cfg, rec, out) -> int:
    S = parse_samples(args.samples)
    if args.fn:
        chi, tol, label = parse_function(args.fn), cfg.psd_tol, args.fn
    elif args.field:
        chi, tol, label = load_field(args.field), cfg.psd_tol_field, args.field
    else:
        chi, tol, label = char_function(_state_from_file(args.state)), cfg.psd_tol, args.state
    tol = args.tol if args.tol is not None else tol
    test = pd_test_quantum if args.side == "quantum" else pd_test_classical
    with _WarningLog() as wl:
        report = test(chi, S, tol=tol, interpolation=args.interp)
    payload = {"side": args.side, "function": label, "samples": args.samples, **report.to_dict()}
    payload["warnings"] = wl.messages
    stem = out / (args.name or f"positivity_{args.side}")
    path = write_json(Path(f"{stem}.json"), payload)
    rec.add(path)
    rec.summary = payload
    width = max(len(k) for k in payload)
    for key in ("side", "function", "samples", "gram_dim", "min_eig", "max_eig", "hermiticity_defect",
                "tolerance_used", "verdict"):
        value = payload[key]
        print(f"{key:<{width}}  {fmt(value) if isinstance(value, float) else value}")
    if args.expect and report.verdict != args.expect:
        print(f"expected {args.expect}, got {report.verdict}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _params_from_args(args) -> GaussianSemigroupParams:
    drift = _floats(args.drift)
    if args.covariance:
        s11, s12, s22 = _floats(args.covariance)
        cov = np.array([[s11, s12], [s12, s22]])
    else:
        cov = args.variance * np.eye(2)
    return GaussianSemigroupParams(drift, cov)


def cmd_evolve(args, cfg, rec, out) -> int:
    times = _floats(args.times)
    if any(t < 0 for t in times) or times != sorted(times):
        raise ValueError("--times must be nonnegative and ascending")
    params = _params_from_args(args)
    grid, quad = cfg.grid, cfg.quadrature()
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "purity_char", "purity_op", "intertwine_deviation"])
    with _WarningLog() as wl:
        rho = _state_from_file(args.state_file)
        chi0 = dequantize(rho, grid) if args.mode in ("cq", "both") else None
        for t in times:
            row = [fmt(t), "", "", ""]
            if chi0 is not None:
                chi_t = cq_apply(params, t, chi0)
                row[1] = fmt(purity_from_char(chi_t))
            if args.mode in ("twirl", "both"):
                rho_t = twirl_apply(params, t, rho, quad)
                row[2] = fmt(purity(rho_t))
            if args.mode == "both":
                row[3] = fmt(np.max(np.abs(dequantize(rho_t, grid).values - chi_t.values)))
            writer.writerow(row)
            print(",".join(row))
    stem = out / (args.name or f"{Path(args.state_file).with_suffix('').name}_evolve")
    path = Path(f"{stem}.csv")
    path.write_text(buf.getvalue())
    rec.add(path)
    rec.summary = {"rows": len(times), "warnings": wl.messages}
    return EXIT_OK


def cmd_verify(args, cfg, rec, out) -> int:
    suites = experiments.SUITES if args.suite == "all" else (args.suite,)
    checks = []
    with _WarningLog() as wl:
        for name in suites:
            for check in experiments.run_suite(
                name, cfg.grid, cfg.fock_dim, cfg.quadrature(), flip=args.flip_multiplier
            ):
                print(check.line(), flush=True)
                checks.append(check)
    ok = all(c.passed for c in checks)
    payload = {"suite": args.suite, "passed": ok, "checks": [c.to_dict() for c in checks], "warnings": wl.messages}
    path = write_json(out / f"{args.name or 'verify_' + args.suite}.json", payload)
    rec.add(path)
    rec.summary = {"passed": ok, "checks": len(checks), "failed": sum(not c.passed for c in checks)}
    print(f"{'PASS' if ok else 'FAIL'}: {sum(c.passed for c in checks)}/{len(checks)} checks")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_check_manifest(args, cfg) -> int:
    directory = args.directory or cfg.outdir
    problems = check_manifest(directory)
    for path, problem in problems:
        print(f"{problem}: {path}")
    if problems:
        return EXIT_FAIL
    print(f"manifest in {directory} verified")
    return EXIT_OK


COMMANDS = {
    "state": cmd_state,
    "char": cmd_char,
    "wigner": cmd_wigner,
    "positivity": cmd_positivity,
    "evolve": cmd_evolve,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    try:
        cfg = _load_config(args)
        if args.command == "check-manifest":
            return cmd_check_manifest(args, cfg)
        out = Path(cfg.outdir)
        out.mkdir(parents=True, exist_ok=True)
        rec = ExperimentRecord(command=" ".join(sys.argv[1:] if argv is None else argv), config=cfg.to_dict())
        with _thread_limit(cfg.threads):
            code = COMMANDS[args.command](args, cfg, rec, out)
        rec.summary.setdefault("exit_code", code)
        rec.finish(out)
        return code
    except (PhaseconeError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
