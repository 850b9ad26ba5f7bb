"""Command-line interface.

Exit codes: 0 success, 2 bad arguments, 3 I/O error, 4 numerical failure.
Every command writes ``<output>.manifest.json`` recording its parameters,
output hashes and per-phase timings; ``wp4 replay`` re-runs a manifest and
checks the outputs are bit-identical.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import tempfile
import time
from contextlib import contextmanager
from pathlib import Path

from wp4 import __version__
from wp4.bench import DEFAULT_DENSE_SIZES, DEFAULT_SIZES, loglog_slope, run_bench, write_csv
from wp4.core import FrequencySignal, NumericalError, SplineWindow, dense_search
from wp4.io import InputError, read_signal, read_window, write_signal
from wp4.pursuit import Decomposition, VocoderConfig, mp, omp, vocoder_stretch
from wp4.search import SearchConfig, find_atom, pad_for_band

EXIT_OK, EXIT_ARGS, EXIT_IO, EXIT_NUMERIC = 0, 2, 3, 4


class Timings:
    def __init__(self):
        self.phases: dict[str, float] = {}

    @contextmanager
    def phase(self, name: str):
        t0 = time.perf_counter()
        yield
        self.phases[name] = self.phases.get(name, 0.0) + time.perf_counter() - t0


def _window(args) -> SplineWindow:
    return read_window(args.window) if args.window else SplineWindow.triangle()


def _search_cfg(args) -> SearchConfig:
    return SearchConfig(fourier_order=args.order, max_depth=args.depth, refine_radius=args.refine_radius)


def _load(args, timings) -> tuple[FrequencySignal, float, int]:
    with timings.phase("read"):
        x, rate = read_signal(args.input)
        try:
            s = FrequencySignal.from_time(x, rate, low_bins=args.low_bins)
        except ValueError as exc:
            raise InputError(f"{args.input}: {exc}") from exc
    return s, rate, x.size


def cmd_decompose(args, timings) -> list[Path]:
    f = _window(args)
    s, rate, n = _load(args, timings)
    pursue = mp if args.method == "mp" else omp
    with timings.phase("pursuit"):
        dec = pursue(s, f, args.atoms, _search_cfg(args))
    dec.meta = {"sample_rate": rate, "n_samples": n}
    with timings.phase("write"):
        Path(args.output).write_text(dec.to_jsonl())
    return [Path(args.output)]


def cmd_reconstruct(args, timings) -> list[Path]:
    with timings.phase("read"):
        try:
            dec = Decomposition.from_jsonl(Path(args.input).read_text())
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise InputError(f"cannot read decomposition {args.input}: {exc}") from exc
    rate = dec.meta.get("sample_rate")
    if rate is None:
        raise InputError("decomposition header has no sample_rate")
    with timings.phase("synthesis"):
        x = dec.reconstruct().to_time(rate)
    with timings.phase("write"):
        return write_signal(args.output, x, rate)


def cmd_vocoder(args, timings) -> list[Path]:
    f = _window(args)
    s, rate, _ = _load(args, timings)
    with timings.phase("vocoder"):
        y = vocoder_stretch(s, VocoderConfig(args.stretch, args.atoms, f), _search_cfg(args)).to_time(rate)
    with timings.phase("write"):
        return write_signal(args.output, y, rate)


def cmd_oracle_compare(args, timings) -> list[Path]:
    f = _window(args).normalized()
    s, _, _ = _load(args, timings)
    s = pad_for_band(s, f)
    with timings.phase("wp4"):
        atom, _ = find_atom(s, f, _search_cfg(args))
    with timings.phase("dense"):
        g_dense, v_dense = dense_search(s, f, normalize=True)
    report = {
        "wp4": {"g1": atom.point.g1, "g2": atom.point.g2, "abs_coeff": abs(atom.coeff)},
        "dense": {"g1": g_dense.g1, "g2": g_dense.g2, "abs_coeff": v_dense},
        "ratio": abs(atom.coeff) / v_dense if v_dense > 0 else math.nan,
    }
    text = json.dumps(report, indent=2) + "\n"
    print(text, end="")
    Path(args.output).write_text(text)
    return [Path(args.output)]


def _parse_sizes(text: str) -> list[int]:
    """``4096,8192`` or an exponent range ``12..17``."""
    try:
        if ".." in text:
            lo, hi = (int(p) for p in text.split(".."))
            return [2**e for e in range(lo, hi + 1)]
        return [int(p) for p in text.split(",") if p]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad size list {text!r}") from exc


def cmd_bench(args, timings) -> list[Path]:
    def log(row):
        print(f"N={row.N:>7} {row.method:>5} median {row.median_ms:10.1f} ms  nodes_peak {row.nodes_peak}", file=sys.stderr)

    with timings.phase("bench"):
        rows = run_bench(args.sizes, args.dense_sizes, args.repeats, seed=args.seed, log=log)
    write_csv(args.output, rows)
    for method in ("wp4", "dense"):
        try:
            print(f"{method} log-log slope: {loglog_slope(rows, method):.3f}")
        except ValueError:
            pass
    return [Path(args.output)]


COMMANDS = {
    "decompose": cmd_decompose,
    "reconstruct": cmd_reconstruct,
    "vocoder": cmd_vocoder,
    "oracle-compare": cmd_oracle_compare,
    "bench": cmd_bench,
}


def _positive(kind):
    def parse(text):
        try:
            v = kind(text)
        except ValueError as exc:
            raise argparse.ArgumentTypeError(str(exc)) from exc
        if v <= 0:
            raise argparse.ArgumentTypeError(f"must be positive: {text}")
        return v

    return parse


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wp4", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"wp4 {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def search_opts(q):
        q.add_argument("--window", help="JSON list of [abscissa_hz, value] pairs (default triangle)")
        q.add_argument("--order", type=_positive(int), default=9, help="trig filter order L")
        q.add_argument("--depth", type=_positive(int), default=None, help="bisection depth J (default floor(log2 N))")
        q.add_argument("--refine-radius", type=int, default=1)
        q.add_argument("--low-bins", type=_positive(int), default=4, help="bins below omega0 kept aside")

    q = sub.add_parser("decompose", help="sparse decomposition to JSON lines")
    q.add_argument("input")
    q.add_argument("output")
    q.add_argument("--atoms", type=_positive(int), default=10)
    q.add_argument("--method", choices=["mp", "omp"], default="mp")
    search_opts(q)

    q = sub.add_parser("reconstruct", help="synthesize a decomposition back to audio")
    q.add_argument("input")
    q.add_argument("output")

    q = sub.add_parser("vocoder", help="time-stretch by an integer factor")
    q.add_argument("input")
    q.add_argument("output")
    q.add_argument("--stretch", type=_positive(int), default=2)
    q.add_argument("--atoms", type=_positive(int), default=50)
    search_opts(q)

    q = sub.add_parser("oracle-compare", help="WP4 coefficient vs dense-grid maximum")
    q.add_argument("input")
    q.add_argument("output", help="JSON report path")
    search_opts(q)

    q = sub.add_parser("bench", help="per-search timing, WP4 vs dense")
    q.add_argument("output", help="CSV report path")
    q.add_argument("--sizes", type=_parse_sizes, default=list(DEFAULT_SIZES))
    q.add_argument("--dense-sizes", type=_parse_sizes, default=list(DEFAULT_DENSE_SIZES))
    q.add_argument("--repeats", type=_positive(int), default=3)
    q.add_argument("--seed", type=int, default=0)

    q = sub.add_parser("replay", help="re-run a manifest and compare outputs bit for bit")
    q.add_argument("manifest")
    return p


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _params(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "command"}


def run_command(name: str, args, write_manifest: bool = True) -> dict:
    if getattr(args, "refine_radius", 0) < 0:
        raise ValueError("--refine-radius must be >= 0")
    timings = Timings()
    outputs = COMMANDS[name](args, timings)
    manifest = {
        "command": name,
        "params": _params(args),
        "inputs": [args.input] if hasattr(args, "input") else [],
        "outputs": {str(p): _sha256(p) for p in outputs},
        "version": __version__,
        "timings_s": timings.phases,
    }
    if write_manifest:
        Path(str(args.output) + ".manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return manifest


def replay(manifest_path) -> bool:
    """Re-run a manifest into a scratch directory; True when every output hash matches."""
    try:
        manifest = json.loads(Path(manifest_path).read_text())
        name, params = manifest["command"], dict(manifest["params"])
        recorded = manifest["outputs"]
    except (OSError, ValueError, KeyError) as exc:
        raise InputError(f"bad manifest {manifest_path}: {exc}") from exc
    if name not in COMMANDS:
        raise InputError(f"unknown command in manifest: {name}")
    original = Path(params["output"])
    with tempfile.TemporaryDirectory() as tmp:
        params["output"] = str(Path(tmp) / original.name)
        rerun = run_command(name, argparse.Namespace(**params), write_manifest=False)
        same = True
        for path, digest in recorded.items():
            new_path = Path(tmp) / Path(path).name
            new_digest = rerun["outputs"].get(str(new_path))
            ok = new_digest == digest
            same &= ok
            print(f"{'identical' if ok else 'DIFFERENT'}: {path}")
    return same


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if isinstance(exc.code, int) else EXIT_ARGS
    try:
        if args.command == "replay":
            return EXIT_OK if replay(args.manifest) else EXIT_NUMERIC
        run_command(args.command, args)
        return EXIT_OK
    except InputError as exc:
        print(f"wp4: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"wp4: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except NumericalError as exc:
        print(f"wp4: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"wp4: bad argument: {exc}", file=sys.stderr)
        return EXIT_ARGS


if __name__ == "__main__":
    sys.exit(main())
