"""Command-line driver: ``simulate``, ``reconstruct`` and ``bench``.

Exit codes: 0 success, 1 I/O failure, 2 convergence-condition violation,
3 input-format error.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .attitude import attitude_error
from .coning import ConingParams, ErrorModel, omega_true, quat_true, synthesize_increments, true_coeff_oracle
from .errors import ConvergenceConditionViolated
from .iteration import Mode, truncation_bound, weighted_term_count
from .pipeline import TrackRun, run_baseline, run_rodfiter

log = logging.getLogger("rodfiter")

EXIT_IO = 1
EXIT_CONVERGENCE = 2
EXIT_FORMAT = 3

INCREMENT_HEADER = ["t_end", "dtheta_x", "dtheta_y", "dtheta_z"]


class InputFormatError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.17g}"


@dataclass
class RunSpec:
    alpha_deg: float = 10.0
    omega_pi: float = 0.74
    rate_hz: float = 100.0
    N: int = 8
    n: int | None = None
    n_T: int | None = None
    iters: int = 7
    duration: float = 2.0
    multiplier: int = 10
    bias: tuple[float, float, float] = (0.0, 0.0, 0.0)
    mode: str = "truncated"

    @property
    def params(self) -> ConingParams:
        return ConingParams(np.deg2rad(self.alpha_deg), self.omega_pi * np.pi)

    @property
    def fit_degree(self) -> int:
        return self.N - 1 if self.n is None else self.n

    @property
    def truncation(self) -> int:
        return self.fit_degree + 1 if self.n_T is None else self.n_T

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> "RunSpec":
        spec = cls()
        for field_, attr in [
            ("alpha_deg", "alpha_deg"), ("omega_pi", "omega_pi"), ("rate_hz", "rate_hz"),
            ("N", "n_samples"), ("n", "fit_degree"), ("n_T", "truncate"), ("iters", "iters"),
            ("duration", "duration_s"), ("multiplier", "upsample"), ("mode", "mode"),
        ]:
            if getattr(args, attr, None) is not None:
                setattr(spec, field_, getattr(args, attr))
        if getattr(args, "bias", None) is not None:
            spec.bias = tuple(args.bias)
        return spec


def write_csv(path: Path, header: list[str], rows) -> None:
    path = Path(path)
    try:
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_increments(path: Path) -> tuple[np.ndarray, np.ndarray]:
    """Parse an increment CSV written by ``simulate``."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise InputFormatError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows or [h.strip() for h in rows[0]] != INCREMENT_HEADER:
        raise InputFormatError(f"{path}: expected header {','.join(INCREMENT_HEADER)}")
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise InputFormatError(f"{path}: {exc}") from exc
    if data.ndim != 2 or data.shape[0] < 2 or data.shape[1] != 4:
        raise InputFormatError(f"{path}: need at least two rows of 4 columns")
    if not np.all(np.isfinite(data)):
        raise InputFormatError(f"{path}: non-finite values")
    return data[:, 0], data[:, 1:]


def sample_period(t_end: np.ndarray) -> float:
    d = np.diff(t_end)
    dt = float(np.mean(d))
    if dt <= 0 or np.max(np.abs(d - dt)) > 1e-9 * max(1.0, abs(t_end[-1])):
        raise InputFormatError("sample times must be uniformly spaced and increasing")
    return dt


def cmd_simulate(args: argparse.Namespace) -> int:
    spec = RunSpec.from_args(args)
    t_end, inc = synthesize_increments(spec.params, ErrorModel(np.array(spec.bias)), spec.duration, spec.rate_hz)
    write_csv(args.out, INCREMENT_HEADER, ([fmt(t), *map(fmt, d)] for t, d in zip(t_end, inc)))
    log.info("wrote %d increments to %s", len(t_end), args.out)
    return 0


def _reconstruct_track(spec: RunSpec, inc: np.ndarray, dt: float, t_0: float):
    q_0 = quat_true(spec.params, t_0)
    if spec.mode == "baseline":
        return run_baseline(inc, dt, q_0), None
    run = run_rodfiter(
        inc, dt, q_0, N=spec.N, n=spec.fit_degree, mode=Mode(spec.mode),
        n_T=spec.truncation, iters=spec.iters, multiplier=spec.multiplier,
    )
    return run.track, run


def _cumulative_bounds(run: TrackRun, spec: RunSpec, timestamps: np.ndarray) -> np.ndarray:
    dw = float(np.linalg.norm(spec.bias))
    per = np.array([truncation_bound(iv.result, dw).approx for iv in run.intervals])
    cum = np.concatenate([[0.0], np.cumsum(per)])
    t0 = timestamps[0]
    idx = np.ceil((timestamps - t0) / run.t_N - 1e-9).astype(int)
    return cum[np.clip(idx, 0, len(per))]


def _write_coeffs(path: Path, spec: RunSpec, run: TrackRun, t_0: float) -> None:
    first = run.intervals[0]
    oracle = true_coeff_oracle(spec.params, t_0, run.t_N)
    rows = []
    for name, it, series in [("omega_fit", 0, first.omega), ("oracle", 0, oracle)] + [
        ("iterate", l, s) for l, s in enumerate(first.result.history) if l > 0
    ]:
        for d, c in enumerate(series.coeffs):
            rows.append([name, it, d, *map(fmt, c), fmt(np.linalg.norm(c))])
    write_csv(path, ["series", "iteration", "degree", "cx", "cy", "cz", "abs"], rows)


def _write_fit_error(path: Path, spec: RunSpec, run: TrackRun, t_0: float) -> None:
    k = spec.N * spec.multiplier
    tau = np.linspace(-1.0, 1.0, k + 1)
    t = t_0 + 0.5 * run.t_N * (1.0 + tau)
    err = run.intervals[0].omega(tau) - omega_true(spec.params, t)
    rows = ([fmt(ti), *map(fmt, e), fmt(np.linalg.norm(e))] for ti, e in zip(t, err))
    write_csv(path, ["t", "err_x", "err_y", "err_z", "abs"], rows)


def cmd_reconstruct(args: argparse.Namespace) -> int:
    spec = RunSpec.from_args(args)
    t_end, inc = read_increments(args.input)
    dt = sample_period(t_end)
    if spec.mode != "baseline" and inc.shape[0] % spec.N:
        raise InputFormatError(f"{inc.shape[0]} rows is not a multiple of N={spec.N}")
    t_0 = float(t_end[0] - dt)
    track, run = _reconstruct_track(spec, inc, dt, t_0)
    err = attitude_error(quat_true(spec.params, track.timestamps), track.quaternions)
    if run is None:
        bound = np.full(err.shape, np.nan)
    else:
        bound = _cumulative_bounds(run, spec, track.timestamps)
    write_csv(args.out, ["t", "eps_att", "bound"],
              ([fmt(t), fmt(e), fmt(b)] for t, e, b in zip(track.timestamps, err, bound)))
    print(f"mode={spec.mode} samples={len(track)} max_err={err.max():.6e} mean_err={err.mean():.6e}")
    if run is not None:
        res = run.intervals[0].result
        print(f"interval 0: margin t_N*sup|w|/2={res.convergence_margin:.6e}")
        for rec in res.per_iteration:
            print(f"  iter {rec.iteration}: degree={rec.degree} neglected={rec.neglected:.3e} "
                  f"max_delta={rec.max_delta:.3e}")
        if args.coeffs_out:
            _write_coeffs(args.coeffs_out, spec, run, t_0)
        if args.fit_error_out:
            _write_fit_error(args.fit_error_out, spec, run, t_0)
    return 0


@dataclass
class BenchRow:
    mode: str
    runs: int
    mean_s: float
    std_s: float
    min_s: float
    terms_per_interval: int
    terms_last_iter: int


def bench_modes(spec: RunSpec, runs: int, modes=("exact", "truncated", "baseline")) -> list[BenchRow]:
    """Time each mode on the same increment workload (single-threaded)."""
    from threadpoolctl import threadpool_limits

    t_end, inc = synthesize_increments(spec.params, ErrorModel(np.array(spec.bias)), spec.duration, spec.rate_hz)
    dt = 1.0 / spec.rate_hz
    out = []
    with threadpool_limits(limits=1):
        for mode in modes:
            s = RunSpec(**{**spec.__dict__, "mode": mode})
            _reconstruct_track(s, inc, dt, 0.0)  # warm caches
            times = []
            for _ in range(runs):
                t0 = time.perf_counter()
                _reconstruct_track(s, inc, dt, 0.0)
                times.append(time.perf_counter() - t0)
            terms = last = 0
            if mode != "baseline":
                m = Mode(mode)
                n, nT = s.fit_degree, s.truncation
                terms = weighted_term_count(n, m, s.iters, nT, cumulative=True)
                last = weighted_term_count(n, m, s.iters, nT)
            times = np.array(times)
            out.append(BenchRow(mode, runs, float(times.mean()), float(times.std()), float(times.min()), terms, last))
    return out


def cmd_bench(args: argparse.Namespace) -> int:
    spec = RunSpec.from_args(args)
    rows = bench_modes(spec, args.runs)
    header = ["mode", "runs", "mean_s", "std_s", "min_s", "weighted_terms_per_interval", "weighted_terms_last_iter"]
    write_csv(args.out, header, ([r.mode, r.runs, fmt(r.mean_s), fmt(r.std_s), fmt(r.min_s),
                                  r.terms_per_interval, r.terms_last_iter] for r in rows))
    print(f"{'mode':<10} {'mean [s]':>12} {'std [s]':>12} {'terms/interval':>16}")
    for r in rows:
        print(f"{r.mode:<10} {r.mean_s:12.6f} {r.std_s:12.6f} {r.terms_per_interval:16d}")
    by = {r.mode: r for r in rows}
    if "exact" in by and "truncated" in by:
        print(f"speedup exact/truncated: {by['exact'].mean_s / by['truncated'].mean_s:.1f}x "
              f"(weighted terms at last iteration: "
              f"{by['exact'].terms_last_iter / by['truncated'].terms_last_iter:.0f}x)")
    return 0


def _add_model_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--alpha-deg", type=float, help="half-cone angle [deg] (default 10)")
    p.add_argument("--omega-pi", type=float, help="coning frequency in multiples of pi rad/s (default 0.74)")
    p.add_argument("--bias", type=float, nargs=3, metavar=("BX", "BY", "BZ"),
                   help="gyro bias [rad/s] (default 0)")


def _add_iter_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-samples", type=int, help="samples per update interval N (default 8)")
    p.add_argument("--fit-degree", type=int, help="fit degree n (default N-1)")
    p.add_argument("--truncate", type=int, help="truncation degree n_T (default n+1)")
    p.add_argument("--iters", type=int, help="Picard iterations (default 7)")
    p.add_argument("--upsample", type=int, help="output samples per input sample (default 10)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rodfiter", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="write coning-motion gyro increments to CSV")
    _add_model_args(p)
    p.add_argument("--rate-hz", type=float, help="sampling rate [Hz] (default 100)")
    p.add_argument("--duration-s", type=float, help="duration [s] (default 2)")
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("reconstruct", help="reconstruct attitude and report error vs truth")
    _add_model_args(p)
    _add_iter_args(p)
    p.add_argument("--in", dest="input", type=Path, required=True)
    p.add_argument("--mode", choices=["exact", "truncated", "baseline"], default="truncated")
    p.add_argument("--out", type=Path, required=True)
    p.add_argument("--coeffs-out", type=Path, help="first-interval coefficients (fit, iterates, oracle)")
    p.add_argument("--fit-error-out", type=Path, help="first-interval fitted-rate error")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("bench", help="time exact, truncated and baseline modes")
    _add_model_args(p)
    _add_iter_args(p)
    p.add_argument("--rate-hz", type=float)
    p.add_argument("--duration-s", type=float)
    p.add_argument("--runs", type=int, default=50)
    p.add_argument("--out", type=Path, required=True)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConvergenceConditionViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except InputFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FORMAT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
