"""Command-line surface: reproducible experiments with file outputs.

Subcommands: discriminants, sweep, moments, charfn, density, discrepancy,
minvalues.  Flag values override a ``key = value`` config file, which
overrides built-in defaults; the effective configuration is echoed into
every output (as ``#`` comment lines in CSV, as a ``config`` object in
JSON), so outputs are byte-reproducible from their own headers.  Exit code
is 0 only when every declared internal check passed; failures print a
single JSON line to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time

import numpy as np

from . import analysis, family, randmodel
from .coeffs import file_provider, trivial_provider
from .errors import TwistDistError
from .ntcore import enumerate_discriminants, discriminant_count_estimate
from .samplesets import format_float

THREADS_ENV = "TWISTDIST_THREADS"

DEFAULTS = {
    "N": 10000,
    "Y": None,  # (log N)^2
    "t": 0.0,
    "provider": "trivial",
    "seed": 0,
    "samples": 100000,
    "model_Y": 10000.0,
    "R": None,  # log N / (loglog N)^2
    "grid": "-5:5:11",
    "P": analysis.DEFAULT_MODEL_PRIME_CUTOFF,
    "eta": None,  # (loglog N)^2 / log N
    "format": None,  # per-command default
    "threads": None,  # env or cpu count
    "out": "-",
}


def _parse_value(text: str):
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def read_config_file(path: str) -> dict:
    out = {}
    with open(path, "r", encoding="ascii") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, _, val = line.partition("=")
            out[key.strip()] = _parse_value(val.strip())
    return out


def parse_grid(spec: str) -> np.ndarray:
    try:
        lo, hi, n = spec.split(":")
        return np.linspace(float(lo), float(hi), int(n))
    except ValueError:
        raise ValueError(f"grid spec must be 'lo:hi:npoints', got {spec!r}") from None


class Experiment:
    """Merged configuration plus shared derived objects."""

    def __init__(self, args: argparse.Namespace):
        cfgfile = read_config_file(args.config) if args.config else {}
        merged = dict(DEFAULTS)
        merged.update(cfgfile)
        for key in DEFAULTS:
            flag = getattr(args, key, None)
            if flag is not None:
                merged[key] = flag
        if merged["Y"] is None:
            merged["Y"] = family.default_polynomial_length(int(merged["N"]))
        loglog = math.log(math.log(int(merged["N"]))) if merged["N"] > 2 else 1.0
        if merged["R"] is None:
            merged["R"] = math.log(int(merged["N"])) / loglog**2
        if merged["eta"] is None:
            merged["eta"] = loglog**2 / math.log(int(merged["N"]))
        if merged["threads"] is None:
            merged["threads"] = int(os.environ.get(THREADS_ENV, os.cpu_count() or 1))
        self.cfg = merged
        self.command = args.command

    def provider(self):
        spec = self.cfg["provider"]
        return trivial_provider() if spec == "trivial" else file_provider(spec)

    def family_config(self) -> family.FamilyConfig:
        return family.FamilyConfig(
            N=int(self.cfg["N"]),
            Y=float(self.cfg["Y"]),
            t=float(self.cfg["t"]),
            provider=self.provider(),
        )

    def config_lines(self, keys) -> list[str]:
        lines = [f"command = {self.command}"]
        for key in keys:
            lines.append(f"{key} = {self.cfg[key]}")
        return lines

    def config_dict(self, keys) -> dict:
        out = {"command": self.command}
        out.update({k: self.cfg[k] for k in keys})
        return out


class OutputWriter:
    """Atomic file writer: failures leave no partial output behind."""

    def __init__(self, path: str):
        self.path = path
        self.tmp = None

    def __enter__(self):
        if self.path == "-":
            self.fh = sys.stdout
        else:
            self.tmp = self.path + ".part"
            self.fh = open(self.tmp, "w", encoding="ascii", newline="\n")
        return self.fh

    def __exit__(self, exc_type, exc, tb):
        if self.path != "-":
            self.fh.close()
            if exc_type is None:
                os.replace(self.tmp, self.path)
            else:
                os.unlink(self.tmp)
        return False


def _progress(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# subcommands


def cmd_discriminants(exp: Experiment) -> None:
    N = int(exp.cfg["N"])
    discs = enumerate_discriminants(N)
    target = discriminant_count_estimate(N)
    deviation = abs(len(discs) - target) / target
    with OutputWriter(exp.cfg["out"]) as fh:
        for d in discs:
            fh.write(f"{int(d)}\n")
    _progress(
        f"discriminants: |F({N})| = {len(discs)}, "
        f"relative deviation from (6/pi^2)N: {deviation:.6f}"
    )


_SWEEP_KEYS = ("N", "Y", "t", "provider")


def cmd_sweep(exp: Experiment) -> None:
    cfg = exp.family_config()
    t0 = time.perf_counter()
    sweep = family.family_sweep(cfg, threads=int(exp.cfg["threads"]))
    _progress(f"sweep: {len(sweep)} values in {time.perf_counter() - t0:.2f}s")
    fmt = exp.cfg["format"] or "csv"
    with OutputWriter(exp.cfg["out"]) as fh:
        if fmt == "csv":
            for line in exp.config_lines(_SWEEP_KEYS):
                fh.write(f"# {line}\n")
            fh.write("D,re,im\n")
            for d, v in zip(sweep.labels, sweep.values):
                fh.write(
                    f"{int(d)},{format_float(v.real)},{format_float(v.imag)}\n"
                )
        else:
            json.dump(
                {
                    "config": exp.config_dict(_SWEEP_KEYS),
                    "D": [int(d) for d in sweep.labels],
                    "re": [v.real for v in sweep.values],
                    "im": [v.imag for v in sweep.values],
                },
                fh,
                indent=1,
            )
            fh.write("\n")


def _parse_jl(pairs: list[str]) -> list[tuple[int, int]]:
    out = []
    for pair in pairs:
        j, _, ell = pair.partition(",")
        out.append((int(j), int(ell)))
    if not out:
        out = [(1, 0), (1, 1), (2, 0)]
    for j, ell in out:
        if j < 0 or ell < 0 or j + ell < 1:
            raise ValueError(f"invalid moment order ({j},{ell}): need j+ell >= 1")
    return out


def cmd_moments(exp: Experiment, jl_pairs: list[str]) -> None:
    orders = _parse_jl(jl_pairs)
    cfg = exp.family_config()
    sweep = family.family_sweep(cfg, threads=int(exp.cfg["threads"]))
    provider = cfg.provider
    records = []
    for j, ell in orders:
        arith = family.arithmetic_moment(cfg, j, ell, sweep=sweep)
        record = {
            "j": j,
            "ell": ell,
            "N": cfg.N,
            "Y": cfg.Y,
            "t": cfg.t,
            "arithmetic": {"re": arith.real, "im": arith.imag},
        }
        try:
            exact = randmodel.exact_moment(j, ell, cfg.Y, cfg.t, provider)
            record["exact"] = {"re": exact.real, "im": exact.imag}
            record["abs_difference"] = abs(arith - exact)
            record["budget_exceeded"] = False
        except randmodel.BudgetExceededError:
            mc, se = randmodel.mc_moment(
                j,
                ell,
                cfg.Y,
                cfg.t,
                provider,
                int(exp.cfg["samples"]),
                int(exp.cfg["seed"]),
            )
            record["exact"] = None
            record["budget_exceeded"] = True
            record["mc"] = {"re": mc.real, "im": mc.imag, "stderr": se}
            record["abs_difference"] = abs(arith - mc)
        records.append(record)
    with OutputWriter(exp.cfg["out"]) as fh:
        json.dump(
            {"config": exp.config_dict(_SWEEP_KEYS + ("samples", "seed")), "moments": records},
            fh,
            indent=1,
        )
        fh.write("\n")


_CHARFN_KEYS = _SWEEP_KEYS + ("grid", "P")


def cmd_charfn(exp: Experiment) -> None:
    cfg = exp.family_config()
    grid = parse_grid(str(exp.cfg["grid"]))
    sweep = family.family_sweep(cfg, threads=int(exp.cfg["threads"]))
    emp = analysis.empirical_char_grid(sweep, grid, grid)
    model = analysis.model_char_grid(
        cfg.t, cfg.provider, grid, grid, P=int(exp.cfg["P"])
    )
    emp.validate()
    model.validate()
    diff = np.abs(emp.values - model.values)
    _progress(f"charfn: sup |empirical - model| = {diff.max():.6g}")
    fmt = exp.cfg["format"] or "csv"
    with OutputWriter(exp.cfg["out"]) as fh:
        if fmt == "csv":
            for line in exp.config_lines(_CHARFN_KEYS):
                fh.write(f"# {line}\n")
            fh.write(f"# sup_abs_diff = {format_float(float(diff.max()))}\n")
            fh.write("u,v,emp_re,emp_im,model_re,model_im,abs_diff\n")
            for i, u in enumerate(grid):
                for j, v in enumerate(grid):
                    e = emp.values[i, j]
                    m = model.values[i, j]
                    fh.write(
                        ",".join(
                            [
                                format_float(u),
                                format_float(v),
                                format_float(e.real),
                                format_float(e.imag),
                                format_float(m.real),
                                format_float(m.imag),
                                format_float(float(diff[i, j])),
                            ]
                        )
                        + "\n"
                    )
        else:
            json.dump(
                {
                    "config": exp.config_dict(_CHARFN_KEYS),
                    "u": list(grid),
                    "v": list(grid),
                    "empirical_re": emp.values.real.tolist(),
                    "empirical_im": emp.values.imag.tolist(),
                    "model_re": model.values.real.tolist(),
                    "model_im": model.values.imag.tolist(),
                    "sup_abs_diff": float(diff.max()),
                },
                fh,
                indent=1,
            )
            fh.write("\n")


def cmd_density(exp: Experiment) -> None:
    cfg = exp.family_config()
    provider = cfg.provider
    P = int(exp.cfg["P"])
    one_dim = provider.is_self_dual_at(cfg.t)
    if one_dim:
        U = analysis.choose_inversion_box(
            lambda u: analysis.phi_rand(u, 0.0, cfg.t, provider, P)
        )
        ugrid = np.linspace(-U, U, 2 * int(16 * U) + 1)
        phi = analysis.model_char_grid(cfg.t, provider, ugrid, P=P)
        xs = np.linspace(-4.0, 4.0, 401)
        dens = analysis.invert_density(phi, U, xs)
        rows = [(x, d) for x, d in zip(xs, dens.density)]
        header = "x,density"
    else:
        U = analysis.choose_inversion_box(
            lambda u: analysis.phi_rand(u, u, cfg.t, provider, P)
        )
        ugrid = np.linspace(-U, U, 161)
        phi = analysis.model_char_grid(cfg.t, provider, ugrid, ugrid, P=P)
        xs = np.linspace(-3.0, 3.0, 121)
        dens = analysis.invert_density(phi, U, xs, xs)
        rows = [
            (x, y, dens.density[i, j])
            for i, x in enumerate(xs)
            for j, y in enumerate(xs)
        ]
        header = "x,y,density"
    _progress(
        f"density: U = {U}, mass = {dens.mass:.6f}, min = {dens.density.min():.3g}, "
        f"imag residue = {dens.imag_residue:.3g}"
    )
    fmt = exp.cfg["format"] or "csv"
    keys = _SWEEP_KEYS + ("P",)
    with OutputWriter(exp.cfg["out"]) as fh:
        if fmt == "csv":
            for line in exp.config_lines(keys):
                fh.write(f"# {line}\n")
            fh.write(f"# U = {U}\n# mass = {format_float(dens.mass)}\n")
            fh.write(header + "\n")
            for row in rows:
                fh.write(",".join(format_float(float(x)) for x in row) + "\n")
        else:
            payload = {
                "config": exp.config_dict(keys),
                "U": U,
                "mass": dens.mass,
                "imag_residue": dens.imag_residue,
                "x": list(map(float, xs)),
                "density": dens.density.tolist(),
            }
            if not one_dim:
                payload["y"] = list(map(float, xs))
            json.dump(payload, fh, indent=1)
            fh.write("\n")


_DISC_KEYS = _SWEEP_KEYS + ("samples", "seed", "model_Y")


def cmd_discrepancy(exp: Experiment) -> None:
    cfg = exp.family_config()
    sweep = family.family_sweep(cfg, threads=int(exp.cfg["threads"]))
    model = randmodel.mc_value_set(
        float(exp.cfg["model_Y"]),
        cfg.t,
        cfg.provider,
        int(exp.cfg["samples"]),
        int(exp.cfg["seed"]),
    )
    report = analysis.discrepancy(sweep, model, seed=int(exp.cfg["seed"]))
    _progress(f"discrepancy: sup = {report.sup_cdf_diff:.6g} ({report.grid})")
    with OutputWriter(exp.cfg["out"]) as fh:
        json.dump(
            {
                "config": exp.config_dict(_DISC_KEYS),
                "sup_cdf_diff": report.sup_cdf_diff,
                "rect_bound": report.rect_bound,
                "dimension": report.dimension,
                "grid": report.grid,
            },
            fh,
            indent=1,
        )
        fh.write("\n")


def cmd_minvalues(exp: Experiment) -> None:
    cfg = exp.family_config()
    sweep = family.family_sweep(cfg, threads=int(exp.cfg["threads"]))
    eta = float(exp.cfg["eta"])
    count, m_n = analysis.small_values(sweep, eta)
    _progress(f"minvalues: N = {cfg.N}, m_N = {m_n:.6g}, Psi_N({eta:.6g}) = {count}")
    with OutputWriter(exp.cfg["out"]) as fh:
        json.dump(
            {
                "config": exp.config_dict(_SWEEP_KEYS + ("eta",)),
                "N": cfg.N,
                "m_N": m_n,
                "eta": eta,
                "count_below_eta": count,
            },
            fh,
            indent=1,
        )
        fh.write("\n")


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twistdist",
        description="family-vs-random-model value statistics of quadratic twists",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key = value file; flags override it")
        p.add_argument("--N", type=int, help="family cutoff |D| <= N")
        p.add_argument("--Y", type=float, help="polynomial length (default (log N)^2)")
        p.add_argument("--t", type=float, help="height offset in 1+it (default 0)")
        p.add_argument("--provider", help="'trivial' or a Satake file path")
        p.add_argument("--seed", type=int, help="base seed for sampling")
        p.add_argument("--samples", type=int, help="Monte-Carlo sample count")
        p.add_argument("--model-Y", dest="model_Y", type=float,
                       help="model-side truncation for discrepancy runs")
        p.add_argument("--R", type=float, help="integration half-width")
        p.add_argument("--grid", help="grid spec lo:hi:npoints")
        p.add_argument("--P", type=int, help="model Euler-product prime cutoff")
        p.add_argument("--eta", type=float, help="small-value threshold")
        p.add_argument("--out", help="output path or - for stdout")
        p.add_argument("--format", choices=["csv", "json"], help="output format")
        p.add_argument("--threads", type=int,
                       help=f"worker threads (default ${THREADS_ENV} or machine)")

    for name in (
        "discriminants",
        "sweep",
        "moments",
        "charfn",
        "density",
        "discrepancy",
        "minvalues",
    ):
        p = sub.add_parser(name)
        common(p)
        if name == "moments":
            p.add_argument(
                "--jl",
                action="append",
                default=[],
                help="moment order 'j,ell' (repeatable; default 1,0 1,1 2,0)",
            )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        exp = Experiment(args)
        if args.command == "discriminants":
            cmd_discriminants(exp)
        elif args.command == "sweep":
            cmd_sweep(exp)
        elif args.command == "moments":
            cmd_moments(exp, args.jl)
        elif args.command == "charfn":
            cmd_charfn(exp)
        elif args.command == "density":
            cmd_density(exp)
        elif args.command == "discrepancy":
            cmd_discrepancy(exp)
        elif args.command == "minvalues":
            cmd_minvalues(exp)
        else:  # pragma: no cover
            raise ValueError(f"unknown command {args.command}")
    except (TwistDistError, ValueError, OSError) as exc:
        print(
            json.dumps({"error": type(exc).__name__, "message": str(exc)}),
            file=sys.stderr,
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
