"""Command-line harness.

Subcommands::

    hermite-hj run          --example burgers1d --m 3 --n 80 --tfinal 1.5
    hermite-hj convergence  --example xy-nonconvex --m 2
    hermite-hj sensor-probe --probe radial-step --n 40 --m 2
    hermite-hj taylor-probe --probe cos-shift --m 3

Settings come from an optional YAML file (``--config``) overridden by
flags.  Every command writes CSV files plus ``config.yaml`` (the resolved
settings) into ``--out``; ``run`` adds ``solution.dat``, the same table
in gnuplot's blank-line-separated block layout.  Exit codes: 0 success,
2 configuration error, 3 numerical blow-up.
"""

from __future__ import annotations

import argparse
import csv
import logging
import math
import sys
import time
from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__
from . import examples as ex
from . import grid as gr
from . import oracle as orc
from . import probes
from . import stepper as st
from .hamiltonian import get_model, sign_control_field

log = logging.getLogger("hermite_hj")

EXIT_OK, EXIT_CONFIG, EXIT_BLOWUP = 0, 2, 3
FLOAT_FMT = "%.16e"


class ConfigError(ValueError):
    pass


# {{{ configuration

class RunConfig(BaseModel):
    """Validated settings shared by ``run`` and ``convergence``."""
    model_config = ConfigDict(extra="forbid", frozen=True)

    example: str
    m: int = Field(2, ge=0, le=8)
    n: Optional[int] = Field(None, ge=2)
    cfl: Optional[float] = Field(None, gt=0)
    dt: Optional[float] = Field(None, gt=0)
    tfinal: Optional[float] = Field(None, ge=0)
    boundary: Optional[Literal["periodic", "dirichlet", "padded"]] = None
    sensor: bool = True
    nu0_scale: Optional[float] = Field(None, ge=0)
    threads: int = Field(1, ge=1)
    substeps: Union[Literal["auto"], int] = "auto"
    substep_base: int = Field(4, ge=1)
    ladder: Optional[List[int]] = None
    even_ladder: bool = False
    pad: Optional[int] = Field(None, ge=1)
    out: str = "out"

    @model_validator(mode="after")
    def _check(self):
        example = ex.get_example(self.example)
        if self.boundary is not None and self.boundary != example.boundary:
            raise ValueError(f"{self.example} uses a {example.boundary} "
                             f"boundary, not {self.boundary}")
        if isinstance(self.substeps, int) and self.substeps < 1:
            raise ValueError("substeps must be positive or 'auto'")
        if self.ladder is not None and (len(self.ladder) < 1
                                        or min(self.ladder) < 2):
            raise ValueError("ladder entries must be at least 2")
        if self.even_ladder and example.alt_ladder is None:
            raise ValueError(f"{self.example} has no even ladder")
        return self

    @property
    def spec(self) -> ex.Example:
        return ex.get_example(self.example)

    def resolved_ladder(self) -> List[int]:
        if self.ladder is not None:
            return list(self.ladder)
        e = self.spec
        return list(e.alt_ladder if self.even_ladder else e.ladder)

    def resolved_n(self) -> int:
        return self.n if self.n is not None else self.resolved_ladder()[0]

    def resolved_tfinal(self) -> float:
        return self.spec.tfinal if self.tfinal is None else self.tfinal

    def resolved_cfl(self) -> float:
        return self.spec.default_cfl(self.m) if self.cfl is None else self.cfl

    def resolved_nu0_scale(self) -> float:
        if self.nu0_scale is not None:
            return self.nu0_scale
        return self.spec.default_nu0_scale(self.m)

    def substeps_for(self, n: int) -> int:
        if self.substeps != "auto":
            return int(self.substeps)
        if self.spec.substeps is not None:
            return self.spec.substeps
        return st.auto_substeps(self.m, n, self.resolved_ladder()[0],
                                self.substep_base)

    def resolved(self) -> dict:
        d = self.model_dump()
        d.update(n=self.resolved_n(), tfinal=self.resolved_tfinal(),
                 cfl=self.resolved_cfl(), nu0_scale=self.resolved_nu0_scale(),
                 ladder=self.resolved_ladder(), boundary=self.spec.boundary,
                 substeps=self.substeps_for(self.resolved_n()))
        d["version"] = __version__
        return d


class ProbeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    probe: str
    m: int = Field(2, ge=0, le=8)
    n: Optional[int] = Field(None, ge=2)
    ladder: Optional[List[int]] = None
    out: str = "out"


def load_yaml(path: Optional[str]) -> dict:
    if path is None:
        return {}
    try:
        data = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as err:
        raise ConfigError(f"cannot read config {path}: {err}") from None
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must hold a mapping")
    return data


def merge(base: dict, args: argparse.Namespace, keys) -> dict:
    out = dict(base)
    for k in keys:
        v = getattr(args, k, None)
        if v is not None:
            out[k] = v
    return out

# }}}


# {{{ csv helpers

def _fmt(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return FLOAT_FMT % float(v)
    return "" if v is None else str(v)


def write_csv(path: Path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])


def write_gnuplot(path: Path, header, cols, shape):
    """Whitespace table for gnuplot; 2D data get a blank line per x row."""
    table = np.column_stack(cols).reshape(tuple(shape) + (len(cols),))
    with open(path, "w") as fh:
        fh.write("# " + " ".join(header) + "\n")
        rows = table if table.ndim == 3 else table[None]
        for block in rows:
            for r in block:
                fh.write(" ".join(FLOAT_FMT % v for v in r) + "\n")
            if table.ndim == 3:
                fh.write("\n")


def write_config(out: Path, data: dict):
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(yaml.safe_dump(data, sort_keys=True))


def rates(errors):
    """``log2`` ratios of consecutive error rows (``None`` for the first)."""
    out = [None]
    for a, b in zip(errors[:-1], errors[1:]):
        out.append(tuple(math.log2(x / y) if x > 0 and y > 0 else math.nan
                         for x, y in zip(a, b)))
    return out


def rate_rows(ns, errors):
    rows = []
    for n, e, r in zip(ns, errors, rates(errors)):
        r = (None,) * 3 if r is None else r
        rows.append((n, e[0], r[0], e[1], r[1], e[2], r[2]))
    return rows


RATE_HEADER = ["n", "L1", "rate_L1", "L2", "rate_L2", "Linf", "rate_Linf"]


def print_rate_table(rows, stream=None):
    stream = sys.stdout if stream is None else stream
    stream.write(f"{'n':>6} {'L1':>10} {'rate':>6} {'L2':>10} {'rate':>6} "
                 f"{'Linf':>10} {'rate':>6}\n")
    for n, e1, r1, e2, r2, e3, r3 in rows:
        rs = [("" if r is None else f"{r:6.2f}") for r in (r1, r2, r3)]
        stream.write(f"{n:>6} {e1:10.2e} {rs[0]:>6} {e2:10.2e} {rs[1]:>6} "
                     f"{e3:10.2e} {rs[2]:>6}\n")

# }}}


# {{{ solver driver

def simulate(cfg: RunConfig, n: int, with_errors: bool = False):
    """One run at resolution ``n``; returns ``(field, grid, diagnostics)``."""
    example = cfg.spec
    T = cfg.resolved_tfinal()
    cfl = cfg.resolved_cfl()
    grid, mode, initial = ex.build(example, n, T, cfl, cfg.pad)
    field0 = gr.init_field(grid, cfg.m, initial)
    step_cfg = st.StepConfig(m=cfg.m, tfinal=T, cfl=cfl, dt=cfg.dt,
                             substeps=cfg.substeps_for(n), sensor=cfg.sensor,
                             nu0_scale=cfg.resolved_nu0_scale(),
                             threads=cfg.threads)
    error_fn = None
    oracle = example.oracle
    if with_errors and oracle is not None and oracle.valid(T):
        def error_fn(f, t):
            if not oracle.valid(t):
                return (math.nan,) * 3
            return orc.error_norms(f, oracle, grid, t)
    with np.errstate(over="ignore", invalid="ignore"):
        field, diag = st.run(field0, grid, get_model(example.id), step_cfg,
                             mode, error_fn)
    return field, grid, diag


def final_errors(cfg: RunConfig, field, grid):
    oracle = cfg.spec.oracle
    T = cfg.resolved_tfinal()
    if oracle is None or not oracle.valid(T):
        return None
    return orc.error_norms(field, oracle, grid, T)


def cmd_run(cfg: RunConfig) -> int:
    out = Path(cfg.out)
    write_config(out, cfg.resolved())
    n = cfg.resolved_n()
    T = cfg.resolved_tfinal()
    t0 = time.perf_counter()
    field, grid, diag = simulate(cfg, n, with_errors=False)
    elapsed = time.perf_counter() - t0

    pts, vals = orc.physical_values(field, grid)
    oracle = cfg.spec.oracle
    exact = None
    if oracle is not None and oracle.valid(T):
        exact = oracle(*pts, T)
    cols = [p.ravel() for p in pts] + [vals.ravel()]
    header = ["x", "y"][:grid.dim] + ["u"]
    if exact is not None:
        cols.append(np.asarray(exact).ravel())
        header.append("u_exact")
    if cfg.example == "optimal-control":
        qy = field.poly[..., 0, 1] / grid.h[1]
        sl = grid.physical_slice(field.which)
        cols.append(sign_control_field("optimal-control", qy[sl]).ravel())
        header.append("sign_phi_y")
    write_csv(out / "solution.csv", header, zip(*cols))
    write_gnuplot(out / "solution.dat", header, cols, vals.shape)

    dcols = diag.columns()
    write_csv(out / "diagnostics.csv", dcols,
              ([r.get(c) for c in dcols] for r in diag.rows))

    errs = None if exact is None else orc.norms(vals - exact, grid.h, grid.dim)
    summary = dict(example=cfg.example, m=cfg.m, n=n, tfinal=T,
                   steps=len(diag.rows), max_abs_u=float(np.max(np.abs(vals))),
                   seconds=elapsed)
    if errs is not None:
        summary.update(L1=errs[0], L2=errs[1], Linf=errs[2])
    write_csv(out / "summary.csv", list(summary), [list(summary.values())])
    msg = f"{cfg.example} m={cfg.m} n={n} T={T:g}: {len(diag.rows)} steps"
    if errs is not None:
        msg += f", L1={errs[0]:.3e} L2={errs[1]:.3e} Linf={errs[2]:.3e}"
    print(msg)
    return EXIT_OK


def cmd_convergence(cfg: RunConfig) -> int:
    oracle = cfg.spec.oracle
    T = cfg.resolved_tfinal()
    if oracle is None:
        raise ConfigError(f"{cfg.example} has no reference solution")
    if not oracle.valid(T):
        raise ConfigError(f"the {cfg.example} reference solution is not "
                          f"exact at t={T}")
    out = Path(cfg.out)
    write_config(out, cfg.resolved())
    ns = cfg.resolved_ladder()
    errors = []
    for n in ns:
        t0 = time.perf_counter()
        field, grid, _ = simulate(cfg, n)
        errors.append(final_errors(cfg, field, grid))
        log.info("n=%d done in %.1fs", n, time.perf_counter() - t0)
    rows = rate_rows(ns, errors)
    write_csv(out / "convergence.csv", RATE_HEADER, rows)
    print_rate_table(rows)
    return EXIT_OK

# }}}


# {{{ probes

def cmd_sensor_probe(cfg: ProbeConfig) -> int:
    n = 40 if cfg.n is None else cfg.n
    res = probes.sensor_probe(cfg.probe, n, cfg.m)
    out = Path(cfg.out)
    write_config(out, dict(cfg.model_dump(), n=n, version=__version__))
    cols = [c.ravel() for c in res.centers] + [
        res.s.ravel(), res.nu.ravel(), res.kappa.ravel(), res.crossing.ravel()]
    header = ["x", "y"][:len(res.centers)] + ["s", "nu", "kappa", "crossing"]
    write_csv(out / "sensor_probe.csv", header, zip(*cols))
    active = int(np.count_nonzero(res.nu))
    print(f"{cfg.probe} m={cfg.m} n={n}: {active} of {res.nu.size} cells "
          f"with viscosity, s in [{np.min(res.s):.2f}, {np.max(res.s):.2f}]")
    return EXIT_OK


def cmd_taylor_probe(cfg: ProbeConfig) -> int:
    probe = probes.get_taylor_probe(cfg.probe)
    ns = cfg.ladder or ([20, 40, 80, 160] if probe.dim == 1 else [10, 20, 40, 80])
    errors = [probes.taylor_probe_errors(cfg.probe, cfg.m, n) for n in ns]
    rows = rate_rows(ns, errors)
    out = Path(cfg.out)
    write_config(out, dict(cfg.model_dump(), ladder=list(ns),
                           version=__version__))
    write_csv(out / "taylor_probe.csv", RATE_HEADER, rows)
    print(f"{probe.description}, m={cfg.m}")
    print_rate_table(rows)
    return EXIT_OK

# }}}


# {{{ argument parsing

RUN_KEYS = ("example", "m", "n", "cfl", "dt", "tfinal", "sensor", "nu0_scale",
            "threads", "substeps", "substep_base", "ladder", "even_ladder",
            "pad", "out", "boundary")
PROBE_KEYS = ("probe", "m", "n", "ladder", "out")


def _on_off(text: str) -> bool:
    if text not in ("on", "off"):
        raise argparse.ArgumentTypeError("expected 'on' or 'off'")
    return text == "on"


def _substeps(text: str):
    return text if text == "auto" else int(text)


def _ladder(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("ladder must be comma-separated "
                                         "integers") from None


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="hermite-hj", description=__doc__.split("\n\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(sp):
        sp.add_argument("--config", help="YAML file with default settings")
        sp.add_argument("--m", type=int)
        sp.add_argument("--n", type=int)
        sp.add_argument("--out")

    for name in ("run", "convergence"):
        sp = sub.add_parser(name)
        common(sp)
        sp.add_argument("--example", choices=sorted(ex.EXAMPLES))
        sp.add_argument("--cfl", type=float)
        sp.add_argument("--dt", type=float)
        sp.add_argument("--tfinal", type=float)
        sp.add_argument("--sensor", type=_on_off, metavar="on|off")
        sp.add_argument("--nu0-scale", dest="nu0_scale", type=float)
        sp.add_argument("--threads", type=int)
        sp.add_argument("--substeps", type=_substeps, metavar="auto|N")
        sp.add_argument("--substep-base", dest="substep_base", type=int)
        sp.add_argument("--ladder", type=_ladder, metavar="N1,N2,...")
        sp.add_argument("--even-ladder", dest="even_ladder",
                        action="store_const", const=True)
        sp.add_argument("--pad", type=int, help="padding cells (padded "
                        "boundary only)")
        sp.add_argument("--boundary", choices=["periodic", "dirichlet", "padded"])

    sp = sub.add_parser("sensor-probe")
    common(sp)
    sp.add_argument("--probe", choices=sorted(probes.SENSOR_PROBES))
    sp = sub.add_parser("taylor-probe")
    common(sp)
    sp.add_argument("--probe", choices=sorted(probes.TAYLOR_PROBES))
    sp.add_argument("--ladder", type=_ladder, metavar="N1,N2,...")
    return p


COMMANDS = {
    "run": (RunConfig, RUN_KEYS, cmd_run),
    "convergence": (RunConfig, RUN_KEYS, cmd_convergence),
    "sensor-probe": (ProbeConfig, PROBE_KEYS, cmd_sensor_probe),
    "taylor-probe": (ProbeConfig, PROBE_KEYS, cmd_taylor_probe),
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    schema, keys, fn = COMMANDS[args.command]
    try:
        cfg = schema(**merge(load_yaml(args.config), args, keys))
        return fn(cfg)
    except ValidationError as err:
        print(f"configuration error:\n{err}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, orc.OracleValidityError) as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except st.BlowUpError as err:
        print(f"numerical blow-up: {err}", file=sys.stderr)
        return EXIT_BLOWUP
    except ValueError as err:
        print(f"configuration error: {err}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())

# }}}
