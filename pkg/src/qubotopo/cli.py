"""Command-line front end: optimize, toy, and anneal subcommands.

``optimize`` runs the full pipeline and writes a PGM image of the final
layout plus a CSV iteration log; ``toy`` solves the built-in validation
problem; ``anneal`` minimizes a plain-text QUBO coefficient file.

Exit codes: 0 on success/convergence, 2 when an optimization stage hits
its iteration guard, 64 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

import numpy as np

from .anneal import EXHAUSTIVE_CAP, AnnealSchedule, solve_exhaustive, solve_sa
from .estimator import GbdTopologyOptimizer
from .qubo import load_coefficients
from .toy import build_toy_qubo

__all__ = ["main", "entry_point", "write_pgm", "write_history_csv"]

EXIT_OK = 0
EXIT_GUARD = 2
EXIT_USAGE = 64

HISTORY_HEADER = "# qubotopo-history v1"
HISTORY_COLUMNS = (
    "stage,iteration,upper,eta,gap,pareto,free,backend,seconds"
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def write_pgm(path, layout):
    """ASCII PGM of a 0/1 layout image: solid pixels black, void white."""
    layout = np.asarray(layout)
    if layout.ndim != 2:
        raise ValueError("layout image must be 2-D")
    height, width = layout.shape
    rows = [" ".join("0" if v else "255" for v in row) for row in layout]
    text = f"P2\n{width} {height}\n255\n" + "\n".join(rows) + "\n"
    Path(path).write_text(text)


def write_history_csv(path, records):
    lines = [HISTORY_HEADER, HISTORY_COLUMNS]
    for r in records:
        lines.append(
            f"{r.stage},{r.iteration},{r.upper!r},{r.eta!r},{r.gap!r},"
            f"{r.n_pareto},{r.n_free},{r.backend},{r.seconds:.6f}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _apply_thread_limit():
    threads = os.environ.get("QUBOTOPO_THREADS")
    if not threads:
        return None
    try:
        from threadpoolctl import threadpool_limits

        return threadpool_limits(limits=int(threads))
    except (ImportError, ValueError):
        return None


def _read_config_file(path):
    """Plain ``key = value`` pairs; ``#`` starts a comment."""
    values = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        values[key.replace("-", "_")] = value
    return values


_OPTIMIZE_TYPES = {
    "nelx": int,
    "nely": int,
    "volume_fraction": str,
    "volume_step": str,
    "filter_radius": float,
    "tolerance": float,
    "n_eta": int,
    "n_alpha": int,
    "penalty_cut_scale": float,
    "penalty_volume_scale": float,
    "backend": str,
    "reads": int,
    "sweeps": int,
    "beta_initial": float,
    "beta_final": float,
    "seed": int,
    "bc": str,
    "young_modulus": float,
    "poisson_ratio": float,
    "void_stiffness": float,
    "max_iterations": int,
    "solver": str,
    "output_dir": str,
}


def _build_optimize_parser(sub):
    p = sub.add_parser("optimize", help="run the topology optimization")
    p.add_argument("--config", help="key=value config file; flags override it")
    p.add_argument("--nelx", type=int)
    p.add_argument("--nely", type=int)
    p.add_argument("--volume-fraction", dest="volume_fraction")
    p.add_argument("--volume-step", dest="volume_step", help='fraction such as "1/24"')
    p.add_argument("--filter-radius", dest="filter_radius", type=float)
    p.add_argument("--tolerance", type=float)
    p.add_argument("--n-eta", dest="n_eta", type=int)
    p.add_argument("--n-alpha", dest="n_alpha", type=int)
    p.add_argument("--penalty-cut-scale", dest="penalty_cut_scale", type=float)
    p.add_argument("--penalty-volume-scale", dest="penalty_volume_scale", type=float)
    p.add_argument("--backend", choices=("sa", "exhaustive"))
    p.add_argument("--reads", type=int)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--beta-initial", dest="beta_initial", type=float)
    p.add_argument("--beta-final", dest="beta_final", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--bc", choices=("mbb-half", "cantilever"))
    p.add_argument("--young-modulus", dest="young_modulus", type=float)
    p.add_argument("--poisson-ratio", dest="poisson_ratio", type=float)
    p.add_argument("--void-stiffness", dest="void_stiffness", type=float)
    p.add_argument("--max-iterations", dest="max_iterations", type=int)
    p.add_argument("--solver", choices=("direct", "cg"))
    p.add_argument("--output-dir", dest="output_dir", default=None)


def _collect_optimize_settings(args):
    settings = {}
    if args.config:
        try:
            raw = _read_config_file(args.config)
        except (OSError, ValueError) as exc:
            raise _UsageError(str(exc)) from None
        for key, value in raw.items():
            if key not in _OPTIMIZE_TYPES:
                raise _UsageError(f"unknown config key {key!r}")
            try:
                settings[key] = _OPTIMIZE_TYPES[key](value)
            except ValueError:
                raise _UsageError(f"bad value for {key!r}: {value!r}") from None
    for key in _OPTIMIZE_TYPES:
        flag_value = getattr(args, key, None)
        if flag_value is not None:
            settings[key] = flag_value
    return settings


class _UsageError(Exception):
    pass


def _cmd_optimize(args):
    settings = _collect_optimize_settings(args)
    output_dir = Path(settings.pop("output_dir", None) or ".")
    try:
        optimizer = GbdTopologyOptimizer(**settings)
        optimizer.fit()
    except (ValueError, TypeError) as exc:
        raise _UsageError(str(exc)) from None

    output_dir.mkdir(parents=True, exist_ok=True)
    write_pgm(output_dir / "layout.pgm", optimizer.layout_)
    write_history_csv(output_dir / "history.csv", optimizer.history_)
    count = int(optimizer.design_vector_.sum())
    print(
        f"compliance={optimizer.compliance_:.6f} "
        f"iterations={optimizer.n_binary_programs_} "
        f"volume={count}/{optimizer.mesh_.n_elements}"
    )
    return EXIT_OK if optimizer.converged_ else EXIT_GUARD


def _cmd_toy(args):
    toy = build_toy_qubo(args.n_u, args.n_alpha1)
    n_vars = toy.model.n_vars
    if args.backend == "exhaustive":
        if n_vars > EXHAUSTIVE_CAP:
            raise _UsageError(
                f"the ({args.n_u}, {args.n_alpha1}) toy model has {n_vars} bits, "
                f"over the exhaustive cap of {EXHAUSTIVE_CAP}; use --backend sa"
            )
        samples = solve_exhaustive(toy.model)
    else:
        schedule = AnnealSchedule(
            reads=args.reads, sweeps=args.sweeps, seed=args.seed
        )
        samples = solve_sa(toy.model, schedule)
    sol = toy.decode(samples.best)
    print(
        f"u={sol.u!r} v={sol.v} w={sol.w} t={sol.t} "
        f"alpha1={sol.alpha1!r} alpha2={sol.alpha2} "
        f"energy={samples.best_energy!r}"
    )
    return EXIT_OK


def _cmd_anneal(args):
    try:
        model = load_coefficients(args.file)
    except OSError as exc:
        raise _UsageError(str(exc)) from None
    except ValueError as exc:
        raise _UsageError(f"{args.file}: {exc}") from None
    if args.backend == "exhaustive":
        if model.n_vars > EXHAUSTIVE_CAP:
            raise _UsageError(
                f"{model.n_vars} variables exceed the exhaustive cap "
                f"of {EXHAUSTIVE_CAP}; use --backend sa"
            )
        samples = solve_exhaustive(model)
    else:
        schedule = AnnealSchedule(
            reads=args.reads,
            sweeps=args.sweeps,
            beta_initial=args.beta_initial,
            beta_final=args.beta_final,
            seed=args.seed,
        )
        samples = solve_sa(model, schedule)
    bits = "".join(str(int(b)) for b in samples.best)
    print(f"energy={samples.best_energy!r} assignment={bits}")
    return EXIT_OK


def main(argv=None):
    parser = _Parser(prog="qubotopo", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    _build_optimize_parser(sub)

    toy = sub.add_parser("toy", help="solve the built-in validation problem")
    toy.add_argument("--n-u", dest="n_u", type=int, default=10)
    toy.add_argument("--n-alpha1", dest="n_alpha1", type=int, default=10)
    toy.add_argument("--backend", choices=("sa", "exhaustive"), default="exhaustive")
    toy.add_argument("--reads", type=int, default=1000)
    toy.add_argument("--sweeps", type=int, default=1000)
    toy.add_argument("--seed", type=int, default=0)

    anneal = sub.add_parser("anneal", help="minimize a QUBO coefficient file")
    anneal.add_argument("file")
    anneal.add_argument("--backend", choices=("sa", "exhaustive"), default="sa")
    anneal.add_argument("--reads", type=int, default=1000)
    anneal.add_argument("--sweeps", type=int, default=1000)
    anneal.add_argument("--beta-initial", dest="beta_initial", type=float)
    anneal.add_argument("--beta-final", dest="beta_final", type=float)
    anneal.add_argument("--seed", type=int, default=0)

    args = parser.parse_args(argv)
    limit = _apply_thread_limit()
    try:
        if args.command == "optimize":
            return _cmd_optimize(args)
        if args.command == "toy":
            return _cmd_toy(args)
        return _cmd_anneal(args)
    except _UsageError as exc:
        print(f"qubotopo: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        if limit is not None:
            limit.unregister()


def entry_point():
    sys.exit(main())
