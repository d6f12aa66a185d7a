"""Command-line driver regenerating the headline figure data as CSV.

Subcommands:
  teleport-sweep   success probability vs carrier amplitude, both encodings
  hadamard-sweep   gate fidelity and post-selected success vs amplitude
  loss-sweep       restoration-teleport success vs accumulated fiber loss
  ecc              block-code success: closed form vs Monte Carlo
  validate         run the invariant suite; exit 1 on any failure

Every experiment is deterministic given its configuration: Monte Carlo
trial t of sweep point i draws from numpy's Generator seeded with the
sequence (master_seed, i, t), so extending a sweep or the trial count
never reshuffles earlier draws.  Output rows are written in grid order
with a comment header carrying the version, a config hash and the seed;
identical configurations produce byte-identical files.

Flags override config-file values; the config file is plain
`key = value` text with `#` comments (keys match the long flag names,
e.g. `alpha = 0.5:4:0.25`).
"""

from __future__ import annotations

import argparse
import hashlib
import math
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__, ecc
from . import encodings as enc
from . import protocols as pr
from .loss import ChannelParams, DEFAULT_LOSS_PER_KM, error_prob
from .validate import run_all


class ConfigError(ValueError):
    pass


EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_BAD_CONFIG = 2


def parse_config_file(path: str) -> dict[str, str]:
    """Line-based `key = value` file, UTF-8, `#` comments."""
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError(f"{path}:{lineno}: expected `key = value`")
            key, _, val = text.partition("=")
            values[key.strip().lower().replace("-", "_")] = val.strip()
    return values


def parse_grid(text: str) -> list[float]:
    """`start:stop:step` (inclusive) or a single value."""
    parts = text.split(":")
    if len(parts) == 1:
        return [float(parts[0])]
    if len(parts) != 3:
        raise ConfigError(f"bad grid {text!r}; expected start:stop:step")
    start, stop, step = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ConfigError(f"bad grid {text!r}; need step > 0 and stop >= start")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return [start + k * step for k in range(count)]


def parse_complex(text: str) -> complex:
    re_s, _, im_s = text.partition(",")
    return complex(float(re_s), float(im_s or "0"))


def _config_hash(args: dict) -> str:
    blob = ";".join(f"{k}={args[k]}" for k in sorted(args))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def _fmt(x: float) -> str:
    return f"{x:.12g}"


def _write_csv(path: str | None, header: list[str], rows: list[list[str]],
               config: dict, seed) -> None:
    lines = [
        f"# coqsim {__version__}",
        f"# config {_config_hash(config)}",
        f"# seed {seed if seed is not None else 'none'}",
        ",".join(header),
    ]
    lines += [",".join(r) for r in rows]
    text = "\n".join(lines) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _qubit_params(ns) -> tuple[complex, complex]:
    mu = parse_complex(ns.mu)
    nu = parse_complex(ns.nu)
    norm = math.sqrt(abs(mu) ** 2 + abs(nu) ** 2)
    if norm <= 0:
        raise ConfigError("mu and nu cannot both vanish")
    return mu / norm, nu / norm


# ---------------------------------------------------------------------------
# experiments


def cmd_teleport_sweep(ns) -> int:
    mu, nu = _qubit_params(ns)
    rows = []
    for alpha in parse_grid(ns.alpha):
        p_pm = pr.teleport_success_prob(alpha, mu, nu, enc.PM)
        p_za = pr.teleport_success_prob(alpha, mu, nu, enc.ZERO_ALPHA)
        rows.append([_fmt(alpha), _fmt(p_pm), _fmt(p_za), _fmt(1.0 - p_pm)])
    _write_csv(ns.out, ["alpha", "p_success_pm", "p_success_zeroalpha", "p_fail"],
               rows, vars(ns), None)
    return EXIT_OK


def cmd_hadamard_sweep(ns) -> int:
    mu, nu = _qubit_params(ns)
    target = ns.fidelity_target
    rows = []
    for alpha in parse_grid(ns.alpha):
        spec = enc.QubitSpec(mu, nu, alpha, enc.ZERO_ALPHA)
        rep = pr.hadamard_report(alpha, spec, target_fidelity=target)
        rows.append([_fmt(alpha), _fmt(rep.average_fidelity),
                     _fmt(rep.accepted_probability)])
    _write_csv(ns.out, ["alpha", "avg_fidelity", "postselect_success_at_target"],
               rows, vars(ns), None)
    return EXIT_OK


def cmd_loss_sweep(ns) -> int:
    mu, nu = _qubit_params(ns)
    alpha = float(ns.alpha)
    rows = []
    for length in parse_grid(ns.length):
        lam_l = ns.lam * length
        eta = math.exp(-lam_l)
        beta = alpha * math.sqrt(eta)
        p_s = pr.restore_success_prob(beta, alpha, mu, nu)
        rows.append([_fmt(lam_l), _fmt(eta), _fmt(beta), _fmt(p_s),
                     _fmt(error_prob(alpha, eta))])
    _write_csv(ns.out, ["lambdaL", "eta", "surviving_alpha", "p_success", "p_e"],
               rows, vars(ns), None)
    return EXIT_OK


def _ecc_point(task) -> tuple[int, float, float, float]:
    """(point index, mean fidelity, standard error, mean off-span weight)."""
    index, p_e, n, alpha, seed, trials = task
    eta = 1.0 + math.log1p(-2.0 * p_e) / (2.0 * alpha * alpha)
    channel = ChannelParams.from_eta(eta)
    spec = enc.QubitSpec(1 / math.sqrt(2), 1j / math.sqrt(2), alpha, enc.PM)
    code = ecc.CodeParams(n=n, alpha=alpha)
    fids = np.empty(trials)
    off = np.empty(trials)
    for t in range(trials):
        rng = np.random.default_rng((seed, index, t))
        r = ecc.end_to_end(spec, code, channel, restoration=False, rng=rng)
        fids[t] = r.fidelity
        off[t] = r.off_span_weight
    return index, float(fids.mean()), float(fids.std() / math.sqrt(trials)), float(off.mean())


def cmd_ecc(ns) -> int:
    if ns.seed is None:
        raise ConfigError("ecc is a Monte Carlo experiment; --seed is required")
    pes = parse_grid(ns.pe)
    alpha = float(ns.alpha)
    for p_e in pes:
        if not 0.0 <= p_e < 0.5:
            raise ConfigError("pe values must lie in [0, 0.5) to invert to a transmissivity")
        if 1.0 + math.log1p(-2.0 * p_e) / (2.0 * alpha * alpha) <= 0.0:
            raise ConfigError(f"pe={p_e} is unreachable at alpha={alpha}")
    tasks = [(i, p_e, ns.n, alpha, ns.seed, ns.trials) for i, p_e in enumerate(pes)]
    if ns.jobs > 1:
        with ProcessPoolExecutor(max_workers=ns.jobs) as pool:
            results = {r[0]: r for r in pool.map(_ecc_point, tasks)}
    else:
        results = {r[0]: r for r in map(_ecc_point, tasks)}
    rows = []
    for i, p_e in enumerate(pes):
        _, mean, se, off = results[i]
        rows.append([_fmt(p_e), str(ns.n), _fmt(ecc.general_code_success(ns.n, p_e)),
                     _fmt(mean), _fmt(se), _fmt(off)])
    _write_csv(ns.out, ["pe", "n", "ps_analytic", "ps_montecarlo", "stderr",
                        "undetected_rate"], rows, vars(ns), ns.seed)
    return EXIT_OK


def cmd_validate(ns) -> int:
    results = run_all(verbose=True)
    failed = [r for r in results if not r.passed]
    print(f"\n{len(results) - len(failed)}/{len(results)} checks passed")
    return EXIT_OK if not failed else EXIT_VALIDATION


# ---------------------------------------------------------------------------
# argument plumbing


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file; flags override it")
    p.add_argument("--out", help="output CSV path (default: stdout)")
    p.add_argument("--seed", type=int, help="master seed for Monte Carlo draws")
    p.add_argument("--trials", type=int, default=1000, help="Monte Carlo trials per point")
    p.add_argument("--alpha", default="2", help="carrier amplitude grid start:stop:step")
    p.add_argument("--mu", default="0.70710678118654752,0", help="logical-0 weight re,im")
    p.add_argument("--nu", default="0.70710678118654752,0", help="logical-1 weight re,im")
    p.add_argument("--encoding", choices=[enc.PM, enc.ZERO_ALPHA], default=enc.PM)
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LOSS_PER_KM,
                   help="fiber loss per km")
    p.add_argument("--length", default="0:30:1", help="fiber length grid, km")
    p.add_argument("--pe", default="0.05:0.45:0.05", help="flip-probability grid")
    p.add_argument("--n", type=int, default=1, help="errors the block must tolerate")
    p.add_argument("--fidelity-target", dest="fidelity_target", type=float, default=0.99)
    p.add_argument("--jobs", type=int, default=1, help="worker processes for Monte Carlo")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="coqsim",
                                     description="coherent-state qubit experiments")
    parser.add_argument("--version", action="version", version=f"coqsim {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in [("teleport-sweep", cmd_teleport_sweep),
                     ("hadamard-sweep", cmd_hadamard_sweep),
                     ("loss-sweep", cmd_loss_sweep),
                     ("ecc", cmd_ecc),
                     ("validate", cmd_validate)]:
        p = sub.add_parser(name)
        _add_common(p)
        p.set_defaults(func=fn)
    return parser


def _apply_config(ns: argparse.Namespace, argv: list[str]) -> None:
    """Fill namespace values from the config file unless set on the CLI."""
    if not ns.config:
        return
    file_values = parse_config_file(ns.config)
    explicit = {a.split("=")[0].lstrip("-").replace("-", "_")
                for a in argv if a.startswith("--")}
    casts = {"seed": int, "trials": int, "n": int, "jobs": int,
             "lam": float, "fidelity_target": float}
    aliases = {"lambda": "lam"}
    for key, raw in file_values.items():
        dest = aliases.get(key, key)
        if dest in ("config", "command", "func") or dest in explicit or key in explicit:
            continue
        if not hasattr(ns, dest):
            raise ConfigError(f"unknown config key {key!r}")
        setattr(ns, dest, casts.get(dest, str)(raw))


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        _apply_config(ns, argv)
        return ns.func(ns)
    except (ConfigError, ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_BAD_CONFIG


if __name__ == "__main__":
    sys.exit(main())
