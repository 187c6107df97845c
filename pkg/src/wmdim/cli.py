"""Command line entry point: ``wmdim <command> ...``."""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
from fractions import Fraction

from . import checks, cubes, entropy, independence
from .measures import DiscreteMeasure, load_measure
from .parallel import pmap
from .spaces import IePair, SystemSpec, build_space, point_str
from .svg import loglog_svg
from .transport import w1


class ConfigError(Exception):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------


def parse_range(text: str, key: str) -> list[int]:
    """``"1..4"`` or ``"1,3,5"`` or ``"7"``."""
    try:
        text = str(text)
        if ".." in text:
            a, b = text.split("..")
            out = list(range(int(a), int(b) + 1))
        else:
            out = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ConfigError(f"cannot parse range {text!r}", key) from None
    if not out:
        raise ConfigError("range is empty", key)
    return out


def parse_fraction(text, key: str) -> Fraction:
    try:
        return Fraction(str(text))
    except (ValueError, ZeroDivisionError):
        raise ConfigError(f"cannot parse number {text!r}", key) from None


def _read_json(path, key):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}", key) from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"malformed JSON in {path}: {exc.msg}", key) from None


def load_spec(path) -> SystemSpec:
    obj = _read_json(path, "system")
    try:
        return SystemSpec.from_json(obj)
    except KeyError as exc:
        raise ConfigError(f"system config is missing {exc.args[0]!r}", str(exc.args[0])) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid system config: {exc}", "system") from None


def load_pair(path, spec: SystemSpec) -> IePair:
    if path is None:
        if not spec.is_shift:
            raise ConfigError("a circle system needs --pair", "pair")
        return IePair((spec.alphabet[0],), (spec.alphabet[1],))
    obj = _read_json(path, "pair")
    try:
        return IePair.from_json(obj, spec)
    except KeyError as exc:
        raise ConfigError(f"pair config is missing {exc.args[0]!r}", str(exc.args[0])) from None
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid pair: {exc}", "pair") from None


def _merge_config(args, keys):
    """Fill unset options from ``--config`` (a JSON object keyed by option name)."""
    if getattr(args, "config", None) is None:
        return
    obj = _read_json(args.config, "config")
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object", "config")
    for k, v in obj.items():
        attr = k.replace("-", "_")
        if attr not in keys:
            raise ConfigError(f"unknown config key {k!r}", k)
        if getattr(args, attr) is None:
            setattr(args, attr, v)


def config_hash(resolved: dict) -> str:
    blob = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def write_csv(path, header: list[str], rows: list[list], resolved: dict):
    buf = io.StringIO()
    buf.write(f"# config-hash: {config_hash(resolved)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow(row)
    text = buf.getvalue()
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    return text


def _num(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, float):
        return repr(x)
    return str(x)


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_w1(args) -> int:
    spec = load_spec(args.system)
    space = build_space(spec)
    try:
        mu = load_measure(args.mu, spec)
        nu = load_measure(args.nu, spec)
    except KeyError as exc:
        raise ConfigError(f"measure file is missing {exc.args[0]!r}", str(exc.args[0])) from None
    except (OSError, json.JSONDecodeError, ValueError) as exc:
        raise ConfigError(f"invalid measure: {exc}", "mu/nu") from None
    if args.exact:
        res = w1(space, mu, nu)
    else:
        res = w1(space, DiscreteMeasure(dict(mu.items()), exact=False),
                 DiscreteMeasure(dict(nu.items()), exact=False), exact=False)
    print(f"cost,{_num(res.cost)}")
    if args.plan:
        print("source,target,mass")
        for s, t, m in res.plan.entries:
            print(f"{point_str(s)},{point_str(t)},{_num(m)}")
    return 0


def cmd_independence(args) -> int:
    spec = load_spec(args.system)
    pair = load_pair(args.pair, spec)
    J = parse_range(args.J, "J")
    try:
        res = independence.verify_independence(spec, pair, J, args.bound)
    except ValueError as exc:
        raise ConfigError(str(exc), "J") from None
    print(json.dumps(res.to_json(), indent=2))
    return 0


def cmd_cover(args) -> int:
    if args.cover:
        obj = _read_json(args.cover, "cover")
        if isinstance(obj, dict) and "cover" in obj:
            obj = obj["cover"]  # a search witness file
        try:
            cover = cubes.BoxCover.from_json(obj)
        except (KeyError, ValueError) as exc:
            raise ConfigError(f"invalid cover: {exc}", "cover") from None
        covered = cover.certify()
        viol = cubes.is_separating(cover)
        out = {"order": cubes.cover_order(cover), "separating": viol is None,
               "violation": None if viol is None else viol.to_json(), "covering": cover.certification,
               "candidate_constants": {"n*k": cover.n * cover.k, "n*(k-1)": cover.n * (cover.k - 1)}}
        print(json.dumps(out, indent=2))
        return 0 if covered else 1
    if args.k is None or args.n is None:
        raise ConfigError("--k and --n are required without --cover", "k")
    try:
        res = cubes.search_min_separating_order(args.k, args.n, args.budget if args.search else 0, args.seed)
    except ValueError as exc:
        raise ConfigError(str(exc), "k") from None
    resolved = {"command": "cover", "k": args.k, "n": args.n, "budget": args.budget, "seed": args.seed,
                "search": bool(args.search)}
    rows = [[it, o, "" if s is None else int(s), int(a)] for it, o, s, a in res.trace]
    write_csv(args.out, ["iteration", "order", "separating", "accepted"], rows, resolved)
    if args.witness:
        with open(args.witness, "w") as fh:
            json.dump(res.to_json(), fh, indent=2)
    print(f"# best order {res.order}; candidates n*k={args.n * args.k}, n*(k-1)={args.n * (args.k - 1)}",
          file=sys.stderr)
    return 0


def _rate_row(task):
    spec, pair, m, n, g, L, density = task
    row = entropy.lower_bound_curve(spec, pair, [m], n, density=density)[0]
    rep = entropy.induced_separated(spec, g, L, row.scale, n, m)
    s_hat = entropy.spanning_count_at(spec, row.scale / 4)
    upper = s_hat * math.log(2 / row.scale)
    return [m, row.q, row.gamma, row.scale, row.bound, rep.grid_count, upper, row.certified]


RATE_KEYS = {"system", "pair", "m", "n", "g", "L", "density", "out", "svg", "jobs", "config"}


def cmd_rates(args) -> int:
    _merge_config(args, RATE_KEYS)
    if args.system is None:
        raise ConfigError("--system is required", "system")
    spec = load_spec(args.system)
    if not spec.is_shift:
        raise ConfigError("rates runs on shift systems", "system")
    pair = load_pair(args.pair, spec)
    ms = parse_range(args.m if args.m is not None else "1..4", "m")
    n = int(args.n if args.n is not None else 4)
    g = int(args.g if args.g is not None else 1)
    L = int(args.L if args.L is not None else 2)
    density = parse_fraction(args.density if args.density is not None else 1, "density")
    need = n * max(ms) + 1
    if need > spec.depth:
        raise ConfigError(f"n*m + 1 = {need} exceeds the truncation depth {spec.depth}", "depth")
    resolved = {"command": "rates", "system": spec.to_json(), "pair": pair.to_json(), "m": ms, "n": n,
                "g": g, "L": L, "density": str(density)}
    rows = pmap(_rate_row, [(spec, pair, m, n, g, L, density) for m in ms], args.jobs)
    rows.sort(key=lambda r: r[0])
    header = ["m", "q_m", "gamma_m", "scale", "certified_lower_bound", "grid_count", "covering_upper_bound"]
    write_csv(args.out, header, [[_num(x) for x in r[:7]] for r in rows], resolved)
    if args.svg:
        with open(args.svg, "w") as fh:
            fh.write(loglog_svg({"certified bound": [(float(1 / r[3]), r[4]) for r in rows]},
                                title="certified entropy lower bound", xlabel="1/scale", ylabel="bound"))
    ok = all(r[7] is not False for r in rows)
    return 0 if ok else 1


def cmd_verify(args) -> int:
    spec = load_spec(args.system)
    names = list(checks.LEMMAS) if args.lemma == "all" else [args.lemma]
    try:
        reports = [checks.run_check(name, spec, args.m, args.n, args.trials, args.seed) for name in names]
    except ValueError as exc:
        raise ConfigError(str(exc), "depth") from None
    payload = [r.to_json() for r in reports]
    print(json.dumps(payload if len(payload) > 1 else payload[0], indent=2))
    for r in reports:
        print(r.summary(), file=sys.stderr)
    return 0 if all(r.verdict for r in reports) else 1


ENTROPY_KEYS = {"system", "eps", "n", "out", "config", "jobs", "exact_upto"}


def cmd_entropy(args) -> int:
    _merge_config(args, ENTROPY_KEYS)
    if args.system is None:
        raise ConfigError("--system is required", "system")
    spec = load_spec(args.system)
    eps = parse_fraction(args.eps if args.eps is not None else "3/10", "eps")
    ns = parse_range(args.n if args.n is not None else "4..12", "n")
    try:
        rep = entropy.entropy_estimate(spec, eps, ns, exact_upto=int(args.exact_upto or 0))
    except ValueError as exc:
        raise ConfigError(str(exc), "depth") from None
    resolved = {"command": "entropy", "system": spec.to_json(), "eps": str(eps), "n": ns}
    rows = [[n, g, "" if e is None else e] for n, g, e in rep.counts]
    write_csv(args.out, ["n", "greedy", "exact"], rows, resolved)
    print(f"# slope {rep.slope!r}; subadditivity {'ok' if rep.ok else 'VIOLATED'}", file=sys.stderr)
    return 0 if rep.ok else 1


def _induced_row(task):
    spec, pair, g, L, eps, n, m, metric = task
    if metric == "bowen":
        grid = entropy.measure_grid(entropy.cylinder_representatives(spec, L), g, 400)
        table = entropy._pairwise(grid, lambda a, b: entropy.w_bowen(spec, a, b, n))
        return [n, len(grid), entropy._count_from_table(table, eps, "greedy"), "", ""]
    rep = entropy.induced_separated(spec, g, L, eps, n, m, pair=pair)
    return [n, rep.grid_size, rep.grid_count, rep.h_size, rep.h_certified]


INDUCED_KEYS = {"system", "pair", "g", "L", "eps", "m", "n", "metric", "out", "config", "jobs"}


def cmd_induced(args) -> int:
    _merge_config(args, INDUCED_KEYS)
    if args.system is None:
        raise ConfigError("--system is required", "system")
    spec = load_spec(args.system)
    pair = load_pair(args.pair, spec)
    g = int(args.g if args.g is not None else 1)
    L = int(args.L if args.L is not None else 2)
    m = int(args.m if args.m is not None else 2)
    eps = parse_fraction(args.eps if args.eps is not None else "1/16", "eps")
    ns = parse_range(args.n if args.n is not None else "1..3", "n")
    metric = args.metric or "wnm"
    if metric not in ("wnm", "bowen"):
        raise ConfigError(f"unknown metric {metric!r}", "metric")
    resolved = {"command": "induced-entropy", "system": spec.to_json(), "pair": pair.to_json(), "g": g, "L": L,
                "m": m, "eps": str(eps), "n": ns, "metric": metric}
    try:
        rows = pmap(_induced_row, [(spec, pair, g, L, eps, n, m, metric) for n in ns], args.jobs)
    except ValueError as exc:
        raise ConfigError(str(exc), "grid") from None
    write_csv(args.out, ["n", "grid_size", "grid_count", "h_size", "h_certified"], rows, resolved)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="wmdim", description="Exact experiments on induced Wasserstein dynamics.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("w1", help="exact 1-Wasserstein distance between two measure files")
    s.add_argument("--system", "--space", dest="system", required=True)
    s.add_argument("--mu", required=True)
    s.add_argument("--nu", required=True)
    s.add_argument("--exact", action="store_true", help="rational arithmetic (default float)")
    s.add_argument("--plan", action="store_true", help="print the plan as CSV rows")
    s.set_defaults(func=cmd_w1)

    s = sub.add_parser("independence", help="check an IE-pair pattern set")
    s.add_argument("--system", required=True)
    s.add_argument("--pair")
    s.add_argument("--J", required=True)
    s.add_argument("--bound", type=int, default=independence.DEFAULT_BOUND)
    s.set_defaults(func=cmd_independence)

    s = sub.add_parser("cover", help="order and separation of box covers")
    s.add_argument("--k", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--search", action="store_true")
    s.add_argument("--budget", type=int, default=200)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--cover", help="evaluate a cover JSON instead of searching")
    s.add_argument("--out")
    s.add_argument("--witness")
    s.set_defaults(func=cmd_cover)

    for name, func, extra, desc in (
            ("rates", cmd_rates, ("pair", "m", "n", "g", "L", "density", "svg"),
             "certified entropy lower bound and covering upper bound per block length m"),
            ("entropy", cmd_entropy, ("eps", "n", "exact-upto"), "separated counts of the base system"),
            ("induced-entropy", cmd_induced, ("pair", "g", "L", "eps", "m", "n", "metric"),
             "separated counts of measure grids under the dynamical Wasserstein metrics")):
        s = sub.add_parser(name, help=desc)
        s.add_argument("--system")
        s.add_argument("--config")
        s.add_argument("--out")
        s.add_argument("--jobs", type=int)
        for opt in extra:
            s.add_argument(f"--{opt}")
        s.set_defaults(func=func)

    s = sub.add_parser("verify", help="run an exact property checker on a system")
    s.add_argument("--lemma", required=True, choices=list(checks.LEMMAS) + ["all"])
    s.add_argument("--system", required=True)
    s.add_argument("--m", type=int, default=2)
    s.add_argument("--n", type=int, default=2)
    s.add_argument("--trials", type=int, default=100)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(json.dumps({"error": str(exc), "key": exc.key}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
