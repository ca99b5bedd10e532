# intres.py

import argparse
import logging
import os
import sys
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from calcs.approx_calcs import (
    brute_force_cover,
    cover_contract_failures,
    greedy_cover,
    interval_cover,
    interval_resolution,
    resolution_to_doc,
)
from calcs.homology_calcs import ar_translate, interval_gldim, monotonicity_check, projective_gldim
from calcs.linalg_calcs import field as field_class
from calcs.module_calcs import (
    PersModule,
    interval_module,
    module_from_doc,
    module_to_doc,
    random_module,
    restrict,
)
from calcs.poset_calcs import (
    FAMILY_KINDS,
    Interval,
    Poset,
    convex_hull,
    enumerate_intervals,
    full_subposet,
    make_family,
    poset_from_doc,
    poset_to_doc,
    random_poset,
)
from calcs.string_calcs import (
    CmlCombinatorics,
    classify_zero_gldim,
    count_indecomposables,
    enumerate_strings,
    string_family,
    string_to_interval,
)
from calcs.utils import (
    CapExceededError,
    InputFormatError,
    IntresError,
    InvariantError,
    Settings,
    configure_logging,
    dump_json,
    load_settings,
    parse_json_text,
    split_labels,
)

_logger = logging.getLogger("intres")

EXIT_OK = 0
EXIT_MALFORMED = 1
EXIT_INVALID = 2
EXIT_INVARIANT = 3

FAMILY_PARAMS = {"A": ("n",), "C": ("m", "l"), "grid": ("rows", "cols"), "ladder": ("m",)}


############################################################
# Input / output


def read_document(path: str) -> Any:
    if path == "-":
        return parse_json_text(sys.stdin.read(), "<stdin>")
    try:
        with open(path) as fh:
            return parse_json_text(fh.read(), path)
    except OSError as e:
        raise InputFormatError(f"cannot read {path!r} ({e.strerror})")


def parse_module_file(path: str, default_p: int = 2) -> PersModule:
    """
    Loads and validates a module document; omitted maps are zero.

    Parameters:
    - path: File path, or '-' for stdin.
    - default_p: Field characteristic used when the document has no "p".

    Returns:
    - PersModule.
    """
    base_dir = os.path.dirname(os.path.abspath(path)) if path != "-" else os.getcwd()
    return module_from_doc(read_document(path), path="module", base_dir=base_dir, default_p=default_p)


def parse_poset_file(path: str) -> Poset:
    doc = read_document(path)
    if isinstance(doc, dict) and "poset" in doc and "elements" not in doc:
        doc = doc["poset"]
    return poset_from_doc(doc)


def emit(doc: Any, table: Optional[pd.DataFrame], fmt: str) -> None:
    if fmt == "table" and table is not None:
        sys.stdout.write(table.to_string(index=False) + "\n")
    else:
        sys.stdout.write(dump_json(doc))


def _interval_arg(host: Poset, raw: str) -> Interval:
    return Interval.of(host.indices(split_labels(raw)))


############################################################
# Verbs


def cmd_gen(args, settings: Settings) -> int:
    missing = [name for name in FAMILY_PARAMS.get(args.family, ()) if getattr(args, name) is None]
    if missing:
        raise InputFormatError(f"family {args.family} needs " + ", ".join(f"--{name}" for name in missing))
    sizes = {name: getattr(args, name) or 0 for name in ("n", "m", "l", "rows", "cols")}
    p = make_family(args.family, orientation=args.orientation, **sizes)
    doc = poset_to_doc(p)
    emit(doc, pd.DataFrame({"source": [a for a, _ in doc["relations"]],
                            "target": [b for _, b in doc["relations"]]}), args.format)
    return EXIT_OK


def cmd_intervals(args, settings: Settings) -> int:
    p = parse_poset_file(args.input)
    intervals = enumerate_intervals(p)
    doc = {"count": len(intervals), "intervals": [i.labels(p) for i in intervals]}
    table = pd.DataFrame({"size": [i.size for i in intervals],
                          "members": [",".join(i.labels(p)) for i in intervals]})
    emit(doc, table, args.format)
    return EXIT_OK


def cmd_cover(args, settings: Settings) -> int:
    module = parse_module_file(args.input, settings.field)
    if args.method == "greedy":
        cover = greedy_cover(module)
    elif args.method == "brute":
        cover = brute_force_cover(module, settings)
    else:
        cover = interval_cover(module, settings)
    doc = {"method": args.method, "summands": cover.summands.to_doc(), "total": cover.summands.total()}
    table = pd.DataFrame({"interval": list(doc["summands"]), "multiplicity": list(doc["summands"].values())})
    emit(doc, table, args.format)
    return EXIT_OK


def cmd_resolve(args, settings: Settings) -> int:
    module = parse_module_file(args.input, settings.field)
    resolution = interval_resolution(module, settings.reduce_support, settings)
    doc = resolution_to_doc(resolution)
    rows = [(i, k, m) for i, term in enumerate(doc["terms"]) for k, m in term.items()]
    table = pd.DataFrame(rows, columns=["term", "interval", "multiplicity"])
    emit(doc, table, args.format)
    return EXIT_OK


def cmd_resdim(args, settings: Settings) -> int:
    module = parse_module_file(args.input, settings.field)
    resolution = interval_resolution(module, settings.reduce_support, settings)
    doc = {"resdim": resolution.length}
    emit(doc, pd.DataFrame([doc]), args.format)
    return EXIT_OK


def cmd_gldim(args, settings: Settings) -> int:
    p = parse_poset_file(args.input)
    if args.projective:
        doc = {"projective_gldim": projective_gldim(p, settings.field, settings)}
        emit(doc, pd.DataFrame([doc]), args.format)
        return EXIT_OK
    report = interval_gldim(p, settings.field, settings)
    doc = {
        "interval_gldim": report.value,
        "witness": report.witness.labels(p) if report.witness else None,
        "per_interval": {",".join(i.labels(p)): v for i, v in report.per_interval},
    }
    table = pd.DataFrame({"interval": list(doc["per_interval"]), "resdim_tau": list(doc["per_interval"].values())})
    emit(doc, table, args.format)
    return EXIT_OK


def cmd_classify(args, settings: Settings) -> int:
    verdict = classify_zero_gldim(parse_poset_file(args.input))
    doc = verdict.to_doc()
    emit(doc, pd.DataFrame([{"accepted": verdict.accepted, "shape": verdict.describe()}]), args.format)
    return EXIT_OK


def cmd_strings(args, settings: Settings) -> int:
    c = CmlCombinatorics(args.m, args.l)
    host = c.poset()
    strings = enumerate_strings(c)
    rows = [
        {"string": str(w), "family": string_family(c, w), "interval": ",".join(string_to_interval(c, w, host).labels(host))}
        for w in strings
    ]
    doc = {"count": len(strings), "indecomposables": count_indecomposables(args.m, args.l), "strings": rows}
    emit(doc, pd.DataFrame(rows), args.format)
    return EXIT_OK


def cmd_restrict(args, settings: Settings) -> int:
    module = parse_module_file(args.input, settings.field)
    emb = full_subposet(module.host, module.host.indices(split_labels(args.elements)))
    doc = module_to_doc(restrict(module, emb))
    emit(doc, pd.DataFrame({"element": list(doc["dims"]), "dim": list(doc["dims"].values())}), args.format)
    return EXIT_OK


def cmd_conv(args, settings: Settings) -> int:
    p = parse_poset_file(args.input)
    hull = convex_hull(p, p.indices(split_labels(args.elements)))
    doc = {"hull": p.names(hull)}
    emit(doc, pd.DataFrame({"element": doc["hull"]}), args.format)
    return EXIT_OK


def cmd_tau(args, settings: Settings) -> int:
    p = parse_poset_file(args.input)
    interval = _interval_arg(p, args.interval)
    translate = ar_translate(interval_module(p, interval, settings.field))
    resolution = interval_resolution(translate, settings.reduce_support, settings)
    doc = {"interval": interval.labels(p), "tau": module_to_doc(translate), "resdim": resolution.length}
    emit(doc, pd.DataFrame({"element": p.labels, "dim": translate.dims}), args.format)
    return EXIT_OK


def run_checks(samples: int, settings: Settings) -> Dict[str, int]:
    """
    Randomized property sweep over small posets: the cover contract on every
    sample, agreement with the exhaustive cover where it fits the caps, and
    monotonicity of the interval global dimension along a random full subposet.
    """
    rng = np.random.default_rng(settings.seed)
    counts = {"samples": samples, "contract_failures": 0, "oracle_checked": 0, "oracle_failures": 0,
              "monotonicity_checked": 0, "monotonicity_failures": 0}
    for i in range(samples):
        p = (2, 3)[i % 2]
        host = random_poset(int(rng.integers(2, 6)), rng)
        module = random_module(host, p, rng, max_dim=2)
        cover = interval_cover(module, settings)
        failures = cover_contract_failures(cover)
        if failures:
            counts["contract_failures"] += 1
            _logger.warning("Sample %d: cover contract failed (%s)", i, "; ".join(failures))
        try:
            oracle = brute_force_cover(module, settings)
        except CapExceededError:
            oracle = None
        if oracle is not None:
            counts["oracle_checked"] += 1
            if oracle.summands != cover.summands:
                counts["oracle_failures"] += 1
                _logger.warning("Sample %d: cover %s differs from exhaustive %s", i,
                                cover.summands.to_doc(), oracle.summands.to_doc())
        keep = sorted(rng.choice(host.n, size=int(rng.integers(1, host.n + 1)), replace=False).tolist())
        result = monotonicity_check(full_subposet(host, keep), p, settings)
        if result is not None:
            counts["monotonicity_checked"] += 1
            if not result.holds:
                counts["monotonicity_failures"] += 1
                _logger.warning("Sample %d: subposet gldim %d exceeds host gldim %d", i,
                                result.sub_value, result.host_value)
    return counts


def cmd_check(args, settings: Settings) -> int:
    counts = run_checks(args.samples, settings)
    emit(counts, pd.DataFrame([counts]), args.format)
    failed = counts["contract_failures"] + counts["oracle_failures"] + counts["monotonicity_failures"]
    return EXIT_INVARIANT if failed else EXIT_OK


############################################################
# Parser


class IntresArgumentParser(argparse.ArgumentParser):
    """Reports bad command lines as malformed input."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_MALFORMED, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = IntresArgumentParser(add_help=False)
    common.add_argument("--field", type=int, default=None, help="Prime characteristic of the base field")
    common.add_argument("--reduce-support", action=argparse.BooleanOptionalAction, default=None,
                        help="Resolve on the convex hull of the support at each step")
    common.add_argument("--format", choices=("json", "table"), default="json")
    common.add_argument("--seed", type=int, default=None, help="Seed for randomized checks")
    common.add_argument("--log-level", default=None, help="Logging level for diagnostics on stderr")

    parser = IntresArgumentParser(prog="intres", description="Interval resolutions of poset modules")
    verbs = parser.add_subparsers(dest="verb", required=True)

    gen = verbs.add_parser("gen", parents=[common], help="Write a named poset family as JSON")
    gen.add_argument("--family", choices=FAMILY_KINDS, required=True)
    gen.add_argument("--n", type=int, default=None)
    gen.add_argument("--m", type=int, default=None)
    gen.add_argument("--l", type=int, default=None)
    gen.add_argument("--rows", type=int, default=None)
    gen.add_argument("--cols", type=int, default=None)
    gen.add_argument("--orientation", default="")

    for verb, help_text in (("intervals", "List all intervals of a poset"),
                            ("classify", "Decide zero interval global dimension from the Hasse diagram")):
        sub = verbs.add_parser(verb, parents=[common], help=help_text)
        sub.add_argument("input", nargs="?", default="-")

    for verb, help_text in (("resolve", "Interval resolution of a module"),
                            ("resdim", "Interval resolution dimension of a module")):
        sub = verbs.add_parser(verb, parents=[common], help=help_text)
        sub.add_argument("input", nargs="?", default="-")

    cover = verbs.add_parser("cover", parents=[common], help="Interval cover of a module")
    cover.add_argument("input", nargs="?", default="-")
    cover.add_argument("--method", choices=("minimal", "greedy", "brute"), default="minimal")

    gldim = verbs.add_parser("gldim", parents=[common], help="Global dimension of a poset")
    gldim.add_argument("input", nargs="?", default="-")
    kind = gldim.add_mutually_exclusive_group()
    kind.add_argument("--interval", action="store_true", help="Interval resolution global dimension (default)")
    kind.add_argument("--projective", action="store_true", help="Classical global dimension")

    strings = verbs.add_parser("strings", parents=[common], help="Strings of C(m, l)")
    strings.add_argument("--m", type=int, required=True)
    strings.add_argument("--l", type=int, required=True)

    for verb, target in (("restrict", "module"), ("conv", "poset")):
        sub = verbs.add_parser(verb, parents=[common], help=f"{verb} on a {target} along an element list")
        sub.add_argument("input", nargs="?", default="-")
        sub.add_argument("--elements", required=True, help="Comma-separated element labels")

    tau = verbs.add_parser("tau", parents=[common], help="Auslander-Reiten translate of an interval module")
    tau.add_argument("input", nargs="?", default="-")
    tau.add_argument("--interval", required=True, help="Comma-separated element labels")

    check = verbs.add_parser("check", parents=[common], help="Randomized property checks")
    check.add_argument("--samples", type=int, default=20)
    return parser


COMMANDS = {
    "gen": cmd_gen,
    "intervals": cmd_intervals,
    "cover": cmd_cover,
    "resolve": cmd_resolve,
    "resdim": cmd_resdim,
    "gldim": cmd_gldim,
    "classify": cmd_classify,
    "strings": cmd_strings,
    "restrict": cmd_restrict,
    "conv": cmd_conv,
    "tau": cmd_tau,
    "check": cmd_check,
}


def run(argv: List[str]) -> int:
    """
    Parses argv, dispatches the verb and maps errors to exit codes.

    Returns:
    - 0 on success, 1 for malformed input, 2 for validation failures,
      3 for internal invariant breaches.
    """
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_MALFORMED
    try:
        settings = load_settings().with_overrides(
            field=args.field, reduce_support=args.reduce_support, seed=args.seed, log_level=args.log_level,
        )
        if args.field is not None:
            field_class(args.field)
        configure_logging(settings.log_level)
        return COMMANDS[args.verb](args, settings)
    except InvariantError as e:
        sys.stderr.write(f"intres: internal error: {e}\n")
        return EXIT_INVARIANT
    except InputFormatError as e:
        sys.stderr.write(f"intres: malformed input: {e}\n")
        return EXIT_MALFORMED
    except IntresError as e:
        sys.stderr.write(f"intres: invalid input: {e}\n")
        return EXIT_INVALID
    except ValueError as e:
        sys.stderr.write(f"intres: malformed input: {e}\n")
        return EXIT_MALFORMED


def main() -> None:
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
