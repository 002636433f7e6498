import argparse
import sys
import time
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional

import networkx as nx

from monokit import (
    CompatibilityError, ExitStatus, MonokitError, Verdict, get_logger, set_log_level,
)
from monokit.backend.groupoid import validate_groupoid
from monokit.backend.local_triviality import (
    CLTViolation, check_w_open, clt_on_monodromy, generate_groupoid_topology, validate_clt,
)
from monokit.backend.monodromy import (
    build_monodromy, canonical_morphism, free_rank, globalize, pi1_graph, star_covering_report,
)
from monokit.backend.topology import check_topological_groupoid
from monokit.frontend import constants
from monokit.frontend.documents import (
    InstanceDocument, build_graph, build_groupoid, build_presentation, build_subgroupoid,
    build_subset, build_target, build_topology, build_trivialization, fingerprint, load_document,
)
from monokit.frontend.dot_export import export_dot
from monokit.frontend.reports import Report
from monokit.frontend.utils import atomic_write

logger = get_logger(__name__)

MAX_LISTED_VIOLATIONS = 20

# =============================================================================
#  Commands
# =============================================================================

class CommandType(str, Enum):
    VALIDATE = "validate"
    MONODROMY = "monodromy"
    PI1 = "pi1"
    STAR_COVER = "star-cover"
    GLOBALIZE = "globalize"
    TOPOLOGY_CHECK = "topology-check"
    CLT_GENERATE = "clt-generate"
    W_OPEN = "w-open"
    DOT = "dot"


@dataclass
class Command:
    command_type: CommandType
    input: str
    budget: int = constants.DEFAULT_BUDGET
    depth: int = constants.DEFAULT_DEPTH
    window: int = constants.DEFAULT_WINDOW
    fmt: str = constants.DEFAULT_FORMAT
    out: Optional[str] = None
    verbose: bool = False


class UsageError(MonokitError):
    pass


class MonokitArgumentParser(argparse.ArgumentParser):
    """argparse that raises instead of exiting, so usage errors map to exit 3."""

    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got '{text}'") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = MonokitArgumentParser(add_help=False)
    common.add_argument("input", help="JSON instance document")
    common.add_argument("--budget", type=_positive_int, default=constants.DEFAULT_BUDGET,
                        help="coset-table row budget per vertex group")
    common.add_argument("--depth", type=_positive_int, default=constants.DEFAULT_DEPTH,
                        help="BFS depth for star windows")
    common.add_argument("--window", type=_positive_int, default=constants.DEFAULT_WINDOW,
                        help="normal-form window for infinite monodromy groupoids")
    common.add_argument("--format", dest="fmt", choices=constants.REPORT_FORMATS,
                        default=constants.DEFAULT_FORMAT)
    common.add_argument("--out", default=None, help="write the output here instead of stdout")
    common.add_argument("--verbose", action="store_true", help="debug logging on stderr")

    parser = MonokitArgumentParser(
        prog="monokit",
        description="Finite groupoids, monodromy groupoids and locally trivial topologies.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=MonokitArgumentParser)
    for ct in CommandType:
        sub.add_parser(ct.value, parents=[common])
    return parser


def parse_command(argv: Optional[List[str]] = None) -> Command:
    args = build_parser().parse_args(argv)
    return Command(
        command_type=CommandType(args.command),
        input=args.input,
        budget=args.budget,
        depth=args.depth,
        window=args.window,
        fmt=args.fmt,
        out=args.out,
        verbose=args.verbose,
    )

# =============================================================================
#  Runner
# =============================================================================

class CommandRunner:
    """Runs one command against one instance document and fills a Report."""

    def __init__(self):
        self.logger = get_logger(self.__class__.__name__)
        self.handlers: Dict[CommandType, Callable[[InstanceDocument, Command, Report], None]] = {
            CommandType.VALIDATE: self.validate,
            CommandType.MONODROMY: self.monodromy,
            CommandType.PI1: self.pi1,
            CommandType.STAR_COVER: self.star_cover,
            CommandType.GLOBALIZE: self.globalize,
            CommandType.TOPOLOGY_CHECK: self.topology_check,
            CommandType.CLT_GENERATE: self.clt_generate,
            CommandType.W_OPEN: self.w_open,
        }

    def handle_command(self, command: Command) -> Report:
        self.logger.debug(f"Handling command: {command}")
        doc = load_document(command.input)
        report = Report(command.command_type.value, fingerprint(doc), {})
        start = time.perf_counter()
        self.handlers[command.command_type](doc, command, report)
        report.timing = time.perf_counter() - start
        self.logger.info(f"{command.command_type.value}: {report.status.name.lower()} "
                         f"in {report.timing:.3f}s")
        return report

    def export(self, command: Command) -> str:
        doc = load_document(command.input)
        if doc.presentation is not None:
            return export_dot(build_presentation(doc))
        G = _valid_groupoid(doc)
        if doc.generators is not None:
            return export_dot(build_monodromy(G, build_subset(doc, G), command.budget))
        return export_dot(G)

    # -------------------------------------------------------------------------
    def validate(self, doc: InstanceDocument, command: Command, report: Report):
        G = build_groupoid(doc)
        result = validate_groupoid(G)
        report.details["objects"] = len(G.objects)
        report.details["morphisms"] = len(G)
        report.add("groupoid axioms", Verdict.PASSED if result.ok else Verdict.REFUTED,
                   _violations(result) or None)

    def monodromy(self, doc: InstanceDocument, command: Command, report: Report):
        report.parameters["budget"] = command.budget
        G = _valid_groupoid(doc)
        W = build_subset(doc, G)
        M = build_monodromy(G, W, command.budget)
        report.details["W generates G"] = W.generates()
        report.details["relators"] = len(M.presentation.relators)
        _vertex_groups(M, report)
        try:
            canonical_morphism(M)
            report.add("canonical morphism", Verdict.PASSED)
        except MonokitError as e:
            report.add("canonical morphism", Verdict.REFUTED, str(e))

    def pi1(self, doc: InstanceDocument, command: Command, report: Report):
        report.parameters["budget"] = command.budget
        X = build_graph(doc)
        _, _, M = pi1_graph(X, command.budget)
        _vertex_groups(M, report)
        expected = X.number_of_edges() - X.number_of_nodes() + nx.number_connected_components(X)
        ranks = [free_rank(M, comp.base) for comp in M.forest.components]
        report.details["expected rank"] = expected
        if any(r is None for r in ranks):
            report.add("rank law", Verdict.UNDECIDED)
            report.undecided.append(f"vertex group not free within budget {command.budget}")
        else:
            verdict = Verdict.PASSED if sum(ranks) == expected else Verdict.REFUTED
            report.add("rank law", verdict, None if verdict == Verdict.PASSED else ranks)

    def star_cover(self, doc: InstanceDocument, command: Command, report: Report):
        report.parameters.update(budget=command.budget, depth=command.depth)
        G = _valid_groupoid(doc)
        M = build_monodromy(G, build_subset(doc, G), command.budget)
        x = doc.object if doc.object is not None else G.objects[0]
        if x not in G.objects:
            raise UsageError(f"object: '{x}' is not an object of the groupoid")
        star = star_covering_report(M, canonical_morphism(M), x, command.depth)
        report.details.update({
            "object": x,
            "star size": star.star_size,
            "window size": star.window_size,
            "window closed": star.closed,
            "fibers": dict(star.fibers),
            "fibers exact": star.fibers_exact,
            "universal": star.universal,
        })
        if star.uniform_fiber_bound is not None:
            report.details["uniform fiber bound"] = star.uniform_fiber_bound
        w = star.witnesses
        report.add("surjective", star.surjective, w.get("unreached"))
        report.add("equinumerous fibers", star.equinumerous,
                   w.get("fibers", w.get("translate_failure")))
        report.add("local injectivity", star.local_injectivity,
                   w.get("local_injectivity", w.get("p_inconsistent")))
        report.add("inclusion injective", star.inclusion_injective,
                   w.get("inclusion_collision", w.get("inclusion_not_separated")))
        report.undecided.extend(star.undecided)

    def globalize(self, doc: InstanceDocument, command: Command, report: Report):
        report.parameters.update(budget=command.budget, depth=command.depth)
        G = _valid_groupoid(doc)
        M = build_monodromy(G, build_subset(doc, G), command.budget)
        H, f = build_target(doc)
        result = globalize(M, f, H)
        if not result.ok:
            a, b = result.obstruction
            report.add("globalization", Verdict.REFUTED, {"a": a, "b": b, "ab": G.compose(a, b)})
            return
        report.add("globalization", Verdict.PASSED)
        bad = []
        for x in G.objects:
            bad.extend(result.morphism.check_window(x, command.depth))
        report.add("window consistency", Verdict.PASSED if not bad else Verdict.REFUTED,
                   [str(e) for e, _, _ in bad[:5]] or None)
        if not M.certified:
            report.undecided.append(f"vertex group undecided within budget {command.budget}")

    def topology_check(self, doc: InstanceDocument, command: Command, report: Report):
        G = _valid_groupoid(doc)
        if doc.morphism_topology is None or doc.object_topology is None:
            raise UsageError("topology-check needs 'morphism_topology' and 'object_topology'")
        T_G = build_topology(doc.morphism_topology, "morphism_topology")
        T_X = build_topology(doc.object_topology, "object_topology")
        result = check_topological_groupoid(G, T_G, T_X)
        _certificates(result, report)

    def clt_generate(self, doc: InstanceDocument, command: Command, report: Report):
        G = _valid_groupoid(doc)
        LT = build_trivialization(doc)
        validation = validate_clt(G, LT)
        comp = validation.of_kind(CLTViolation.COMP)
        if comp:
            report.add("compatibility", Verdict.REFUTED, comp[0].witness)
            return
        report.add("compatibility", Verdict.PASSED)
        if not validation.ok:
            report.add("local trivialization", Verdict.REFUTED, _violations(validation))
            return
        report.add("local trivialization", Verdict.PASSED)
        try:
            topology, generation = generate_groupoid_topology(G, LT)
        except CompatibilityError as e:
            report.add("compatibility", Verdict.REFUTED, e.witness)
            return
        report.details["basic neighbourhoods"] = generation.neighborhoods
        report.details["least neighbourhoods"] = {
            a: sorted(topology.neighborhood(a)) for a in G.morphism_ids
        }
        report.add("base", Verdict.PASSED if generation.is_base else Verdict.REFUTED,
                   generation.base_witness)
        failures = generation.refinement_failures
        report.add("refinement law", Verdict.PASSED if not failures else Verdict.REFUTED,
                   [(f.center, f.first, f.second) for f in failures[:5]] or None)
        _certificates(generation.groupoid, report)
        if doc.generators is not None:
            report.parameters.update(budget=command.budget, window=command.window)
            W = build_subset(doc, G)
            M = build_monodromy(G, W, command.budget)
            transported = clt_on_monodromy(G, W, M, LT, command.window)
            report.add("monodromy trivialization",
                       Verdict.PASSED if transported.validation.ok else Verdict.REFUTED,
                       _violations(transported.validation) or None)
            report.add("inclusion open", transported.inclusion_open.verdict,
                       transported.inclusion_open.witness)
            if transported.windowed:
                report.undecided.append(f"monodromy topology windowed at window {command.window}")

    def w_open(self, doc: InstanceDocument, command: Command, report: Report):
        G = _valid_groupoid(doc)
        LT = build_trivialization(doc)
        W = build_subgroupoid(doc, G)
        result = check_w_open(G, LT, W)
        report.add("subgroupoid open", result.verdict, result.witness)

# =============================================================================
#  Report helpers
# =============================================================================

def _valid_groupoid(doc: InstanceDocument):
    G = build_groupoid(doc)
    result = validate_groupoid(G)
    if not result.ok:
        v = result.violations[0]
        raise UsageError(f"groupoid: not a groupoid ({v.kind.value} at {v.witness}); run validate")
    return G


def _violations(result) -> list:
    return [{"kind": v.kind, "witness": v.witness, "detail": v.detail}
            for v in result.violations[:MAX_LISTED_VIOLATIONS]]


def _vertex_groups(M, report: Report):
    components = M.forest.components
    for comp in components:
        engine = M.engine_at(comp.base)
        key = "vertex group" if len(components) == 1 else f"vertex group at {comp.base}"
        report.details[key] = engine.describe()
        report.add(f"word problem at {comp.base}",
                   Verdict.PASSED if engine.certified else Verdict.UNDECIDED)
        if not engine.certified:
            report.undecided.append(f"coset enumeration at '{comp.base}' exhausted budget {M.budget}")


def _certificates(result, report: Report):
    for name, cert in result.certificates.items():
        witness = None
        if not cert.continuous:
            witness = {"open": cert.witness, "point": cert.witness_point}
        report.add(f"{name} continuous", cert.verdict, witness)
    report.details["difference equivalence"] = result.difference_equivalence
    report.details["translations homeomorphic"] = result.translations_homeomorphic
    if not result.difference_equivalence:
        report.add("difference equivalence", Verdict.REFUTED)

# =============================================================================
#  Entry point
# =============================================================================

def _emit(text: str, out: Optional[str]):
    if out is None:
        sys.stdout.write(text)
    else:
        atomic_write(out, text)


def main(argv: Optional[List[str]] = None) -> int:
    try:
        command = parse_command(argv)
    except MonokitError as e:
        print(f"monokit: error: {e}", file=sys.stderr)
        return int(ExitStatus.USAGE_ERROR)
    if command.verbose:
        set_log_level("DEBUG")

    runner = CommandRunner()
    try:
        if command.command_type == CommandType.DOT:
            _emit(runner.export(command), command.out)
            return int(ExitStatus.PASSED)
        report = runner.handle_command(command)
    except MonokitError as e:
        print(f"monokit: error: {e}", file=sys.stderr)
        return int(ExitStatus.USAGE_ERROR)
    _emit(report.render(command.fmt), command.out)
    return int(report.status)


if __name__ == "__main__":
    sys.exit(main())
