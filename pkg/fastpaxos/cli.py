"""
fastpaxos.cli
=============

Command line interface of the :code:`fastpaxos` package.

Commands:

    quorum    Derive the quorum configuration for N acceptors.
    rule      Apply a coordinator rule to a report file.
    simulate  Run a scenario, check its trace and optionally write it.
    replay    Re-run a trace file and check that it is reproduced exactly.
    sweep     Exhaustively compare the coordinator rules.
    campaign  Run the randomized safety campaign.

Exit codes are 0 on success, 1 if a checked property is violated and 2 on
usage or input errors. Human readable output goes to standard output,
:code:`--machine` switches it to YAML documents. Logs go to standard
error.
"""
import argparse
import logging
import sys

from fastpaxos import io as fio
from fastpaxos.checker import (check_all, latency_probe, rule_equivalence_sweep,
                               safety_campaign)
from fastpaxos.data import find_scenario
from fastpaxos.errors import (FastPaxosError, NoDecision, ReplayDivergence,
                              ScenarioError)
from fastpaxos.quorum import (QuorumConfig, RoundType, check_intersection,
                              derive_config, parse_policy)
from fastpaxos.rules import (ReportSet, check_report_count, get_rule,
                             pick_value_original, tally_votes)
from fastpaxos.simulation import Scenario, Simulation, Trace, replay

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2


def _emit(args, text, document):
    if args.machine:
        sys.stdout.write(fio.dump_document(document))
    else:
        print(text)

################################################################################
# quorum
################################################################################


def cmd_quorum(args):
    config = derive_config(args.n, args.policy)
    document = {"config": config.to_dict(), "policy": parse_policy(args.policy).name}
    text = "N={} {}".format(config.n_acceptors, config)
    if args.check:
        ok = check_intersection(config)
        document["intersection"] = ok
        text += "\nintersection: {}".format("ok" if ok else "VIOLATED")
        if not ok:
            _emit(args, text, document)
            return EXIT_VIOLATION
    _emit(args, text, document)
    return EXIT_OK

################################################################################
# rule
################################################################################


def _report_config(doc, args):
    c = dict(doc.get("config") or {})
    n = args.n if args.n is not None else c.get("n")
    if n is None:
        raise ScenarioError("The report file names no number of acceptors "
                            "and --n is not given.")
    try:
        n = int(n)
        if args.policy is not None:
            return derive_config(n, args.policy)
        if "e" in c and "f" in c:
            return QuorumConfig(n, int(c["f"]), int(c["e"]))
    except (TypeError, ValueError) as e:
        if isinstance(e, FastPaxosError):
            raise
        raise ScenarioError("Malformed configuration in report file: {}"
                            .format(e))
    return derive_config(n, c.get("policy", "max-e"))


def load_report_file(path, args):
    """
    Read a report file.

    Returns:

        The tuple :code:`(reports, config, k_round_type, universe)`.
    """
    doc = fio.load_document(path, "report file")
    config = _report_config(doc, args)
    k_type = args.k_type or doc.get("k_round_type", "fast")
    try:
        reports = ReportSet((str(r["acceptor"]),
                             int(r.get("round", 0)),
                             None if r.get("value") is None else str(r["value"]))
                            for r in doc.get("reports") or [])
    except (KeyError, TypeError, AttributeError, ValueError) as e:
        if isinstance(e, FastPaxosError):
            raise
        raise ScenarioError("Malformed report in {}: {}".format(path, e))
    universe = doc.get("universe")
    if universe is not None:
        universe = [str(a) for a in universe]
    return reports, config, RoundType.parse(k_type), universe


def cmd_rule(args):
    reports, config, k_type, universe = load_report_file(args.reports, args)
    check_report_count(reports, config)
    rule = get_rule(args.rule)
    if universe is not None and args.rule == "original-oracle":
        choice = pick_value_original(reports, config, k_type, "oracle", universe)
    else:
        choice = rule.choose(reports, config, k_type)
    tally = tally_votes(reports)
    document = {"rule": rule.name,
                "config": config.to_dict(),
                "k": tally.max_round,
                "k_round_type": str(k_type),
                "tally": {str(v): c for v, c in tally.value_counts.items()},
                "choice": "free" if choice.is_free else "mandated"}
    if not choice.is_free:
        document["value"] = choice.value
    _emit(args, str(choice), document)
    return EXIT_OK

################################################################################
# simulate
################################################################################


def _seed_range(text):
    try:
        a, b = [int(s) for s in text.split("-")]
    except ValueError:
        raise argparse.ArgumentTypeError("Seed range must be given as A-B, got "
                                         "'{}'.".format(text))
    if b < a:
        raise argparse.ArgumentTypeError("Empty seed range '{}'.".format(text))
    return range(a, b + 1)


def _print_verdicts(args, title, verdicts, extra=None):
    document = {"scenario": title,
                "verdicts": [v.to_dict() for v in verdicts]}
    document.update(extra or {})
    lines = ["{}:".format(title)] + ["  {}".format(v) for v in verdicts]
    for k, v in (extra or {}).items():
        lines.append("  {}: {}".format(k, v))
    _emit(args, "\n".join(lines), document)
    return document


def cmd_simulate(args):
    scenario = Scenario.read(find_scenario(args.scenario))
    simulation = Simulation(scenario)

    if args.seeds is not None:
        if args.output:
            simulation.initialize_output_file(args.output)
        results = simulation.run_seeds(args.seeds, workers=args.workers)
        failed = [r for r in results if not r.passed]
        summary = {"runs": len(results),
                   "failed_seeds": [r.seed for r in failed],
                   "decided": sum(r.latency is not None for r in results)}
        verdicts = [v for r in failed[:1] for v in r.failures]
        _print_verdicts(args, scenario.name, verdicts, summary)
        return EXIT_VIOLATION if failed else EXIT_OK

    trace = simulation.run(seed=args.seed, until=args.until)
    verdicts = check_all(trace)
    extra = {"events": len(trace), "truncated": trace.truncated}
    try:
        extra["latency"] = latency_probe(trace)
        extra["learned"] = trace.learns()[0][1]["learned"]
    except NoDecision:
        extra["decision"] = "none"
    if args.trace:
        trace.write(args.trace)
        extra["trace"] = args.trace
    document = _print_verdicts(args, scenario.name, verdicts, extra)
    if args.verdicts:
        fio.dump_document(document, args.verdicts)
    if not all(v.passed for v in verdicts):
        if args.trace:
            logger.warning("Witness trace written to %s.", args.trace)
        return EXIT_VIOLATION
    return EXIT_OK


def cmd_replay(args):
    trace = Trace.read(args.trace)
    try:
        replay(trace)
    except ReplayDivergence as e:
        _emit(args, "replay diverges at position {}".format(e.position),
              {"reproduced": False, "position": e.position})
        return EXIT_VIOLATION
    _emit(args, "replay reproduces {} records".format(len(trace)),
          {"reproduced": True, "records": len(trace)})
    return EXIT_OK

################################################################################
# sweep and campaign
################################################################################


def cmd_sweep(args):
    try:
        verdict = rule_equivalence_sweep(args.n_max, workers=args.workers)
    except ValueError as e:
        raise ScenarioError(str(e))
    text = "{} ({} cases, simplified more restrictive in {})".format(
        verdict, verdict.cases, verdict.stats["more_restrictive"])
    _emit(args, text, {"verdict": verdict.to_dict()})
    return EXIT_OK if verdict.passed else EXIT_VIOLATION


def cmd_campaign(args):
    callback = None
    if args.output:
        from fastpaxos.checker import PROPERTIES
        output = fio.OutputFile(args.output, PROPERTIES)
        callback = output.store_results
    verdict = safety_campaign(args.runs, args.first_seed, workers=args.workers,
                              callback=callback)
    _emit(args, "{} ({} runs, {} decided)".format(verdict, verdict.cases,
                                                   verdict.stats["decided"]),
          {"verdict": verdict.to_dict()})
    return EXIT_OK if verdict.passed else EXIT_VIOLATION

################################################################################
# Entry point
################################################################################


def build_parser():
    parser = argparse.ArgumentParser(
        prog="fastpaxos",
        description="Fast Paxos quorums, coordinator rules and simulations.")
    parser.add_argument("-v", "--verbose", action="count", default=0,
                        help="increase log verbosity (-v info, -vv debug)")
    parser.add_argument("--machine", action="store_true",
                        help="print YAML documents instead of text")
    commands = parser.add_subparsers(dest="command", required=True)

    p = commands.add_parser("quorum", help="derive a quorum configuration")
    p.add_argument("--n", type=int, required=True, help="number of acceptors")
    p.add_argument("--policy", default="max-e", help="max-e, max-f or E,F")
    p.add_argument("--check", action="store_true",
                   help="exhaustively check the intersection requirements")
    p.set_defaults(func=cmd_quorum)

    p = commands.add_parser("rule", help="apply a coordinator rule to a report file")
    p.add_argument("reports", help="report file")
    p.add_argument("--rule", default="simplified",
                   choices=["original", "original-oracle", "intermediate",
                            "unchecked", "simplified"])
    p.add_argument("--n", type=int, default=None, help="override N")
    p.add_argument("--policy", default=None, help="override the quorum policy")
    p.add_argument("--k-type", choices=["fast", "classic"], default=None,
                   help="type of the highest reported round")
    p.set_defaults(func=cmd_rule)

    p = commands.add_parser("simulate", help="run and check a scenario")
    p.add_argument("scenario", help="scenario file or bundled scenario name")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--seeds", type=_seed_range, default=None,
                   help="run the seed range A-B")
    p.add_argument("--until", type=int, default=None, help="virtual time bound")
    p.add_argument("--trace", default=None, help="write the trace to this file")
    p.add_argument("--verdicts", default=None,
                   help="write the verdicts to this file")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output", default=None,
                   help="NetCDF file for the results of a seed range")
    p.set_defaults(func=cmd_simulate)

    p = commands.add_parser("replay", help="check that a trace is reproduced")
    p.add_argument("trace", help="trace file")
    p.set_defaults(func=cmd_replay)

    p = commands.add_parser("sweep", help="compare the coordinator rules")
    p.add_argument("--n-max", type=int, default=4)
    p.add_argument("--workers", type=int, default=None)
    p.set_defaults(func=cmd_sweep)

    p = commands.add_parser("campaign", help="randomized safety campaign")
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--first-seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--output", default=None, help="NetCDF result file")
    p.set_defaults(func=cmd_campaign)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    level = {0: logging.WARNING, 1: logging.INFO}.get(args.verbose, logging.DEBUG)
    logging.basicConfig(level=level, stream=sys.stderr, force=True,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (FastPaxosError, OSError) as e:
        logger.error("%s", e)
        print("error: {}".format(e), file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
