"""Command-line entry point: synth, run, check."""
from __future__ import annotations

import argparse
import logging
import sys
import time
from dataclasses import dataclass, field

from .checking import DefaultsController, check_controller
from .comanche import comanche_main, delayable_node, load_config, twotasks_node
from .comanche.model import ComancheModel
from .dsl import parse_program
from .errors import (ConfigError, DslError, NonFiniteDomain, ReactiveError, StateBudgetExceeded,
                     Unsynthesizable, ValidationError)
from .manager import manager_reset
from .sim import Scenario, Trace, format_bit, load_scenario, sim_new, sim_run
from .synchro.interp import node_reset, node_step
from .synth import build_arena, make_controller, stats_text, synthesize
from .synth.arena import DEFAULT_WORK_BUDGET

log = logging.getLogger("reactive_dcs")

REGISTRY = ("delayable", "twotasks", "comanche-sync", "comanche-async")

EXIT_OK, EXIT_VIOLATION, EXIT_INPUT, EXIT_UNSYNTH, EXIT_BUDGET = 0, 1, 2, 3, 4


@dataclass
class RunReport:
    model: str
    synthesizable: bool = False
    states: int = 0
    winning: int = 0
    iterations: int = 0
    scenario: str | None = None
    trace: str | None = None
    violations: list = field(default_factory=list)
    wall_time: float = 0.0

    def lines(self):
        out = [f"model: {self.model}", f"states: {self.states}", f"winning: {self.winning}",
               f"synthesizable: {'true' if self.synthesizable else 'false'}", f"iterations: {self.iterations}"]
        if self.scenario:
            out.append(f"scenario: {self.scenario}")
        if self.trace:
            out.append(f"trace: {self.trace}")
        out.append(f"violations: {len(self.violations)}")
        out.extend(f"  {v}" for v in self.violations)
        out.append(f"wall_time: {self.wall_time:.2f}s")
        return out


def resolve_model(ref, config_path=None):
    """Registry name or .syn file -> node or ComancheModel."""
    if ref == "delayable":
        return delayable_node()
    if ref == "twotasks":
        return twotasks_node()
    if ref in ("comanche-sync", "comanche-async"):
        return comanche_main(load_config(config_path), async_mode=ref.endswith("async"))
    if ref.endswith(".syn"):
        try:
            with open(ref, encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ConfigError(f"cannot read {ref}: {exc}") from None
        unit = parse_program(text)
        for d in unit.diagnostics:
            log.warning("%s: %s", ref, d)
        return unit.main
    raise ConfigError(f"unknown model {ref!r}; expected one of {', '.join(REGISTRY)} or a .syn file")


def node_of(model):
    return model.node if isinstance(model, ComancheModel) else model


def synthesize_model(model, budget=DEFAULT_WORK_BUDGET, report=None):
    arena = build_arena(node_of(model), work_budget=budget)
    winning = synthesize(arena, strict=False)
    if report is not None:
        report.states, report.winning = arena.n_states, winning.size
        report.synthesizable, report.iterations = winning.synthesizable, winning.iterations
    return arena, winning


def _raise_unsynth(winning):
    raise Unsynthesizable("the contract cannot be enforced", winning.witness)


def cmd_synth(args):
    model = resolve_model(args.model, args.config)
    report = RunReport(args.model)
    t0 = time.perf_counter()
    arena, winning = synthesize_model(model, args.budget, report)
    report.wall_time = time.perf_counter() - t0
    print("\n".join(report.lines()))
    if args.stats:
        with open(args.stats, "w", encoding="utf-8") as fh:
            fh.write(f"model: {args.model}\n" + stats_text(arena, winning))
    if not winning.synthesizable:
        _raise_unsynth(winning)
    return EXIT_OK


def _generic_run(node, controller, scenario):
    """Step a plain node once per tick with scenario-injected inputs."""
    values = {d.name: False for d in node.inputs}
    known = set(values)
    state = node_reset(node)
    rows = []
    for t in range(1, scenario.horizon + 1):
        for tick, name, value in scenario.injections:
            if tick == t:
                if name not in known:
                    raise ConfigError(f"scenario event {name!r} is not an input of {node.name}")
                values[name] = value
        ctl = controller.select(state, values) if node.contract is not None else {}
        outputs, state = node_step(node, state, {**values, **ctl})
        row = {"step": str(t)}
        row.update({n: format_bit(values[n]) for n in node.input_names})
        row.update({n: format_bit(ctl[n]) for n in node.controllable_names})
        row.update({n: format_bit(outputs[n]) for n in node.output_names})
        rows.append(row)
    return Trace(list(rows[0].keys()) if rows else ["step"], rows)


def cmd_run(args):
    model = resolve_model(args.model, args.config)
    node = node_of(model)
    report = RunReport(args.model, scenario=args.scenario, trace=args.trace)
    t0 = time.perf_counter()
    arena, winning = synthesize_model(model, args.budget, report)
    if not winning.synthesizable:
        _raise_unsynth(winning)
    controller = make_controller(arena, winning)
    scenario = load_scenario(args.scenario) if args.scenario else Scenario()
    if args.steps:
        scenario.horizon = args.steps
    if isinstance(model, ComancheModel):
        manager = manager_reset(model, controller)
        for _, name, _ in scenario.injections:
            if name not in manager.buffer.values:
                raise ConfigError(f"scenario event {name!r} is not an input of {node.name}")
        sim = sim_new(model, manager, scenario, seed=args.seed)
        trace = sim_run(sim)
    else:
        trace = _generic_run(node, controller, scenario)
    text = trace.to_tsv()
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if args.figure:
        from .plotting import plot_trace

        outs = [n for n in node.output_names]
        plot_trace(trace, args.figure, node.input_names, outs, title=args.model)
    report.wall_time = time.perf_counter() - t0
    print("\n".join(report.lines()), file=sys.stderr if not args.trace else sys.stdout)
    return EXIT_OK


def cmd_check(args):
    model = resolve_model(args.model, args.config)
    node = node_of(model)
    report = RunReport(args.model)
    t0 = time.perf_counter()
    arena, winning = synthesize_model(model, args.budget, report)
    if not winning.synthesizable:
        _raise_unsynth(winning)
    controller = make_controller(arena, winning)
    if args.truncate and node.contract is not None:
        controller = DefaultsController(node)
    result = check_controller(model, controller, args.runs, args.steps, args.seed)
    report.violations = result.violations
    report.wall_time = time.perf_counter() - t0
    print(f"runs: {args.runs} x {args.steps} steps")
    print("\n".join(report.lines()))
    return EXIT_OK if result.ok else EXIT_VIOLATION


def build_parser():
    p = argparse.ArgumentParser(prog="reactive-dcs", description="Controller synthesis for reconfigurable components")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("model", help=f"one of {', '.join(REGISTRY)} or a .syn file")
        sp.add_argument("--config", help="platform/topology configuration (INI)")
        sp.add_argument("--budget", type=int, default=DEFAULT_WORK_BUDGET, help="arena work budget")

    s = sub.add_parser("synth", help="synthesize a controller and print statistics")
    common(s)
    s.add_argument("--stats", help="write controller statistics to this file")
    s.set_defaults(func=cmd_synth)

    r = sub.add_parser("run", help="run a scenario in closed loop and write the trace")
    common(r)
    r.add_argument("--scenario")
    r.add_argument("--trace", help="TSV output path (stdout when omitted)")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--steps", type=int, default=0, help="override the scenario horizon")
    r.add_argument("--figure", help="also render a timing diagram (PNG)")
    r.set_defaults(func=cmd_run)

    c = sub.add_parser("check", help="fuzz the controller with random uncontrollable inputs")
    common(c)
    c.add_argument("--runs", type=int, default=100)
    c.add_argument("--steps", type=int, default=200)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--truncate", action="store_true",
                   help="negative control: replace the controller by its default valuation")
    c.set_defaults(func=cmd_check)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except Unsynthesizable as exc:
        print(f"unsynthesizable: {exc}", file=sys.stderr)
        print(f"witness ({len(exc.witness)} steps):", file=sys.stderr)
        for i, u in enumerate(exc.witness, 1):
            ones = [k for k, v in u.items() if v is True] or ["(all false)"]
            print(f"  {i}: {' '.join(ones)}", file=sys.stderr)
        return EXIT_UNSYNTH
    except StateBudgetExceeded as exc:
        print(f"budget exceeded: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except (DslError, ConfigError, ValidationError, NonFiniteDomain) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ReactiveError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
