"""The ``radial-restore`` command line

Each subcommand is one stage of the pipeline. Stages hand networks to each
other as network documents and write their results as JSON and CSV
artifacts that carry the run's config echo.
"""
# Copyright (c) Radial Restore Development Team.
# Distributed under the terms of the Modified BSD License.
import json
import sys
import typing as t

from jupyter_core.application import base_aliases
from jupyter_core.application import base_flags
from jupyter_core.application import JupyterApp
from traitlets import default
from traitlets import Dict
from traitlets import Instance
from traitlets import TraitError
from traitlets import Unicode
from traitlets.config.application import Application

from . import jsonutil
from ._version import __version__
from .errors import NotATree
from .errors import ParseError
from .errors import RestoreError
from .gen import gen_greedy_gap_example
from .gen import gen_integrality_gap
from .gen import gen_mssc_non_mrt_fixture
from .gen import gen_sample_network
from .gen import gen_tap_reduction
from .gen import gen_wheel
from .gen import GapFamilyParams
from .kernelspec import KernelSpec
from .localsearch import BranchExchangeSearch
from .localsearch import instance_for
from .localsearch import TRACE_COLUMNS
from .lp import build_mssc_lp
from .lp import SimplexSolver
from .lp import write_lp_file
from .mssc import MsscInstance
from .mssc import pad_to_uniform
from .mssc import read_hypergraph
from .mssc import write_hypergraph
from .netfile import read_network_file
from .netfile import write_network_file
from .netgraph import build_tree_config
from .netgraph import compute_coverage
from .netgraph import evaluate_metrics
from .netgraph import Network
from .netgraph import per_vertex_outage
from .netgraph import TreeConfig
from .prep import candidate_switches
from .prep import contract_tree
from .prep import greedy_add_switches
from .prep import ingest_csv
from .runconfig import RunConfig
from .solvers import AlphaPointSolver
from .solvers import ExactSolver
from .solvers import GreedySolver
from .solvers import OrderingSolverFactory
from .utils import natural_sorted
from .utils import write_csv

# exit status for bad arguments, unknown subcommands and bad configuration
USAGE_ERROR = 2

GEN_FAMILIES = ("wheel", "greedy-gap", "integrality-gap", "tap", "non-realizable", "sample")

REPORT_COLUMNS = ["vertex", "voltage_class", "demand_kw", "expected_outage"]
CURVE_COLUMNS = ["step", "switch", "covered_fraction", "score"]

stage_aliases = {
    "network": "RunConfig.network",
    "buses": "RunConfig.buses",
    "lines": "RunConfig.lines",
    "hypergraph": "RunConfig.hypergraph",
    "solution": "RunConfig.solution",
    "output-dir": "RunConfig.output_dir",
    "threshold-kw": "RunConfig.threshold_kw",
    "max-length-m": "RunConfig.max_length_m",
    "max-switches": "RunConfig.max_switches",
    "coverage-target": "RunConfig.coverage_target",
    "candidate-cap": "RunConfig.candidate_cap",
    "solver": "RunConfig.solver",
    "metric": "RunConfig.metric",
    "kernel-c": "RunConfig.kernel_c",
    "kernel-kind": "RunConfig.kernel_kind",
    "samples": "RunConfig.samples",
    "seed": "RunConfig.seed",
    "max-steps": "RunConfig.max_steps",
    "objective": "RunConfig.objective",
    "uncovered-mode": "RunConfig.uncovered_mode",
    "wheel-size": "RunConfig.wheel_size",
    "gap-c": "RunConfig.gap_c",
    "gap-n": "RunConfig.gap_n",
    "gap-k": "RunConfig.gap_k",
    "gap-epsilon": "RunConfig.gap_epsilon",
}
stage_aliases.update(base_aliases)

stage_flags = {
    "no-cross-term": (
        {"RunConfig": {"cross_term": False}},
        "Order by covered-weight product without the dA*dB term.",
    ),
    "pre-update-weight": (
        {"RunConfig": {"pre_update_weight": True}},
        "Scale contracted leaf weights by the parent's demand before the merge.",
    ),
    "dump-lp": (
        {"RunConfig": {"dump_lp": True}},
        "Write the LP relaxation as model.lp next to the solution.",
    ),
}
stage_flags.update(base_flags)


class UsageErrorMixin:
    """Report configuration and argument errors met while initializing as usage errors."""

    _initializing = False

    def initialize(self, argv=None):
        self._initializing = True
        try:
            super().initialize(argv)  # type: ignore
        finally:
            self._initializing = False

    def exit(self, exit_status=0):
        if self._initializing and exit_status == 1:
            exit_status = USAGE_ERROR
        super().exit(exit_status)  # type: ignore


class RestoreStage(UsageErrorMixin, JupyterApp):
    """Shared plumbing of the pipeline stages."""

    version = __version__
    classes = [
        RunConfig,
        OrderingSolverFactory,
        GreedySolver,
        ExactSolver,
        AlphaPointSolver,
        BranchExchangeSearch,
        SimplexSolver,
    ]
    aliases = stage_aliases
    flags = stage_flags

    stage = Unicode("")
    run_config = Instance(RunConfig)

    @default("run_config")
    def _run_config_default(self):
        return RunConfig(parent=self)

    @default("config_file_name")
    def _config_file_name_default(self):
        return "radial_restore_config"

    def start(self):
        if self.generate_config:
            self.write_default_config()
            return
        try:
            self.run()
        except RestoreError as e:
            print(json.dumps(jsonutil.json_clean(e.to_dict()), sort_keys=True), file=sys.stderr)
            self.exit(1)
        except TraitError as e:
            self.usage_error("Bad configuration: %s" % e)

    def run(self) -> None:
        raise NotImplementedError

    def usage_error(self, message: str) -> None:
        print(message, file=sys.stderr)
        self.exit(USAGE_ERROR)

    # --- inputs ------------------------------------------------------------------------------

    def load_network(self) -> Network:
        rc = self.run_config
        if rc.network:
            net, _ = read_network_file(rc.network)
            return net
        if rc.buses and rc.lines:
            return ingest_csv(rc.buses, rc.lines)
        self.usage_error("A network is required: give --network, or --buses and --lines")
        raise AssertionError("unreachable")

    def load_tree(self, net: Network) -> TreeConfig:
        if net.default_tree is None:
            raise NotATree("The network document has no active tree")
        return build_tree_config(net, net.default_tree)

    def mssc_instance(self, net: Network, tree: TreeConfig) -> MsscInstance:
        return instance_for(net, tree, self.run_config.metric)

    def create_solver(self):
        rc = self.run_config
        factory = OrderingSolverFactory.instance(parent=self)
        return factory.create_solver_instance(
            rc.solver or None,
            parent=self,
            seed=rc.seed,
            samples=rc.samples,
            kernel_c=rc.kernel_c,
            kernel_kind=rc.kernel_kind,
        )

    # --- artifacts ---------------------------------------------------------------------------

    def config_echo(self) -> t.Dict[str, t.Any]:
        return dict(subcommand=self.stage, run=self.run_config.to_dict())

    def _header(self) -> str:
        echo = json.dumps(jsonutil.json_clean(self.config_echo()), sort_keys=True)
        return "radial_restore %s config: %s" % (__version__, echo)

    def write_json(self, filename: str, payload: t.Mapping[str, t.Any]) -> str:
        doc = dict(payload)
        doc["config"] = self.config_echo()
        doc["version"] = __version__
        path = self.run_config.output_path(filename)
        with open(path, "w", encoding="utf-8") as f:
            f.write(jsonutil.dumps(doc))
        self.log.info("Wrote %s", path)
        return path

    def write_table(self, filename: str, rows: t.Iterable[dict], columns: t.List[str]) -> str:
        path = self.run_config.output_path(filename)
        write_csv(path, rows, columns, comment=self._header())
        self.log.info("Wrote %s", path)
        return path

    def write_network(self, net: Network, tree_edges: t.Iterable[str], **extra: t.Any) -> str:
        extra["config"] = self.config_echo()
        path, _ = write_network_file(
            self.run_config.output_path("network.json"), net, tree_edges, extra
        )
        self.log.info("Wrote %s", path)
        return path

    def emit(self, summary: t.Mapping[str, t.Any]) -> None:
        print(jsonutil.dumps(summary), end="")


class ValidateApp(RestoreStage):
    description = """Check a network or hypergraph and summarize it."""
    name = "radial-restore validate"
    stage = "validate"

    def run(self):
        rc = self.run_config
        if rc.hypergraph:
            inst = read_hypergraph(rc.hypergraph)
            self.emit(
                dict(
                    kind="hypergraph",
                    vertices=inst.n,
                    hyperedges=inst.m,
                    c=inst.c,
                    total_weight=inst.total_weight,
                )
            )
            return
        net = self.load_network()
        tree = self.load_tree(net)
        cov = compute_coverage(net, tree)
        self.emit(
            dict(
                kind="network",
                root=net.root,
                vertices=len(net.vertices),
                edges=len(net.edges),
                tree_edges=len(tree.edges),
                switches=len(cov.switches),
                uncovered=len(cov.uncovered),
                c=cov.c,
                total_demand=net.total_demand(),
            )
        )


class IngestApp(RestoreStage):
    description = """Read buses.csv and lines.csv into a network document."""
    name = "radial-restore ingest"
    stage = "ingest"

    def run(self):
        rc = self.run_config
        if not (rc.buses and rc.lines):
            self.usage_error("ingest needs --buses and --lines")
        net = ingest_csv(rc.buses, rc.lines)
        self.load_tree(net)
        print(self.write_network(net, net.default_tree or ()))


class ContractApp(RestoreStage):
    description = """Contract light leaves and series vertices of the active tree."""
    name = "radial-restore contract"
    stage = "contract"

    def run(self):
        rc = self.run_config
        net = self.load_network()
        tree = self.load_tree(net)
        contracted, new_tree, mapping = contract_tree(
            net, tree, rc.threshold_kw, pre_update_weight=rc.pre_update_weight
        )
        self.write_json("contraction.json", dict(contraction=mapping.to_dict()))
        self.write_network(contracted, new_tree.edges, dropped_switches=mapping.dropped_switches)
        self.emit(
            dict(
                vertices_before=len(net.vertices),
                vertices_after=len(contracted.vertices),
                demand_before=net.total_demand(include_root=True),
                demand_after=contracted.total_demand(include_root=True),
                dropped_switches=len(mapping.dropped_switches),
            )
        )


class AddSwitchesApp(RestoreStage):
    description = """Place new switches greedily by covered exposure."""
    name = "radial-restore add-switches"
    stage = "add-switches"

    def run(self):
        rc = self.run_config
        net = self.load_network()
        tree = self.load_tree(net)
        candidates = candidate_switches(net, rc.max_length_m, rc.candidate_cap or None)
        plan = greedy_add_switches(
            net, tree, candidates, rc.max_switches, target=rc.coverage_target
        )
        self.write_json("plan.json", dict(plan=plan.to_dict(), candidates=len(candidates)))
        self.write_table("curve.csv", plan.curve_rows(), CURVE_COLUMNS)
        self.write_network(plan.apply(net), tree.edges)
        self.emit(
            dict(
                candidates=len(candidates),
                added=len(plan.added),
                initial_fraction=plan.initial_fraction,
                covered_fraction=plan.covered_fraction,
            )
        )


class OrderApp(RestoreStage):
    description = """Order the switches (or hypergraph vertices) with a chosen solver."""
    name = "radial-restore order"
    stage = "order"

    def run(self):
        rc = self.run_config
        net = tree = None
        if rc.hypergraph:
            inst = read_hypergraph(rc.hypergraph)
        else:
            net = self.load_network()
            tree = self.load_tree(net)
            inst = self.mssc_instance(net, tree)
        solver = self.create_solver()
        if rc.dump_lp and inst.m:
            c = rc.kernel_c or inst.c
            write_lp_file(build_mssc_lp(pad_to_uniform(inst, c)), rc.output_path("model.lp"))
        ordering = solver.solve(inst)
        payload: t.Dict[str, t.Any] = dict(
            solver=solver.get_solver_info(),
            instance=dict(n=inst.n, m=inst.m, c=inst.c, uncovered=list(inst.uncovered)),
            ordering=ordering.to_dict(),
        )
        if solver.solver_name == "alpha":
            payload["kernel"] = KernelSpec.for_uniformity(
                rc.kernel_c or inst.c, rc.kernel_kind or None
            ).to_dict()
        if net is not None and tree is not None:
            metrics = evaluate_metrics(net, tree, ordering, rc.uncovered_mode)
            payload["tree_edges"] = natural_sorted(tree.edges)
            payload["metrics"] = metrics.to_dict()
        self.write_json("solution.json", payload)
        print("%.12g" % ordering.normalized)


class LocalSearchApp(RestoreStage):
    description = """Improve the active tree by branch exchange."""
    name = "radial-restore local-search"
    stage = "local-search"

    def run(self):
        rc = self.run_config
        net = self.load_network()
        tree = self.load_tree(net)
        search = BranchExchangeSearch(
            parent=self,
            objective=rc.objective,
            seed=rc.seed,
            max_steps=rc.max_steps,
            uncovered_mode=rc.uncovered_mode,
            cross_term=rc.cross_term,
        )
        result = search.run(net, tree)
        metrics = evaluate_metrics(net, result.tree, result.ordering, rc.uncovered_mode)
        self.write_json(
            "solution.json",
            dict(
                search=result.to_dict(),
                tree_edges=natural_sorted(result.tree.edges),
                ordering=result.ordering.to_dict(),
                metrics=metrics.to_dict(),
            ),
        )
        self.write_table("curve.csv", (s.to_dict() for s in result.trace), TRACE_COLUMNS)
        self.write_network(net, result.tree.edges)
        print("%.12g" % result.value)


class ReportApp(RestoreStage):
    description = """Report the metrics, per-vertex outage and voltage-class means."""
    name = "radial-restore report"
    stage = "report"

    def _sequence(self, net: Network, tree: TreeConfig) -> t.List[str]:
        rc = self.run_config
        if not rc.solution:
            return list(self.create_solver().solve(self.mssc_instance(net, tree)).sequence)
        try:
            with open(rc.solution, encoding="utf-8") as f:
                doc = json.load(f)
            return [str(s) for s in doc["ordering"]["sequence"]]
        except (OSError, ValueError, KeyError, TypeError) as e:
            raise ParseError("cannot read an ordering: %s" % e, rc.solution)

    def run(self):
        rc = self.run_config
        net = self.load_network()
        tree = self.load_tree(net)
        sequence = self._sequence(net, tree)
        cov = compute_coverage(net, tree)
        metrics = evaluate_metrics(net, tree, sequence, rc.uncovered_mode, cov)
        outage = per_vertex_outage(net, tree, sequence, rc.uncovered_mode, cov)
        rows = [
            dict(
                vertex=v,
                voltage_class=net.vertices[v].voltage_class,
                demand_kw=net.vertices[v].demand,
                expected_outage=outage[v],
            )
            for v in natural_sorted(outage)
        ]
        self.write_table("report.csv", rows, REPORT_COLUMNS)
        means = dict(metrics.class_outage)
        lv, mv = means.get("LV"), means.get("MV")
        equity = dict(class_means=means, lv_mv_ratio=lv / mv if lv is not None and mv else None)
        self.write_json(
            "solution.json",
            dict(
                tree_edges=natural_sorted(tree.edges),
                ordering=dict(sequence=sequence),
                metrics=metrics.to_dict(),
                equity=equity,
            ),
        )
        summary = metrics.to_dict()
        summary["equity"] = equity
        self.emit(summary)


class GenApp(RestoreStage):
    description = """Generate a fixture network or hypergraph."""
    usage = "radial-restore gen FAMILY [--options]"
    examples = """
    radial-restore gen wheel --wheel-size=7 --output-dir=wheel
    radial-restore gen integrality-gap --gap-n=15 --gap-k=1
    radial-restore gen tap --network=triangle/network.json
    """
    name = "radial-restore gen"
    stage = "gen"
    family = Unicode("")

    def parse_command_line(self, argv):
        super().parse_command_line(argv)
        if not self.extra_args:
            self.usage_error("No family given. Must be one of: %s" % ", ".join(GEN_FAMILIES))
        if self.extra_args[0] not in GEN_FAMILIES:
            self.usage_error(
                "Unknown family %r. Must be one of: %s"
                % (self.extra_args[0], ", ".join(GEN_FAMILIES))
            )
        self.family = self.extra_args[0]

    def config_echo(self) -> t.Dict[str, t.Any]:
        echo = super().config_echo()
        echo["family"] = self.family
        return echo

    def run(self):
        rc = self.run_config
        if self.family == "wheel":
            wheel = gen_wheel(rc.wheel_size)
            print(
                self.write_network(
                    wheel.network, wheel.wheel_tree, spoke_tree=natural_sorted(wheel.spoke_tree)
                )
            )
        elif self.family == "greedy-gap":
            net, tree = gen_greedy_gap_example()
            print(self.write_network(net, tree.edges))
        elif self.family == "integrality-gap":
            params = GapFamilyParams(c=rc.gap_c, N=rc.gap_n, k=rc.gap_k, epsilon=rc.gap_epsilon)
            gap = gen_integrality_gap(params)
            path = rc.output_path("hypergraph.txt")
            write_hypergraph(path, gap.instance)
            self.write_json(
                "gap.json",
                dict(
                    params=params.to_dict(),
                    blocks=list(gap.blocks),
                    dropped=list(gap.dropped),
                    horizon=gap.horizon,
                    point_cost=gap.point_cost,
                ),
            )
            print(path)
        elif self.family == "tap":
            net = self.load_network()
            reduction = gen_tap_reduction(net, self.load_tree(net))
            print(
                self.write_network(
                    reduction.network,
                    reduction.tree.edges,
                    hub=reduction.hub,
                    original_switches=list(reduction.original_switches),
                )
            )
        elif self.family == "non-realizable":
            path = rc.output_path("hypergraph.txt")
            write_hypergraph(path, gen_mssc_non_mrt_fixture())
            print(path)
        else:
            net = gen_sample_network()
            print(self.write_network(net, net.default_tree or ()))


class SolversApp(RestoreStage):
    description = """List the registered ordering solvers."""
    name = "radial-restore solvers"
    stage = "solvers"

    def run(self):
        factory = OrderingSolverFactory.instance(parent=self)
        entries = factory.get_solver_entries()
        print("Available ordering solvers:")
        if not entries:
            return
        # pad to width of longest solver name
        name_len = max(len(name) for name in entries)
        for name in sorted(entries):
            marker = " (default)" if name == factory.default_solver_name else ""
            print(f"  {name.ljust(name_len)}    {entries[name]}{marker}")


class RestoreApp(UsageErrorMixin, Application):
    version = __version__
    name = "radial-restore"
    description = """Plan and evaluate switch-based reconnection of radial networks."""

    subcommands = Dict(
        {
            "validate": (ValidateApp, ValidateApp.description.splitlines()[0]),
            "ingest": (IngestApp, IngestApp.description.splitlines()[0]),
            "contract": (ContractApp, ContractApp.description.splitlines()[0]),
            "add-switches": (AddSwitchesApp, AddSwitchesApp.description.splitlines()[0]),
            "order": (OrderApp, OrderApp.description.splitlines()[0]),
            "local-search": (LocalSearchApp, LocalSearchApp.description.splitlines()[0]),
            "report": (ReportApp, ReportApp.description.splitlines()[0]),
            "gen": (GenApp, GenApp.description.splitlines()[0]),
            "solvers": (SolversApp, SolversApp.description.splitlines()[0]),
        }
    )

    aliases: t.Dict[str, object] = {}
    flags: t.Dict[str, object] = {}

    def start(self):
        if self.subapp is None:
            if self.extra_args:
                print("Unknown subcommand %r." % self.extra_args[0])
            print("No subcommand specified. Must specify one of: %s" % list(self.subcommands))
            print()
            self.print_description()
            self.print_subcommands()
            self.exit(USAGE_ERROR)
        else:
            return self.subapp.start()


main = RestoreApp.launch_instance

if __name__ == "__main__":
    main()
