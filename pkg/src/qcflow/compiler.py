"""Ready-made pipelines for the Shor resource experiments."""
from __future__ import annotations

from dataclasses import dataclass, field

from .backends.counter import CounterStage, ResourceReport
from .decompose import TARGET, DecomposeStage
from .engine import Engine, ListBackend, Pipeline
from .mapping.mapper import MapperStage
from .mapping.placement import HardwareGraph
from .optimize import OptimizerStage, igs_stages
from .qmath import ShorParams, default_base, shor_iteration


@dataclass
class ShorRun:
    params: ShorParams
    cuc: bool
    igs: bool
    report: ResourceReport              # first iteration
    commands: list | None = None
    mapped_report: ResourceReport | None = None
    placement: dict = field(default_factory=dict)
    swaps: int = 0

    @property
    def variant(self) -> str:
        return f"cuc={'on' if self.cuc else 'off'};igs={'on' if self.igs else 'off'}"

    def scaled(self) -> ResourceReport:
        """Whole-algorithm estimate: first iteration times the number of iterations."""
        return self.report.scaled(self.params.iterations)


def compile_shor(N: int, a: int | None = None, cuc: bool = True, igs: bool = True, window: int = 20,
                 k: int = 0, keep_commands: bool = False, graph: HardwareGraph | None = None,
                 lookahead: int = 200) -> ShorRun:
    """Compile one controlled-multiplier iteration to CNOT + 1q gates and count it.

    ``cuc=False`` disables the compute/uncompute exception of control scopes.
    With ``graph`` the lowered circuit is also mapped; Swaps are lowered to
    CNOTs before the second count.
    """
    params = ShorParams(N, a if a is not None else default_base(N))
    counter = CounterStage()
    stages: list[Engine] = igs_stages(igs, window) + [counter]
    mapped = None
    mapper = None
    if graph is not None:
        mapper = MapperStage(graph, lookahead)
        mapped = CounterStage()
        stages += [mapper, DecomposeStage(TARGET), OptimizerStage(window), mapped]
    back = ListBackend() if keep_commands else Engine()
    eng = Pipeline(stages, back, naive_control=not cuc)
    shor_iteration(eng, params, k)
    eng.flush()
    return ShorRun(params, cuc, igs, counter.report(), back.commands if keep_commands else None,
                   mapped.report() if mapped else None, mapper.final_placement() if mapper else {},
                   mapper.swaps if mapper else 0)
