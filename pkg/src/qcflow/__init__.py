"""qcflow: a modular streaming compiler for quantum programs.

Programs emit :class:`Command` objects into a :class:`Pipeline` of compiler
stages that ends in a backend such as the resource counter or the simulator.
"""
from .decompose import IGS, SIMULATABLE, TARGET, DecomposeStage, GateSetSpec, QFTNoSwap
from .engine import Engine, ListBackend, Pipeline
from .errors import QcflowError
from .ir import (COMPUTE, QFT, UNCOMPUTE, Allocate, Command, Deallocate, Gate, GateClass, H, Loop, Measure,
                 Phase, Rx, Ry, Rz, S, Sdg, Swap, T, Tag, Tdg, X, Y, Z, classify, inverse, matrix)
from .meta import Compute, Control, CustomUncompute, LoopScope, compute, uncompute, with_control, with_loop
from .optimize import OptimizerStage, compile_with_igs
from . import qmath

__version__ = "0.1.0"

__all__ = [
    "IGS", "SIMULATABLE", "TARGET", "DecomposeStage", "GateSetSpec", "QFTNoSwap", "Engine", "ListBackend",
    "Pipeline", "QcflowError", "COMPUTE", "QFT", "UNCOMPUTE", "Allocate", "Command", "Deallocate", "Gate",
    "GateClass", "H", "Loop", "Measure", "Phase", "Rx", "Ry", "Rz", "S", "Sdg", "Swap", "T", "Tag", "Tdg", "X",
    "Y", "Z", "classify", "inverse", "matrix", "Compute", "Control", "CustomUncompute", "LoopScope", "compute",
    "uncompute", "with_control", "with_loop", "OptimizerStage", "compile_with_igs", "qmath",
]
