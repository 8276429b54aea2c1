"""Terminal stages for counting and simulating circuits, plus circuit files."""
from .counter import CSV_HEADER, CounterStage, ResourceReport, count_resources
from .serialize import deserialize, load, save, serialize
from .simulator import Simulator, circuit_unitary, simulate

__all__ = ["CSV_HEADER", "CounterStage", "ResourceReport", "count_resources", "deserialize", "load", "save",
           "serialize", "Simulator", "circuit_unitary", "simulate"]
