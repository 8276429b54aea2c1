"""Placement and swap routing for nearest-neighbour hardware."""
from .mapper import MapperStage, map_circuit
from .placement import Grid, HardwareGraph, Linear, greedy_placement, snake_embed
from .routing import BipartiteColumnGraph, SwapSchedule, grid_route, matching_decomposition, oets_route

__all__ = ["MapperStage", "map_circuit", "Grid", "HardwareGraph", "Linear", "greedy_placement", "snake_embed",
           "BipartiteColumnGraph", "SwapSchedule", "grid_route", "matching_decomposition", "oets_route"]
