"""Discrete controller synthesis over explicit safety-game arenas."""
from .arena import Arena, build_arena
from .controller import Controller, controlled_step, make_controller
from .oracle import oracle_tables, oracle_winning_set
from .solve import WinningSet, candidate_order, synthesize


def stats_text(arena, winning):
    lines = [
        f"states: {arena.n_states}",
        f"winning: {winning.size}",
        f"synthesizable: {'true' if winning.synthesizable else 'false'}",
        f"iterations: {winning.iterations}",
        f"uncontrollable valuations: {arena.n_u}",
        f"controllable valuations: {arena.n_c}",
    ]
    return "\n".join(lines) + "\n"
