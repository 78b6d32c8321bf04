"""Breadth-first solvability check for DoorKey layouts.

Searches the (position, direction, carrying, door-open) space with the real
movement rules. Used by the layout validation tests; dropping the key is
never needed, so the drop action is omitted without losing completeness.
"""

from __future__ import annotations

from collections import deque

from rheacl.gridworld.env import GridState
from rheacl.gridworld.types import (
    DIR_VEC,
    DOOR,
    EMPTY,
    GOAL,
    KEY,
)


def doorkey_solvable(state: GridState) -> bool:
    """True if a sequence of actions reaches the goal from ``state``."""
    grid = state.grid
    size = state.spec.size

    # One key per layout, so "carrying" doubles as "key cell is now empty".
    start = (tuple(state.agent_pos), state.agent_dir, state.carrying_key, state.door_open)
    seen = {start}
    queue = deque([start])
    while queue:
        pos, d, carrying, door_open = queue.popleft()
        if grid[pos] == GOAL:
            return True
        succs = [(pos, (d - 1) % 4, carrying, door_open),
                 (pos, (d + 1) % 4, carrying, door_open)]
        dx, dy = DIR_VEC[d]
        front = (pos[0] + dx, pos[1] + dy)
        if 0 <= front[0] < size and 0 <= front[1] < size:
            cell = grid[front]
            walkable = (cell == GOAL or cell == EMPTY
                        or (cell == DOOR and door_open)
                        or (cell == KEY and carrying))
            if walkable:
                succs.append((front, d, carrying, door_open))
            if cell == KEY and not carrying:
                succs.append((pos, d, True, door_open))
            if cell == DOOR and not door_open and carrying:
                succs.append((pos, d, carrying, True))
        for nxt in succs:
            if nxt not in seen:
                seen.add(nxt)
                queue.append(nxt)
    return False
