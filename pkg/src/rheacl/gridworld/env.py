"""DoorKey and DynamicObstacles rooms with egocentric partial observation.

Layouts are procedural and fully determined by (spec, seed): the same seed
replays the same grid and, with the same action sequence, the same obstacle
motion. States are plain mutable structs owned by one worker at a time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from rheacl.tensor import kernels
from rheacl.gridworld.types import (
    DIR_E,
    DIR_VEC,
    DOOR,
    DOORKEY,
    DROP,
    DYNAMIC_OBSTACLES,
    EMPTY,
    FORWARD,
    GOAL,
    KEY,
    LEFT,
    NOOP,
    NUM_ACTIONS,
    OBSTACLE,
    PICKUP,
    RIGHT,
    TOGGLE,
    UNSEEN,
    WALL,
    EnvSpec,
    Observation,
    _COLOR_OF_OBJECT,
    success_reward,
)


@dataclass
class GridState:
    """Full simulator state. ``grid`` is indexed [x, y], origin top-left."""

    spec: EnvSpec
    grid: np.ndarray  # (size, size) uint8 object ids; the agent is not a cell
    agent_pos: tuple[int, int]
    agent_dir: int
    goal_pos: tuple[int, int]
    max_steps: int
    rng: np.random.Generator
    door_pos: tuple[int, int] | None = None
    door_open: bool = False
    carrying_key: bool = False
    obstacle_positions: list[tuple[int, int]] = field(default_factory=list)
    steps_taken: int = 0
    done: bool = False
    outcome: str | None = None
    view_size: int = 5


def reset(spec: EnvSpec, seed: int, max_steps: int | None = None,
          view_size: int = 5) -> tuple[GridState, Observation]:
    """Generate a seeded layout and return its first observation.

    ``view_size`` must be odd; 5 is the supported/tested path (the policy
    network input is fixed at 5x5), 7 matches the common upstream default.
    """
    if max_steps is None:
        max_steps = spec.default_max_steps
    if max_steps < 1:
        raise ValueError("max_steps must be positive")
    if view_size < 3 or view_size % 2 == 0:
        raise ValueError("view_size must be an odd number >= 3")
    size = spec.size
    rng = np.random.default_rng(seed)
    grid = np.full((size, size), EMPTY, dtype=np.uint8)
    grid[0, :] = WALL
    grid[-1, :] = WALL
    grid[:, 0] = WALL
    grid[:, -1] = WALL
    goal = (size - 2, size - 2)
    grid[goal] = GOAL

    if spec.kind == DOORKEY:
        if size < 5:
            raise ValueError("DoorKey needs at least a 5x5 room")
        split = int(rng.integers(2, size - 2))
        grid[split, :] = WALL
        door_y = int(rng.integers(1, size - 2))
        door_pos = (split, door_y)
        grid[door_pos] = DOOR
        agent_pos = _random_empty(rng, grid, x_max=split)
        agent_dir = int(rng.integers(0, 4))
        key_pos = _random_empty(rng, grid, x_max=split, exclude=agent_pos)
        grid[key_pos] = KEY
        state = GridState(spec, grid, agent_pos, agent_dir, goal, max_steps, rng,
                          door_pos=door_pos, view_size=view_size)
    else:
        agent_pos = (1, 1)
        n_obstacles = size // 2
        obstacles = []
        for _ in range(n_obstacles):
            pos = _random_empty(rng, grid, exclude=agent_pos)
            grid[pos] = OBSTACLE
            obstacles.append(pos)
        state = GridState(spec, grid, agent_pos, DIR_E, goal, max_steps, rng,
                          obstacle_positions=obstacles, view_size=view_size)
    return state, observe(state)


def _random_empty(rng, grid, x_max=None, exclude=None) -> tuple[int, int]:
    size = grid.shape[0]
    hi = size - 1 if x_max is None else x_max
    for _ in range(1000):
        x = int(rng.integers(1, hi))
        y = int(rng.integers(1, size - 1))
        if grid[x, y] == EMPTY and (x, y) != exclude:
            return (x, y)
    raise RuntimeError("no free cell found; room too small for required objects")


def _front(state: GridState) -> tuple[int, int]:
    dx, dy = DIR_VEC[state.agent_dir]
    return (state.agent_pos[0] + dx, state.agent_pos[1] + dy)


def _in_bounds(state: GridState, pos) -> bool:
    return 0 <= pos[0] < state.spec.size and 0 <= pos[1] < state.spec.size


def step(state: GridState, action: int) -> tuple[GridState, Observation, float, bool]:
    """Advance one step. Mutates and returns ``state``; caller owns it."""
    if state.done:
        raise RuntimeError("step() called on a finished episode")
    if not 0 <= action < NUM_ACTIONS:
        raise ValueError(f"action must be in [0, {NUM_ACTIONS}), got {action}")
    state.steps_taken += 1
    reward = 0.0

    if action == LEFT:
        state.agent_dir = (state.agent_dir - 1) % 4
    elif action == RIGHT:
        state.agent_dir = (state.agent_dir + 1) % 4
    elif action == FORWARD:
        target = _front(state)
        if _in_bounds(state, target):
            cell = state.grid[target]
            if cell == OBSTACLE:
                state.done = True
                state.outcome = "collision"
                reward = -1.0
            elif cell == GOAL:
                state.agent_pos = target
                state.done = True
                state.outcome = "goal"
                reward = success_reward(state.steps_taken, state.max_steps)
            elif cell == EMPTY or (cell == DOOR and state.door_open):
                state.agent_pos = target
    elif action == PICKUP:
        target = _front(state)
        if _in_bounds(state, target) and state.grid[target] == KEY and not state.carrying_key:
            state.grid[target] = EMPTY
            state.carrying_key = True
    elif action == DROP:
        target = _front(state)
        if state.carrying_key and _in_bounds(state, target) and state.grid[target] == EMPTY:
            state.grid[target] = KEY
            state.carrying_key = False
    elif action == TOGGLE:
        target = _front(state)
        if (state.door_pos is not None and tuple(target) == state.door_pos
                and not state.door_open and state.carrying_key):
            state.door_open = True
    elif action == NOOP:
        pass

    if not state.done and state.spec.kind == DYNAMIC_OBSTACLES:
        _move_obstacles(state)
        if tuple(state.agent_pos) in state.obstacle_positions:
            state.done = True
            state.outcome = "collision"
            reward = -1.0

    if not state.done and state.steps_taken >= state.max_steps:
        state.done = True
        state.outcome = "timeout"
        reward = 0.0

    return state, observe(state), reward, state.done


def _move_obstacles(state: GridState) -> None:
    # Fixed list order; each obstacle proposes one orthogonal move and stays
    # put if the target cell is not empty floor. The agent's cell counts as
    # empty (the agent is not a grid cell), which is the collision case; the
    # goal and the walls never qualify.
    for i, (ox, oy) in enumerate(state.obstacle_positions):
        dx, dy = DIR_VEC[int(state.rng.integers(0, 4))]
        nx, ny = ox + dx, oy + dy
        if state.grid[nx, ny] != EMPTY:
            continue
        state.grid[ox, oy] = EMPTY
        state.grid[nx, ny] = OBSTACLE
        state.obstacle_positions[i] = (nx, ny)


def observe(state: GridState) -> Observation:
    """Egocentric crop of ``view_size`` cells a side, agent bottom-center.

    Cells outside the room and cells hidden behind walls or closed doors are
    encoded as unseen. The agent's own cell shows the carried key, if any.
    """
    v = state.view_size
    half = v // 2
    ax, ay = state.agent_pos
    fdx, fdy = DIR_VEC[state.agent_dir]
    rdx, rdy = DIR_VEC[(state.agent_dir + 1) % 4]

    rows = np.arange(v)[:, None]  # 0 = farthest ahead, v-1 = agent row
    cols = np.arange(v)[None, :]
    wx = ax + fdx * (v - 1 - rows) + rdx * (cols - half)
    wy = ay + fdy * (v - 1 - rows) + rdy * (cols - half)

    size = state.spec.size
    inside = (wx >= 0) & (wx < size) & (wy >= 0) & (wy < size)
    obj = np.where(inside, state.grid[wx.clip(0, size - 1), wy.clip(0, size - 1)], WALL)

    opaque = (obj == WALL) | ((obj == DOOR) & (not state.door_open)) | ~inside
    visible = kernels.visibility_mask(np.ascontiguousarray(opaque, dtype=np.uint8))
    visible &= inside

    out = np.zeros((v, v, 3), dtype=np.uint8)
    out[:, :, 0] = np.where(visible, obj, UNSEEN)
    out[:, :, 1] = np.where(visible, _COLOR_OF_OBJECT[obj], 0)
    if state.door_pos is not None and not state.door_open:
        out[:, :, 2] = np.where(visible & (obj == DOOR), 1, 0)
    if state.carrying_key:
        out[v - 1, half] = (KEY, _COLOR_OF_OBJECT[KEY], 0)
    return Observation(out, state.agent_dir)


_RENDER = {EMPTY: ".", WALL: "#", DOOR: "D", KEY: "K", GOAL: "G", OBSTACLE: "O"}
_AGENT = {0: "^", 1: ">", 2: "v", 3: "<"}


def render(state: GridState) -> str:
    """ASCII dump of the full grid, for debugging. 'd' marks an open door."""
    size = state.spec.size
    lines = []
    for y in range(size):
        chars = []
        for x in range(size):
            if (x, y) == tuple(state.agent_pos):
                chars.append(_AGENT[state.agent_dir])
                continue
            cell = state.grid[x, y]
            ch = _RENDER[cell]
            if cell == DOOR and state.door_open:
                ch = "d"
            chars.append(ch)
        lines.append("".join(chars))
    return "\n".join(lines)
