"""Point-mass maze navigation with sparse goal reward.

State is (x, y, vx, vy); actions are accelerations in [-1, 1]^2.  Walls are
unit grid cells; movement resolves axis-by-axis and clamps at wall faces,
zeroing the blocked velocity component.
"""

from __future__ import annotations

import numpy as np

from .core import EnvSpec, EnvState, clip_action

ACCEL = 0.5
DRAG = 0.05
VMAX = 2.0
DT = 0.25
GOAL_RADIUS = 0.5
_WALL_MARGIN = 1e-6

MEDIUM_LAYOUT = (
    "########",
    "#S.....#",
    "######.#",
    "#......#",
    "#.######",
    "#......#",
    "######G#",
    "########",
)

LARGE_LAYOUT = (
    "############",
    "#S.........#",
    "##########.#",
    "#..........#",
    "#.##########",
    "#..........#",
    "##########.#",
    "#.........G#",
    "############",
)


def _parse_layout(rows):
    walls = np.array([[ch == "#" for ch in row] for row in rows], dtype=bool)
    start = goal = None
    for r, row in enumerate(rows):
        for c, ch in enumerate(row):
            if ch == "S":
                start = (r, c)
            elif ch == "G":
                goal = (r, c)
    if start is None or goal is None:
        raise ValueError("layout needs S and G cells")
    return walls, start, goal


class PointMazeEnv:
    def __init__(self, size="medium"):
        layout = MEDIUM_LAYOUT if size == "medium" else LARGE_LAYOUT
        self.walls, self.start_cell, self.goal_cell = _parse_layout(layout)
        self.size = size
        max_steps = 150 if size == "medium" else 250
        self.spec = EnvSpec(
            name=f"pointmaze-{size}",
            state_dim=4,
            action_dim=2,
            termination_features=(0, 1),
            distance_threshold=GOAL_RADIUS,
            max_steps=max_steps,
        )
        # center of a cell (r, c) in (x, y) coordinates: x ~ column, y ~ row
        self.start_xy = np.array([self.start_cell[1] + 0.5, self.start_cell[0] + 0.5])
        self.goal_xy = np.array([self.goal_cell[1] + 0.5, self.goal_cell[0] + 0.5])

    def _is_wall(self, x, y):
        r, c = int(np.floor(y)), int(np.floor(x))
        if r < 0 or c < 0 or r >= self.walls.shape[0] or c >= self.walls.shape[1]:
            return True
        return bool(self.walls[r, c])

    def reset(self, seed=0):
        del seed  # start is fixed; kept for interface uniformity
        obs = np.array([self.start_xy[0], self.start_xy[1], 0.0, 0.0])
        return EnvState(obs=obs)

    def step(self, state, action):
        a = clip_action(action, 2)
        x, y, vx, vy = state.obs
        vx = float(np.clip((vx + ACCEL * a[0]) * (1.0 - DRAG), -VMAX, VMAX))
        vy = float(np.clip((vy + ACCEL * a[1]) * (1.0 - DRAG), -VMAX, VMAX))

        nx = x + vx * DT
        if self._is_wall(nx, y):
            nx = np.floor(nx) + 1.0 + _WALL_MARGIN if vx < 0 else np.floor(nx) - _WALL_MARGIN
            vx = 0.0
        ny = y + vy * DT
        if self._is_wall(nx, ny):
            ny = np.floor(ny) + 1.0 + _WALL_MARGIN if vy < 0 else np.floor(ny) - _WALL_MARGIN
            vy = 0.0

        obs = np.array([nx, ny, vx, vy])
        t = state.t + 1
        reached = np.hypot(nx - self.goal_xy[0], ny - self.goal_xy[1]) <= GOAL_RADIUS
        reward = 1.0 if (reached and state.reward_total < 1.0) else 0.0
        done = reached or t >= self.spec.max_steps
        return EnvState(obs=obs, t=t, reward_total=state.reward_total + reward), reward, done

    def is_success(self, state):
        return state.reward_total >= 1.0

    def bfs_path(self):
        """Cell path from start to goal; scripted experts follow it."""
        from collections import deque

        rows, cols = self.walls.shape
        prev = {self.start_cell: None}
        queue = deque([self.start_cell])
        while queue:
            cell = queue.popleft()
            if cell == self.goal_cell:
                break
            r, c = cell
            for nr, nc in ((r + 1, c), (r - 1, c), (r, c + 1), (r, c - 1)):
                if 0 <= nr < rows and 0 <= nc < cols and not self.walls[nr, nc] \
                        and (nr, nc) not in prev:
                    prev[(nr, nc)] = cell
                    queue.append((nr, nc))
        if self.goal_cell not in prev:
            raise ValueError("maze layout has no start-to-goal path")
        path = []
        cell = self.goal_cell
        while cell is not None:
            path.append(cell)
            cell = prev[cell]
        return list(reversed(path))
