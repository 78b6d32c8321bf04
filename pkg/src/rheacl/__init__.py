"""Curriculum optimization for gridworld reinforcement learning.

Trains a PPO agent on DoorKey / DynamicObstacles rooms of growing size while
a rolling-horizon evolutionary search picks which sizes to train on next.
Ships the four reference schedules (random rolling horizon, all-parallel,
self-paced, no curriculum) behind one experiment harness.
"""

__version__ = "0.1.0"

from rheacl.tensor.kernels import BACKEND as kernel_backend  # noqa: F401
