from rheacl.tensor.adam import AdamState, adam_step
from rheacl.tensor.kernels import BACKEND
from rheacl.tensor.tensor import (
    Tape,
    Tensor,
    add,
    clip,
    conv2d,
    entropy_last,
    exp,
    linear,
    log_softmax,
    maxpool2,
    mean_all,
    minimum,
    mul,
    neg,
    relu,
    reshape,
    scale,
    square,
    sub,
    sum_all,
    sum_last,
    take_last,
    tanh,
)

__all__ = [
    "AdamState",
    "adam_step",
    "BACKEND",
    "Tape",
    "Tensor",
    "add",
    "clip",
    "conv2d",
    "entropy_last",
    "exp",
    "linear",
    "log_softmax",
    "maxpool2",
    "mean_all",
    "minimum",
    "mul",
    "neg",
    "relu",
    "reshape",
    "scale",
    "square",
    "sub",
    "sum_all",
    "sum_last",
    "take_last",
    "tanh",
]
