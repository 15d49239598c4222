"""Minimal differentiable tensor substrate."""
from . import functional
from .conv import avg_pool2d, conv2d, upsample_nearest2x
from .functional import (
    absolute,
    add,
    clip,
    concat,
    div,
    exp,
    instance_norm,
    leaky_relu,
    log,
    matmul,
    mean,
    mul,
    neg,
    power,
    relu,
    reshape,
    sigmoid,
    softmax,
    sqrt,
    sub,
    tanh,
    transpose,
)
from .gradcheck import GradCheckReport, grad_check
from .tensor import (
    GradTape,
    Tensor,
    as_tensor,
    backward,
    double_precision,
    get_default_dtype,
    is_grad_enabled,
    no_grad,
    record_op,
)
