"""Adam optimizer over named parameters."""
from collections import OrderedDict
from typing import Dict, Tuple

import numpy as np

from ..core import Tensor
from ..errors import CheckpointError


class Adam:
    """Adam with bias-corrected moments and a step counter per parameter.

    Parameters
    ----------
    params : dict(str, Tensor)
    lr : float
    betas : (float, float), default = (0.9, 0.999)
    eps : float, default = 1e-8

    Notes
    -----
    Parameters without a gradient are left untouched and their step counter does not advance.
    """

    def __init__(
        self: "Adam",
        params: Dict[str, Tensor],
        lr: float,
        betas: Tuple[float, float] = (0.9, 0.999),
        eps: float = 1.0e-8,
    ) -> None:
        self.params = params
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.m = OrderedDict((name, np.zeros_like(p.data)) for name, p in params.items())
        self.v = OrderedDict((name, np.zeros_like(p.data)) for name, p in params.items())
        self.t = OrderedDict((name, 0) for name in params)

    def zero_grad(self: "Adam") -> None:
        for param in self.params.values():
            param.zero_grad()

    def step(self: "Adam") -> None:
        beta1, beta2 = self.betas

        for name, param in self.params.items():
            if param.grad is None:
                continue

            grad = param.grad
            self.t[name] += 1
            t = self.t[name]

            self.m[name] = beta1 * self.m[name] + (1.0 - beta1) * grad
            self.v[name] = beta2 * self.v[name] + (1.0 - beta2) * grad * grad

            m_hat = self.m[name] / (1.0 - beta1**t)
            v_hat = self.v[name] / (1.0 - beta2**t)
            update = self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
            param.data = (param.data - update).astype(param.dtype)

    def state_dict(self: "Adam") -> Dict[str, np.ndarray]:
        state = OrderedDict()
        for name in self.params:
            state[f"{name}.m"] = self.m[name]
            state[f"{name}.v"] = self.v[name]
            state[f"{name}.step"] = np.array(self.t[name], dtype=np.int64)
        return state

    def load_state_dict(self: "Adam", state: Dict[str, np.ndarray]) -> None:
        for name, param in self.params.items():
            try:
                m, v, t = state[f"{name}.m"], state[f"{name}.v"], state[f"{name}.step"]
            except KeyError as error:
                raise CheckpointError(f"Optimizer state has no entry {error}") from error

            if m.shape != param.shape or v.shape != param.shape:
                raise CheckpointError(
                    f"Optimizer moments of '{name}' have shapes {m.shape} and {v.shape}"
                    f", parameter has {param.shape}"
                )
            self.m[name] = m.astype(param.dtype, copy=True)
            self.v[name] = v.astype(param.dtype, copy=True)
            self.t[name] = int(t)
