"""Parameter containers."""
from collections import OrderedDict
from typing import Any, Dict, Iterator, Literal, Optional, Tuple

import numpy as np

from ..core import Tensor, conv2d, get_default_dtype

WeightInit = Literal["he", "zeros"]


class Module:
    """Base class of everything holding parameters.

    Parameters are the ``Tensor`` attributes with ``requires_grad`` set. Sub-modules can be
    attributes or stored in lists/tuples. Names follow attribute order, e.g.
    ``photo_encoder.stages.0.conv.weight``.
    """

    def forward(self: "Module", *args: Any, **kwargs: Any) -> Any:
        raise NotImplementedError("This method must be implemented by a subclass")

    def __call__(self: "Module", *args: Any, **kwargs: Any) -> Any:
        return self.forward(*args, **kwargs)

    def named_parameters(self: "Module", prefix: str = "") -> Iterator[Tuple[str, Tensor]]:
        for attr, value in vars(self).items():
            name = f"{prefix}{attr}"
            if isinstance(value, Tensor) and value.requires_grad:
                yield name, value
            elif isinstance(value, Module):
                yield from value.named_parameters(prefix=f"{name}.")
            elif isinstance(value, (list, tuple)):
                for i, item in enumerate(value):
                    if isinstance(item, Module):
                        yield from item.named_parameters(prefix=f"{name}.{i}.")

    def parameters(self: "Module") -> Dict[str, Tensor]:
        return OrderedDict(self.named_parameters())

    def zero_grad(self: "Module") -> None:
        for param in self.parameters().values():
            param.zero_grad()

    def state_dict(self: "Module") -> Dict[str, np.ndarray]:
        return OrderedDict((name, p.data.copy()) for name, p in self.named_parameters())

    def load_state_dict(self: "Module", state: Dict[str, np.ndarray]) -> None:
        """Copy values into parameters, names and shapes have to match exactly."""
        params = self.parameters()

        missing = set(params) - set(state)
        unexpected = set(state) - set(params)
        if missing or unexpected:
            raise KeyError(
                f"State does not match parameters: missing {sorted(missing)}"
                f", unexpected {sorted(unexpected)}"
            )

        for name, param in params.items():
            value = np.asarray(state[name])
            if value.shape != param.shape:
                raise ValueError(
                    f"Parameter '{name}' has shape {param.shape}, state has {value.shape}"
                )
            param.data = value.astype(param.dtype, copy=True)

    def num_parameters(self: "Module") -> int:
        return sum(p.size for p in self.parameters().values())


def parameter(data: np.ndarray, name: str = "") -> Tensor:
    return Tensor(data, requires_grad=True, dtype=get_default_dtype(), name=name)


class Conv2d(Module):
    """Convolution layer with He-normal initialised weights.

    Parameters
    ----------
    in_channels, out_channels : int
    kernel_size : int
    rng : np.random.Generator
    stride : int, default = 1
    padding : int, optional
        Defaults to ``kernel_size // 2``.
    bias : bool, default = True
    weight_init : {"he", "zeros"}, default = "he"
    bias_value : float, default = 0
    """

    def __init__(
        self: "Conv2d",
        in_channels: int,
        out_channels: int,
        kernel_size: int,
        rng: np.random.Generator,
        stride: int = 1,
        padding: Optional[int] = None,
        bias: bool = True,
        weight_init: WeightInit = "he",
        bias_value: float = 0.0,
    ) -> None:
        shape = (out_channels, in_channels, kernel_size, kernel_size)

        if weight_init == "he":
            fan_in = in_channels * kernel_size * kernel_size
            weight = rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)
        elif weight_init == "zeros":
            weight = np.zeros(shape)
        else:
            raise ValueError(f"Unknown weight_init '{weight_init}', try one of ('he', 'zeros')")

        self.stride = stride
        self.padding = kernel_size // 2 if padding is None else padding
        self.weight = parameter(weight, name="weight")
        self.bias = parameter(np.full(out_channels, bias_value), name="bias") if bias else None

    def forward(self: "Conv2d", x: Tensor) -> Tensor:
        return conv2d(x, self.weight, self.bias, stride=self.stride, padding=self.padding)
