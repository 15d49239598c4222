"""Dense tensors with reverse-mode gradient recording."""
import contextlib
import logging
from typing import Callable, Dict, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..errors import GradientError

LOGGER = logging.getLogger(__name__)

ArrayLike = Union[np.ndarray, float, int, Sequence]
BackwardRule = Callable[[np.ndarray], Tuple[Optional[np.ndarray], ...]]

_DEFAULT_DTYPE = np.float32
_GRAD_ENABLED = True


def get_default_dtype() -> type:
    """Return dtype used for newly created tensors."""
    return _DEFAULT_DTYPE


@contextlib.contextmanager
def double_precision() -> Iterator[None]:
    """Create tensors in 64-bit floats inside the block.

    Used for gradient checking, training runs in 32-bit floats.
    """
    global _DEFAULT_DTYPE
    previous = _DEFAULT_DTYPE
    _DEFAULT_DTYPE = np.float64
    try:
        yield
    finally:
        _DEFAULT_DTYPE = previous


@contextlib.contextmanager
def no_grad() -> Iterator[None]:
    """Do not record operations inside the block."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


def is_grad_enabled() -> bool:
    return _GRAD_ENABLED


class Tensor:
    """Dense n-dimensional array which may take part in gradient computation.

    Parameters
    ----------
    data : array_like
        Values. Converted to ``dtype`` (the default dtype if None).
    requires_grad : bool, default = False
        Leaf tensors with this flag receive ``grad`` after ``backward``.
    dtype : numpy dtype, optional
    name : str, default = ""
        Used in diagnostics only.

    Attributes
    ----------
    grad : np.ndarray or None
        Accumulated gradient, same shape as ``data``.
    """

    __array_ufunc__ = None

    def __init__(
        self: "Tensor",
        data: ArrayLike,
        requires_grad: bool = False,
        dtype: Optional[type] = None,
        name: str = "",
    ) -> None:
        self.data: np.ndarray = np.array(data, dtype=dtype or _DEFAULT_DTYPE)
        self.requires_grad = bool(requires_grad)
        self.grad: Optional[np.ndarray] = None
        self.name = name
        self.op = ""
        self._parents: Tuple["Tensor", ...] = ()
        self._backward: Optional[BackwardRule] = None

    def __repr__(self: "Tensor") -> str:
        label = f", name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}{label})"

    @property
    def shape(self: "Tensor") -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self: "Tensor") -> int:
        return self.data.ndim

    @property
    def dtype(self: "Tensor") -> np.dtype:
        return self.data.dtype

    @property
    def size(self: "Tensor") -> int:
        return self.data.size

    @property
    def is_leaf(self: "Tensor") -> bool:
        return self._backward is None

    def item(self: "Tensor") -> float:
        return float(self.data)

    def numpy(self: "Tensor") -> np.ndarray:
        return self.data

    def detach(self: "Tensor") -> "Tensor":
        """Return a tensor sharing values but cut from the graph."""
        return Tensor(self.data, dtype=self.data.dtype, name=self.name)

    def zero_grad(self: "Tensor") -> None:
        self.grad = None

    def backward(self: "Tensor", retain_graph: bool = False) -> None:
        backward(self, retain_graph=retain_graph)


def as_tensor(value: Union[Tensor, ArrayLike], like: Optional[Tensor] = None) -> Tensor:
    """Wrap a constant into a Tensor, matching the dtype of ``like`` if given."""
    if isinstance(value, Tensor):
        return value
    dtype = like.dtype if like is not None else None
    return Tensor(value, dtype=dtype)


def record_op(
    data: np.ndarray,
    parents: Sequence[Tensor],
    backward_rule: BackwardRule,
    op: str,
) -> Tensor:
    """Create the output of a differentiable operation.

    Parameters
    ----------
    data : np.ndarray
        Forward value.
    parents : sequence of Tensor
        Operation inputs.
    backward_rule : callable
        Maps the output gradient to a tuple of input gradients (None if not needed),
        one per parent.
    op : str
        Operation name for diagnostics.

    Returns
    -------
    Tensor
    """
    out = Tensor(data, dtype=data.dtype)
    out.op = op
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward_rule
    return out


class GradTape:
    """Ordered record of the operations between leaves and a loss.

    Parameters
    ----------
    nodes : list of Tensor
        Topologically sorted, the loss is the last node.
    """

    def __init__(self: "GradTape", nodes: List[Tensor]) -> None:
        self.nodes = nodes

    def __len__(self: "GradTape") -> int:
        return len(self.nodes)

    @classmethod
    def from_loss(cls: "GradTape", loss: Tensor) -> "GradTape":
        """Record the operations the loss depends on."""
        order: List[Tensor] = []
        visited = set()
        stack: List[Tuple[Tensor, bool]] = [(loss, False)]

        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))

        return cls(order)

    def backward(self: "GradTape", loss: Tensor, retain_graph: bool = False) -> None:
        """Replay the tape in reverse order and accumulate leaf gradients.

        Parameters
        ----------
        loss : Tensor
            Scalar, the last recorded node.
        retain_graph : bool, default = False
            Keep backward rules so that the tape can be replayed again.

        Returns
        -------
        None
        """
        grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}

        for node in reversed(self.nodes):
            grad = grads.pop(id(node), None)
            if grad is None:
                continue

            if node.is_leaf:
                node.grad = grad.copy() if node.grad is None else node.grad + grad
                continue

            parent_grads = node._backward(grad)
            for parent, parent_grad in zip(node._parents, parent_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                if parent_grad.shape != parent.shape:
                    raise GradientError(
                        f"Backward rule of '{node.op}' produced gradient of shape "
                        f"{parent_grad.shape} for input of shape {parent.shape}"
                    )
                key = id(parent)
                grads[key] = grads[key] + parent_grad if key in grads else parent_grad

            if not retain_graph:
                node._backward = None
                node._parents = ()
                node.requires_grad = False


def backward(loss: Tensor, retain_graph: bool = False) -> GradTape:
    """Compute gradients of a scalar loss for every reachable leaf.

    Parameters
    ----------
    loss : Tensor
        Scalar tensor.
    retain_graph : bool, default = False

    Returns
    -------
    GradTape
        The replayed tape.
    """
    if loss.size != 1:
        raise GradientError(f"Loss has to be a scalar, got shape {loss.shape}")

    if not loss.requires_grad:
        raise GradientError("Loss does not depend on any tensor that requires grad")

    tape = GradTape.from_loss(loss)
    LOGGER.debug("Replaying %i recorded operations", len(tape))
    tape.backward(loss, retain_graph=retain_graph)
    return tape
