"""Finite-difference gradient checks of every differentiable building block.

Each check builds a small random instance in 64-bit floats and compares analytic
gradients of a scalar function with central differences.
"""
import logging
from typing import Callable, Dict, List, Sequence

import numpy as np

from .core import (
    GradCheckReport,
    Tensor,
    avg_pool2d,
    conv2d,
    double_precision,
    grad_check,
    instance_norm,
    leaky_relu,
    sigmoid,
    softmax,
    tanh,
    upsample_nearest2x,
)
from .losses import (
    PerceptualExtractor,
    content_loss,
    discriminator_loss,
    generator_adversarial_loss,
    reconstruction_loss,
    style_loss,
)
from .memory import SlotSet, attentive_read, init_memory, mr_loss
from .networks import GeneratorConfig, MOSTGenerator, PatchDiscriminator
from .style_injection import SIModule, SIResBlock

LOGGER = logging.getLogger(__name__)

Check = Callable[[np.random.Generator], GradCheckReport]

TOLERANCE = 1.0e-3
MAX_ELEMENTS = 24


def _tensor(rng: np.random.Generator, *shape: int, name: str = "", scale: float = 1.0) -> Tensor:
    return Tensor(rng.standard_normal(shape) * scale, requires_grad=True, name=name)


def _projection(rng: np.random.Generator, out: Tensor) -> Tensor:
    """Fixed random weights turning an output into a scalar with non-trivial gradients."""
    return Tensor(rng.standard_normal(out.shape), dtype=out.dtype)


def _check_map(
    rng: np.random.Generator,
    fn: Callable[..., Tensor],
    inputs: Sequence[Tensor],
) -> GradCheckReport:
    weights = _projection(rng, fn(*inputs))
    return grad_check(
        lambda *args: (fn(*args) * weights).sum(),
        inputs,
        tolerance=TOLERANCE,
        max_elements=MAX_ELEMENTS,
    )


def check_conv2d(rng: np.random.Generator) -> GradCheckReport:
    """Stride 1 and stride 2 convolutions sharing one filter bank."""
    x = _tensor(rng, 2, 3, 7, 7, name="x")
    weight = _tensor(rng, 4, 3, 3, 3, name="weight")
    bias = _tensor(rng, 4, name="bias")
    same_weights = Tensor(rng.standard_normal((2, 4, 7, 7)))
    strided_weights = Tensor(rng.standard_normal((2, 4, 4, 4)))

    def fn(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
        same = conv2d(x, w, b, stride=1, padding=1)
        strided = conv2d(x, w, b, stride=2, padding=1)
        return (same * same_weights).sum() + (strided * strided_weights).sum()

    return grad_check(fn, [x, weight, bias], tolerance=TOLERANCE, max_elements=MAX_ELEMENTS)


def check_upsample(rng: np.random.Generator) -> GradCheckReport:
    return _check_map(rng, upsample_nearest2x, [_tensor(rng, 1, 2, 3, 3, name="x")])


def check_avg_pool(rng: np.random.Generator) -> GradCheckReport:
    return _check_map(rng, avg_pool2d, [_tensor(rng, 1, 2, 5, 6, name="x")])


def check_instance_norm(rng: np.random.Generator) -> GradCheckReport:
    return _check_map(rng, instance_norm, [_tensor(rng, 2, 3, 4, 4, name="x")])


def check_activations(rng: np.random.Generator) -> GradCheckReport:
    def fn(x: Tensor) -> Tensor:
        return softmax(tanh(x) + sigmoid(x) + leaky_relu(x), axis=1)

    return _check_map(rng, fn, [_tensor(rng, 3, 5, name="x")])


def check_si_module(rng: np.random.Generator) -> GradCheckReport:
    module = SIModule(4, 3, rng, hidden_channels=5)
    # move gamma away from its constant initialization
    module.gamma_conv.weight.data[...] = rng.standard_normal(module.gamma_conv.weight.shape) * 0.3

    content = _tensor(rng, 2, 4, 5, 5, name="content")
    style = _tensor(rng, 2, 3, 5, 5, name="style")
    params = [module.beta_conv.weight, module.gamma_conv.weight, module.shared.weight]
    return _check_map(rng, lambda c, s, *_: module(c, s), [content, style, *params])


def check_si_resblock(rng: np.random.Generator) -> GradCheckReport:
    block = SIResBlock(4, 6, 3, rng, hidden_channels=5)
    content = _tensor(rng, 1, 4, 5, 5, name="content")
    style = _tensor(rng, 1, 3, 5, 5, name="style")
    params = [block.conv_1.weight, block.conv_shortcut.weight]
    return _check_map(rng, lambda c, s, *_: block(c, s), [content, style, *params])


def check_attentive_read(rng: np.random.Generator) -> GradCheckReport:
    memory = init_memory(7, 4, seed=int(rng.integers(1 << 31)))

    def fn(queries: Tensor) -> Tensor:
        return attentive_read(memory, SlotSet(queries, 2, 3)).slots

    return _check_map(rng, fn, [_tensor(rng, 6, 4, name="queries")])


def check_mr_loss(rng: np.random.Generator) -> GradCheckReport:
    memory = init_memory(5, 4, seed=int(rng.integers(1 << 31)))
    photo = _tensor(rng, 6, 4, name="photo_slots")
    sketch = _tensor(rng, 6, 4, name="sketch_slots")

    def fn(p: Tensor, s: Tensor) -> Tensor:
        return mr_loss(SlotSet(p, 2, 3), SlotSet(s, 2, 3), memory, "soft", tau=0.5)

    return grad_check(fn, [photo, sketch], tolerance=TOLERANCE, max_elements=MAX_ELEMENTS)


def check_adversarial_loss(rng: np.random.Generator) -> GradCheckReport:
    discriminator = PatchDiscriminator(rng, base_channels=4)
    photo = Tensor(rng.uniform(-1, 1, (1, 3, 32, 32)))
    real = Tensor(rng.uniform(-1, 1, (1, 1, 32, 32)))
    fake = Tensor(rng.uniform(-1, 1, (1, 1, 32, 32)), requires_grad=True, name="fake")

    def fn(fake: Tensor) -> Tensor:
        fake_scores = discriminator(photo, fake)
        loss_d = discriminator_loss(discriminator(photo, real), fake_scores)
        return generator_adversarial_loss(fake_scores) + loss_d * 0.5

    return grad_check(fn, [fake], tolerance=TOLERANCE, max_elements=MAX_ELEMENTS)


def check_reconstruction_loss(rng: np.random.Generator) -> GradCheckReport:
    real = Tensor(rng.uniform(-1, 1, (1, 1, 8, 8)))
    fake = Tensor(rng.uniform(-1, 1, (1, 1, 8, 8)), requires_grad=True, name="fake")
    return grad_check(
        lambda f: reconstruction_loss(f, real),
        [fake],
        tolerance=TOLERANCE,
        max_elements=MAX_ELEMENTS,
    )


def check_style_loss(rng: np.random.Generator) -> GradCheckReport:
    extractor = PerceptualExtractor(seed=int(rng.integers(1 << 31)))
    real = Tensor(rng.uniform(-1, 1, (1, 1, 8, 8)))
    fake = Tensor(rng.uniform(-1, 1, (1, 1, 8, 8)), requires_grad=True, name="fake")
    return grad_check(
        lambda f: style_loss(extractor, f, real),
        [fake],
        tolerance=TOLERANCE,
        max_elements=MAX_ELEMENTS,
    )


def check_content_loss(rng: np.random.Generator) -> GradCheckReport:
    extractor = PerceptualExtractor(seed=int(rng.integers(1 << 31)))
    photo = Tensor(rng.uniform(-1, 1, (1, 3, 16, 16)))
    fake = Tensor(rng.uniform(-1, 1, (1, 1, 16, 16)), requires_grad=True, name="fake")
    return grad_check(
        lambda f: content_loss(extractor, photo, f),
        [fake],
        tolerance=TOLERANCE,
        max_elements=MAX_ELEMENTS,
    )


TINY_GENERATOR = GeneratorConfig(
    base_channels=4,
    feature_channels=8,
    style_hidden_channels=8,
    encoder_blocks=1,
    decoder_blocks=1,
    si_blocks=1,
)


GENERATOR_MAX_ELEMENTS = 8


def check_generator(rng: np.random.Generator) -> GradCheckReport:
    """Check photo, sketch and every generator parameter through the training forward pass.

    Parameters are relabelled with their full names, a random subset of
    ``GENERATOR_MAX_ELEMENTS`` entries is perturbed per tensor.
    """
    generator = MOSTGenerator(TINY_GENERATOR, rng)
    # alpha = 1 keeps the memory fixed across the repeated evaluations
    memory = init_memory(
        16, TINY_GENERATOR.feature_channels, seed=int(rng.integers(1 << 31)), alpha=1.0
    )

    photo = Tensor(rng.uniform(-1, 1, (1, 3, 16, 16)), requires_grad=True, name="photo")
    sketch = Tensor(rng.uniform(-1, 1, (1, 1, 16, 16)), requires_grad=True, name="sketch")
    real = Tensor(rng.uniform(-1, 1, (1, 1, 16, 16)))
    params = generator.parameters()
    for name, param in params.items():
        param.name = name

    def fn(photo: Tensor, sketch: Tensor, *_: Tensor) -> Tensor:
        out = generator.forward_train(photo, sketch, memory)
        refinement = mr_loss(out.photo_slots, out.sketch_slots, memory, "soft", tau=0.5)
        return reconstruction_loss(out.fake_sketch, real) + refinement

    return grad_check(
        fn,
        [photo, sketch, *params.values()],
        tolerance=TOLERANCE,
        max_elements=GENERATOR_MAX_ELEMENTS,
    )


class GradCheckSuite:
    """Named gradient checks.

    Attributes
    ----------
    checks : dict(str, callable)
        Maps operation names to functions building and checking a random instance.
    """

    checks: Dict[str, Check] = {
        "conv2d": check_conv2d,
        "upsample_nearest2x": check_upsample,
        "avg_pool2d": check_avg_pool,
        "instance_norm": check_instance_norm,
        "activations": check_activations,
        "si_module": check_si_module,
        "si_resblock": check_si_resblock,
        "attentive_read": check_attentive_read,
        "mr_loss": check_mr_loss,
        "adversarial_loss": check_adversarial_loss,
        "reconstruction_loss": check_reconstruction_loss,
        "style_loss": check_style_loss,
        "content_loss": check_content_loss,
        "generator": check_generator,
    }

    def get_check(self: "GradCheckSuite", name: str) -> Check:
        if name not in self.checks:
            raise KeyError(f"Unknown gradient check '{name}', try one of {tuple(self.checks)}")
        return self.checks[name]

    def run(
        self: "GradCheckSuite", seed: int = 0, names: Sequence[str] = ()
    ) -> Dict[str, GradCheckReport]:
        """Run the selected checks (all if ``names`` is empty) in 64-bit precision."""
        reports: Dict[str, GradCheckReport] = {}
        selected: List[str] = list(names) or list(self.checks)

        with double_precision():
            for name in selected:
                check = self.get_check(name)
                index = list(self.checks).index(name)
                report = check(np.random.default_rng([seed, index]))
                reports[name] = report
                LOGGER.info(
                    "%s: %s (max error %.2e)", name, "pass" if report else "FAIL", report.max_error
                )

        return reports


def run_gradcheck_suite(seed: int = 0) -> Dict[str, GradCheckReport]:
    return GradCheckSuite().run(seed)
