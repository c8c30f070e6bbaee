"""Backbone construction, output heads, and the fixed preprocessing.

Three ImageNet classifiers are supported. ``conv`` mode emits the
globally average-pooled activations of the last convolutional stage;
``softmax`` mode emits the 1000-class probability row. Weights come from
the published ImageNet checkpoints when they can be fetched; otherwise a
fixed-seed random initialization is used so that runs stay reproducible,
and the manifest records which source was active.
"""

from __future__ import annotations

import contextlib
import logging
import socket
import sys

import torch
from torch import nn
from torchvision import models, transforms

from .errors import ConfigError, WeightsError

log = logging.getLogger("extractor_adapter")

MODEL_NAMES = ("resnet34", "vgg", "inception")
MODE_NAMES = ("conv", "softmax")
WEIGHTS_POLICIES = ("auto", "pretrained", "seeded")

CONV_DIMS = {"resnet34": 512, "vgg": 512, "inception": 2048}
SOFTMAX_DIM = 1000

# fixed seed for the fallback initialization; part of the output contract
FALLBACK_WEIGHTS_SEED = 224

_IMAGENET_MEAN = (0.485, 0.456, 0.406)
_IMAGENET_STD = (0.229, 0.224, 0.225)

_BUILDERS = {
    "resnet34": (models.resnet34, models.ResNet34_Weights.IMAGENET1K_V1),
    "vgg": (models.vgg16, models.VGG16_Weights.IMAGENET1K_V1),
    "inception": (models.inception_v3, models.Inception_V3_Weights.IMAGENET1K_V1),
}

# (resize shorter side, center-crop size); inception_v3 expects 299x299 input
_INPUT_SIZES = {"resnet34": (256, 224), "vgg": (256, 224), "inception": (342, 299)}

_DOWNLOAD_TIMEOUT_S = 15.0


def preprocessing(model_name: str):
    """Return (torchvision transform, manifest description) for a model."""
    if model_name not in _INPUT_SIZES:
        raise ConfigError(f"unknown model {model_name!r}; expected one of {MODEL_NAMES}")
    resize, crop = _INPUT_SIZES[model_name]
    transform = transforms.Compose(
        [
            transforms.Resize(resize, interpolation=transforms.InterpolationMode.BILINEAR),
            transforms.CenterCrop(crop),
            transforms.ToTensor(),
            transforms.Normalize(mean=_IMAGENET_MEAN, std=_IMAGENET_STD),
        ]
    )
    description = {
        "decode": "RGB",
        "resize_shorter_side": resize,
        "interpolation": "bilinear",
        "center_crop": crop,
        "scale": "[0, 1]",
        "normalize_mean": list(_IMAGENET_MEAN),
        "normalize_std": list(_IMAGENET_STD),
    }
    return transform, description


def _build_backbone(model_name: str, weights_policy: str):
    """Instantiate the classifier; returns (module, weights description)."""
    if model_name not in _BUILDERS:
        raise ConfigError(f"unknown model {model_name!r}; expected one of {MODEL_NAMES}")
    if weights_policy not in WEIGHTS_POLICIES:
        raise ConfigError(
            f"unknown weights policy {weights_policy!r}; expected one of {WEIGHTS_POLICIES}"
        )
    builder, weights_enum = _BUILDERS[model_name]

    if weights_policy in ("auto", "pretrained"):
        previous_timeout = socket.getdefaulttimeout()
        socket.setdefaulttimeout(_DOWNLOAD_TIMEOUT_S)
        try:
            # torch.hub prints download notices on stdout; keep stdout
            # reserved for the status line
            with contextlib.redirect_stdout(sys.stderr):
                net = builder(weights=weights_enum)
            return net, {"source": "imagenet-pretrained", "id": str(weights_enum)}
        except Exception as exc:
            if weights_policy == "pretrained":
                raise WeightsError(f"could not obtain pretrained weights: {exc}") from exc
            log.warning(
                "pretrained weights unavailable (%s); falling back to seed-%d initialization",
                exc,
                FALLBACK_WEIGHTS_SEED,
            )
        finally:
            socket.setdefaulttimeout(previous_timeout)

    torch.manual_seed(FALLBACK_WEIGHTS_SEED)
    kwargs = {"init_weights": True} if model_name == "inception" else {}
    net = builder(weights=None, **kwargs)
    return net, {"source": "seeded-random", "seed": FALLBACK_WEIGHTS_SEED}


class _GapOverFeatures(nn.Module):
    """Global average pool over a purely convolutional trunk (VGG conv mode)."""

    def __init__(self, features: nn.Module):
        super().__init__()
        self.features = features

    def forward(self, x):
        return self.features(x).mean(dim=(2, 3))


class _SoftmaxOverLogits(nn.Module):
    def __init__(self, net: nn.Module):
        super().__init__()
        self.net = net

    def forward(self, x):
        return torch.softmax(self.net(x), dim=1)


def build_extractor(model_name: str, mode: str, weights_policy: str = "auto"):
    """Build the inference head for a model/mode pair.

    Returns (eval-mode module mapping image batches to rows, row dimension,
    space tag, weights description).
    """
    if mode not in MODE_NAMES:
        raise ConfigError(f"unknown mode {mode!r}; expected one of {MODE_NAMES}")
    net, weights_info = _build_backbone(model_name, weights_policy)

    if mode == "softmax":
        head: nn.Module = _SoftmaxOverLogits(net)
        dim, space_tag = SOFTMAX_DIM, "softmax"
    elif model_name == "vgg":
        head = _GapOverFeatures(net.features)
        dim, space_tag = CONV_DIMS[model_name], "feature"
    else:
        # resnet34 / inception_v3 pool right before their final linear
        # layer, so dropping that layer yields the pooled conv features
        net.fc = nn.Identity()
        head = net
        dim, space_tag = CONV_DIMS[model_name], "feature"

    head.eval()
    return head, dim, space_tag, weights_info
