import numpy as np
import pytest

from vcdmetric.encoder import VGG_CONV_TABLE, ConvLayer, WeightBundle, save_weights
from vcdmetric.reward import textured_cond
from vcdmetric.rng import Stream, derive_seed


def make_vgg_layers(names, seed: int = 11) -> tuple:
    """Synthetic layers matching the standard table shapes for the given names."""
    table = {name: (out_c, in_c) for name, out_c, in_c in VGG_CONV_TABLE}
    layers = []
    for name in names:
        out_c, in_c = table[name]
        stream = Stream(derive_seed(seed, f"fixture/{name}"))
        scale = np.sqrt(2.0 / (in_c * 9)) * 0.5
        kernels = stream.normals(out_c * in_c * 9).reshape(out_c, in_c, 3, 3) * scale
        biases = np.zeros(out_c)
        layers.append(ConvLayer(name, kernels, biases))
    return tuple(layers)


@pytest.fixture(scope="session")
def vgg_prefix_weights(tmp_path_factory):
    """A VCDW file holding the three layers needed for taps relu1_1 and relu2_1."""
    path = tmp_path_factory.mktemp("weights") / "vgg_prefix.vcdw"
    save_weights(WeightBundle(make_vgg_layers(("conv1_1", "conv1_2", "conv2_1"))), path)
    return path


@pytest.fixture()
def textured16():
    return textured_cond(16, 16, 1, seed=7)
