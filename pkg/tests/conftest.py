import pytest

from palmforge.demo import build_demo_corpus


@pytest.fixture(scope="session")
def demo_corpus(tmp_path_factory):
    """9 identities x 5 gestures plus keypoint sidecar, built once."""
    root = tmp_path_factory.mktemp("corpus")
    sidecar = build_demo_corpus(root, n_identities=9, gestures_per_identity=5, seed=7)
    return root, sidecar
