import pytest

from sgan_converter.model import make_reference_checkpoint


@pytest.fixture(scope="session")
def checkpoint_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("ckpt") / "reference.pt"
    return make_reference_checkpoint(str(path), seed=0)
