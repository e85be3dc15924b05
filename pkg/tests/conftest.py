import time

import pytest


@pytest.fixture(scope="session")
def toy_training_run(tmp_path_factory):
    """One toy training run shared by the acceptance criteria that need it.

    Returns (manifest_path, loss trace, wall-clock seconds).
    """
    from crowdnav.sgan import save_weights
    from crowdnav.training import TrainConfig, gen_straight_line_dataset, train_toy

    dataset = gen_straight_line_dataset(8, seed=0)
    config = TrainConfig(epochs=200, seed=0, learning_rate=0.05)
    start = time.perf_counter()
    weights, trace = train_toy(dataset, config)
    elapsed = time.perf_counter() - start
    out = tmp_path_factory.mktemp("toy_weights")
    manifest = save_weights(weights, out)
    return manifest, trace, elapsed
