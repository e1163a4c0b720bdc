import numpy as np

DEFAULTS = {"batch_size": 1000}


def random_search(box, rng: np.random.Generator, batch_size: int = 1000) -> dict:
    """Uniform sampling of the domain until the box says stop."""
    while not box.done:
        n = min(int(batch_size), box.remaining)
        box.evaluate_batch(rng.uniform(-1.0, 1.0, (n, box.dim)))
    return {}
