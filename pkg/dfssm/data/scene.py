import numpy as np


def render_scene(h: int, w: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    yy /= max(h - 1, 1)
    xx /= max(w - 1, 1)

    start, stop = rng.uniform(0.15, 0.85, size=(2, 3))
    angle = rng.uniform(0, np.pi)
    t = np.clip(np.cos(angle) * xx + np.sin(angle) * yy, 0, 1)
    image = start[None, None] * (1 - t[..., None]) + stop[None, None] * t[..., None]

    for _ in range(int(rng.integers(2, 5))):
        cy, cx = rng.uniform(0, 1, size=2)
        r = rng.uniform(0.08, 0.25)
        mask = (yy - cy) ** 2 + (xx - cx) ** 2 < r * r
        image[mask] = rng.uniform(0.05, 0.95, size=3)

    for _ in range(int(rng.integers(1, 3))):
        y0, x0 = rng.uniform(0, 0.8, size=2)
        bh, bw = rng.uniform(0.05, 0.2, size=2)
        mask = (yy >= y0) & (yy < y0 + bh) & (xx >= x0) & (xx < x0 + bw * 3)
        image[mask] = rng.uniform(0.05, 0.95, size=3)

    return np.rint(image * 255).astype(np.uint8)
