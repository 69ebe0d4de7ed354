"""Seeded scene fixtures shared by the gradient and acceptance tests."""
import numpy as np

from vecdenoise.vector_paths import VectorScene, ellipse_path


def random_scene(seed, width=32, height=32, n_paths=2, jitter=1.0):
    rng = np.random.default_rng(seed)
    paths = []
    for _ in range(n_paths):
        center = rng.uniform(10, width - 10, 2)
        semi = rng.uniform(4, 8, 2)
        th = rng.uniform(0, np.pi)
        axes = np.array([[np.cos(th), np.sin(th)], [-np.sin(th), np.cos(th)]])
        path = ellipse_path(center, semi, axes, 4, rng.uniform(0, 1, 3))
        path.points += rng.normal(0, jitter, path.points.shape)
        paths.append(path)
    scene = VectorScene(rng.uniform(0, 1, 3), paths)
    target = rng.uniform(0, 1, (height, width, 3))
    weights = rng.uniform(0.5, 1.5, (height, width))
    return scene, target, weights


def disk_scene(center, radius, color, background, k=4):
    return VectorScene(background, [ellipse_path(center, (radius, radius), np.eye(2), k, color)])
