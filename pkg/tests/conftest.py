import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from graspstab.contacts import Contact, FrictionModel
from graspstab.metrics import GraspSnapshot


def random_unit(rng: np.random.Generator) -> np.ndarray:
    v = rng.normal(size=3)
    return v / np.linalg.norm(v)


def random_rotation(rng: np.random.Generator) -> np.ndarray:
    """Uniform-ish rotation matrix via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q *= np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_contact(rng: np.random.Generator, mu: float, inside_cone: bool = False) -> Contact:
    position = rng.uniform(-0.1, 0.1, 3)
    normal = random_unit(rng)
    f_n = rng.uniform(0.5, 5.0)
    t = rng.normal(size=3)
    t -= (t @ normal) * normal
    t_norm = np.linalg.norm(t)
    if t_norm > 1e-12:
        t /= t_norm
    limit = mu * f_n
    f_t = rng.uniform(0.0, 0.9 * limit) if inside_cone else rng.uniform(0.0, 2.0 * limit)
    return Contact(position=position, normal=normal, force=f_n * normal + f_t * t)


def random_grasp(rng: np.random.Generator, n_contacts: int | None = None,
                 mu: float | None = None, edge_count: int = 8,
                 inside_cone: bool = False) -> GraspSnapshot:
    n = int(n_contacts if n_contacts is not None else rng.integers(2, 6))
    mu = float(mu if mu is not None else rng.uniform(0.2, 1.0))
    contacts = [random_contact(rng, mu, inside_cone=inside_cone) for _ in range(n)]
    return GraspSnapshot(contacts=contacts, com=rng.uniform(-0.02, 0.02, 3),
                         friction=FrictionModel(mu=mu, edge_count=edge_count))


def antipodal_grasp(mu: float = 1.0, edge_count: int = 8, radius: float = 1.0,
                    preload: float = 2.0) -> GraspSnapshot:
    """Two opposing contacts on a sphere of ``radius`` about the origin."""
    c1 = Contact(position=[radius, 0.0, 0.0], normal=[-1.0, 0.0, 0.0],
                 force=[-preload, 0.0, 0.0])
    c2 = Contact(position=[-radius, 0.0, 0.0], normal=[1.0, 0.0, 0.0],
                 force=[preload, 0.0, 0.0])
    return GraspSnapshot(contacts=[c1, c2], com=np.zeros(3),
                         friction=FrictionModel(mu=mu, edge_count=edge_count))


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20240811)
