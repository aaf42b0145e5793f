import random
from pathlib import Path

import pytest

from airadio.catalog import load_catalog
from airadio.domain import FeatureVector, Prime

REPO_ROOT = Path(__file__).resolve().parent.parent
CATALOG_PATH = REPO_ROOT / "data" / "catalog.json"


@pytest.fixture(scope="session")
def catalog():
    return load_catalog(CATALOG_PATH)


def random_features(rng: random.Random) -> FeatureVector:
    values = [rng.uniform(0.0, 1.0) for _ in range(9)]
    values[3] = rng.uniform(-60.0, 0.0)  # loudness
    return FeatureVector.from_sequence(values)


def make_prime(prime_id: str = "prime-1", rng: random.Random = None) -> Prime:
    rng = rng or random.Random(hash(prime_id) & 0xFFFF)
    return Prime(
        prime_id=prime_id,
        contributor_name="tester",
        prime_artist_features=random_features(rng),
        audio_ref=f"primes/{prime_id}.wav",
        submitted_at=1_700_000_000_000,
    )
