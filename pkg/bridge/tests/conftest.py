import numpy as np
import pytest
from PIL import Image

from maskbridge import BridgeConfig

SIZE = 48


def text_image(base_value: int):
    """Flat background with a dark bar standing in for a line of text."""
    base = np.full((SIZE, SIZE, 3), base_value, np.uint8)
    image = base.copy()
    image[18:30, 8:40] = 40
    mask = np.zeros((SIZE, SIZE), np.uint8)
    mask[16:32, 6:42] = 255
    return base, image, mask


@pytest.fixture(scope="session")
def fixture_dir(tmp_path_factory):
    """The directory layout the golden transcripts expect under $DIR."""
    root = tmp_path_factory.mktemp("fixture")
    gt = root / "gt"
    gt.mkdir()
    for i in range(2):
        base, image, mask = text_image(205 + 10 * i)
        Image.fromarray(image).save(root / f"img{i}.png")
        Image.fromarray(mask).save(root / f"mask{i}.png")
        Image.fromarray(base).save(gt / f"img{i}.png")
    Image.fromarray(np.zeros((SIZE, SIZE), np.uint8)).save(root / "mask_zero.png")
    return root


@pytest.fixture(scope="session")
def gt_dir(fixture_dir):
    return fixture_dir / "gt"


@pytest.fixture
def config(gt_dir):
    return BridgeConfig(ground_truth_dir=gt_dir)


@pytest.fixture(scope="session")
def make_text_image():
    return text_image
