import json
from pathlib import Path

import cv2
import numpy as np
import pytest

GRAY = (128, 128, 128)
RED = (40, 40, 210)      # BGR
GREEN = (60, 180, 60)
BLUE = (200, 90, 40)

SIZE = (160, 120)  # (width, height)


def blank(color=GRAY):
    img = np.zeros((SIZE[1], SIZE[0], 3), np.uint8)
    img[:] = color
    return img


def with_octagon(img, center, radius, color):
    pts = []
    for k in range(8):
        angle = (k + 0.5) * np.pi / 4
        pts.append([int(center[0] + radius * np.cos(angle)),
                    int(center[1] + radius * np.sin(angle))])
    cv2.fillPoly(img, [np.array(pts, np.int32)], color)
    return img


def with_rect(img, frac, color):
    """Fill a centred rectangle covering ``frac`` of the image area."""
    h, w = img.shape[:2]
    rw, rh = int(w * np.sqrt(frac)), int(h * np.sqrt(frac))
    x0, y0 = (w - rw) // 2, (h - rh) // 2
    img[y0:y0 + rh, x0:x0 + rw] = color
    return img


@pytest.fixture(scope="session")
def sample_video(tmp_path_factory):
    """Three seconds at 30 fps: a stop-sign-like red octagon appears in the
    middle second only."""
    path = tmp_path_factory.mktemp("video") / "crossing.avi"
    writer = cv2.VideoWriter(str(path), cv2.VideoWriter_fourcc(*"MJPG"), 30.0, SIZE)
    assert writer.isOpened()
    for i in range(90):
        frame = blank()
        if 30 <= i < 60:
            with_octagon(frame, (80, 60), 35, RED)
        writer.write(frame)
    writer.release()
    return path


@pytest.fixture(scope="session")
def labelled_images(tmp_path_factory):
    """20 labelled panels: 10 low-coverage images with wrong labels (low
    confidence, incorrect) and 10 high-coverage with matching labels."""
    root = tmp_path_factory.mktemp("images")
    labels = {}
    palette = {"red_sign": RED, "green_panel": GREEN, "blue_panel": BLUE}
    names = list(palette)

    for i in range(10):
        actual = names[i % 3]
        wrong = names[(i + 1) % 3]
        img = with_rect(blank(), 0.01 + 0.004 * i, palette[actual])
        file = root / f"img{i:02d}.png"
        cv2.imwrite(str(file), img)
        labels[file.name] = wrong

    for i in range(10, 20):
        actual = names[i % 3]
        img = with_rect(blank(), 0.12 + 0.07 * (i - 10), palette[actual])
        file = root / f"img{i:02d}.png"
        cv2.imwrite(str(file), img)
        labels[file.name] = actual

    labels_path = root / "labels.json"
    labels_path.write_text(json.dumps(labels, indent=2))
    return root, labels_path
