# Copyright 2026 The Robustmix Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Builds the small natural-photo fixture corpus used by the spectrum tests.

Each photograph bundled with scikit-image is center-cropped to a square,
area-downsampled to 64x64 and written as binary PGM (gray) or PPM (color).
Also prints the oracle cumulative-energy fractions computed with SciPy's
orthonormal DCT-II so the committed thresholds can be checked independently.
"""
import pathlib
import sys

import numpy as np
from scipy.fft import dctn
import skimage.data as data
from skimage.transform import resize

SIZE = 64
PHOTOS = ["astronaut", "camera", "coffee", "chelsea", "rocket", "moon", "coins", "immunohistochemistry"]


def square(img):
    h, w = img.shape[:2]
    s = min(h, w)
    top, left = (h - s) // 2, (w - s) // 2
    return img[top:top + s, left:left + s]


def write_pnm(path, img):
    img = np.clip(np.round(img * 255.0), 0, 255).astype(np.uint8)
    magic = b"P5" if img.ndim == 2 else b"P6"
    with open(path, "wb") as f:
        f.write(magic + b"\n%d %d\n255\n" % (img.shape[1], img.shape[0]))
        f.write(img.tobytes())
    return img.astype(np.float64) / 255.0


def main(out_dir):
    out = pathlib.Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    planes = []
    for name in PHOTOS:
        img = getattr(data, name)()
        img = square(img).astype(np.float64)
        img /= 255.0 if img.max() > 1.0 else 1.0
        small = resize(img, (SIZE, SIZE) + img.shape[2:], anti_aliasing=True)
        ext = "pgm" if small.ndim == 2 else "ppm"
        stored = write_pnm(out / f"{name}.{ext}", small)
        if stored.ndim == 2:
            stored = stored[:, :, None]
        planes.extend(stored[:, :, ch] for ch in range(stored.shape[2]))
    spectra = [dctn(p, norm="ortho") ** 2 for p in planes]
    total = sum(s.sum() for s in spectra)
    for c in [0.0, 0.05, 0.1, 0.25, 0.5, 0.75, 1.0]:
        k = int(np.floor(c * SIZE + 0.5))
        low = sum(s[:k, :k].sum() for s in spectra)
        print(f"{c},{low / total:.9f}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "tests/fixtures/photos")
