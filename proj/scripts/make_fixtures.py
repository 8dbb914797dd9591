#!/usr/bin/env python3
# Copyright 2026 The damagebench Authors
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
"""Regenerates the mock fixture corpus under fixtures/.

Writes twelve small synthetic PNG images, two mock backend fixture files and
the example description list. Output is deterministic.
"""

import json
import pathlib

import numpy as np
from PIL import Image

ROOT = pathlib.Path(__file__).resolve().parent.parent
FIXTURES = ROOT / "fixtures"

DESCRIPTIONS = [
    "Bridge structural damage. The damage type is cracking with medium severity. The damage has spread "
    "across the bridge wall, suggesting high structural risk.",
    "This image shows cracks in the wall surface. These cracks represent small failures in the structural "
    "wall that reduce durability and may decrease structural strength over time.",
    "This image confirms bridge damage. Cracking has occurred with medium extent and structural risk.",
    "Severe rebar exposure detected. The structural integrity is compromised with visible reinforcement "
    "bars exposed through concrete deterioration.",
    "Corrosion damage observed on bridge structural elements. The corrosion affects surface integrity and "
    "may progress to deeper structural damage.",
    "Bridge wall shows cracking pattern with medium severity. The crack indicates stress distribution and "
    "requires monitoring for progression.",
    "Rebar exposure with corrosion detected. Material degradation visible with structural elements "
    "compromised affecting wall strength.",
    "Elevated highway bridge shows cracking with medium severity. Load-induced stress resulted in material "
    "deformation presenting structural risk.",
    "Damaged bridge section with widespread cracking covering approximately 25% area. Structural safety "
    "compromised with reduced long-term strength.",
    "Extensive cracking across bridge wall surface with widespread distribution. Medium-to-high severity "
    "damage poses structural risk.",
    "Severe cracking and corrosion affecting bridge structure. Heavy damage concentrated in upper section "
    "threatening structural reliability.",
    "Wall exhibits cracking and corrosion with medium severity. Surface integrity affected with potential "
    "progression to deeper structural damage.",
]


def first_sentence(text: str) -> str:
    return text.split(". ")[0].rstrip(".") + "."


def make_image(index: int, rng: np.random.Generator) -> Image.Image:
    h, w = 72, 96
    y, x = np.mgrid[0:h, 0:w]
    base = 90 + 60 * (x / w) + 30 * np.sin(y / (5 + index))
    crack = np.abs(y - (h / 2 + (index - 6) * 2) - 0.3 * (x - w / 2)) < 1.5
    gray = base - 70 * crack + rng.normal(0, 6, size=(h, w))
    rgb = np.stack([gray * 1.02, gray * 0.98, gray * 0.93], axis=-1)
    return Image.fromarray(np.clip(np.rint(rgb), 0, 255).astype(np.uint8), "RGB")


def main() -> None:
    corpus = FIXTURES / "corpus"
    corpus.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20260101)
    ids = []
    for i in range(12):
        image_id = f"photo{i + 1:02d}.png"
        make_image(i, rng).save(corpus / image_id, optimize=False)
        ids.append(image_id)

    q4 = {
        "virtual_time": True,
        "unknown": {"policy": "fail"},
        "fixtures": {
            image_id: {"text": first_sentence(text), "latency": round(5.10 + 0.06 * i, 3)}
            for i, (image_id, text) in enumerate(zip(ids, DESCRIPTIONS))
        },
    }
    q5 = {
        "virtual_time": True,
        "unknown": {"policy": "fail"},
        "fixtures": {
            image_id: {"text": text, "latency": round(5.35 + 0.05 * i, 3)}
            for i, (image_id, text) in enumerate(zip(ids, DESCRIPTIONS))
        },
    }
    for name, doc in (("mock_q4.json", q4), ("mock_q5.json", q5)):
        (FIXTURES / name).write_text(json.dumps(doc, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    (FIXTURES / "descriptions.txt").write_text("\n".join(DESCRIPTIONS) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
