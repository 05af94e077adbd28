#!/usr/bin/env python3
# Copyright 2026 The weakagg Authors
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


"""Regenerates tests/fixtures/corpus: 12 persons x trials T00,T01 x iterations I01,I02.

Labels are on the raw 0..2 scale with two decimals. P01_T01_I03 has embeddings
but no labels.csv row. Output is deterministic.
"""
import os
import random

root = os.path.join(os.path.dirname(os.path.abspath(__file__)), "corpus")
rng = random.Random(20240)
rows = []
for p in range(1, 13):
    for t in (0, 1):
        for i in (1, 2):
            name = f"P{p:02d}_T{t:02d}_I{i:02d}"
            rows.append(name)
            os.makedirs(os.path.join(root, name), exist_ok=True)
            frames = 2 + (p + t + i) % 3
            with open(os.path.join(root, name, "embeddings.csv"), "w") as f:
                f.write("dim=4\n")
                for _ in range(frames):
                    f.write(",".join(f"{rng.uniform(-1, 1):.4f}" for _ in range(4)) + "\n")
orphan = "P01_T01_I03"
os.makedirs(os.path.join(root, orphan), exist_ok=True)
with open(os.path.join(root, orphan, "embeddings.csv"), "w") as f:
    f.write("dim=4\n0.1,0.2,0.3,0.4\n")
with open(os.path.join(root, "labels.csv"), "w") as f:
    f.write("folder name,arousal,valence,comfort\n")
    for name in rows:
        a, v, c = (rng.randint(0, 200) / 100 for _ in range(3))
        f.write(f"{name},{a:.2f},{v:.2f},{c:.2f}\n")
