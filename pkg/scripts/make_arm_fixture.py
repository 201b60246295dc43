"""Regenerate the bundled 54-arm fixture (synthetic ids, texts and rewards).

Six arms form a tight, high-reward cluster; the remaining 48 are spread over
the plane away from it with rewards from a smooth trend plus noise.

    python3 scripts/make_arm_fixture.py src/pa_gp_ucb/data/arms54.csv
"""
import csv
import sys

import numpy as np

CHANNELS = ["text", "email", "app push", "letter"]
TONES = ["friendly", "urgent", "neutral", "playful", "formal", "curious"]
HOOKS = ["a streak counter", "a small bonus", "a planning prompt", "a social comparison",
         "a habit tip", "a reflection question", "a reminder of goals", "a fun fact"]
CLUSTER_CENTER = np.array([7.8, 7.2])


def main(out):
    rng = np.random.default_rng(20240611)
    cluster = CLUSTER_CENTER + 0.25 * rng.standard_normal((6, 2))
    others = []
    while len(others) < 48:
        p = rng.uniform(0.0, 10.0, size=2)
        if np.linalg.norm(p - CLUSTER_CENTER) > 2.0:
            others.append(p)
    others = np.array(others)
    trend = lambda P: 1.2 + 0.08 * P[:, 0] + 0.05 * P[:, 1] + 0.25 * np.sin(P[:, 0] / 1.7) * np.cos(P[:, 1] / 2.3)
    r_cluster = 3.4 + 0.15 * rng.random(6)
    r_others = trend(others) + 0.15 * rng.standard_normal(48)
    emb = np.vstack([others, cluster])
    rew = np.concatenate([r_others, r_cluster])
    order = rng.permutation(54)
    with open(out, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["arm_id", "text", "e1", "e2", "mean_reward"])
        for k, i in enumerate(order, start=1):
            text = (f"A {TONES[i % 6]} {CHANNELS[i % 4]} with {HOOKS[i % 8]}"
                    + (" and a planned gym time" if i >= 48 else ""))
            w.writerow([f"arm{k:02d}", text, f"{emb[i, 0]:.6f}", f"{emb[i, 1]:.6f}", f"{rew[i]:.6f}"])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "src/pa_gp_ucb/data/arms54.csv")
