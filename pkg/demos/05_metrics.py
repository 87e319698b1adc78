#!/usr/bin/env python3
"""Evaluating bias removal.

MAC is the grand mean of cosine distances between target words and attribute
sets (larger = more bias removed); a paired t-test over the f table checks
whether a change is significant; FPED/FNED summarize group-rate deviations
of a downstream classifier.
"""

import numpy as np

from embdebias import (
    GroupOutcome,
    equality_differences,
    mac,
    mean_cos_distance,
    paired_t_test,
    student_t_cdf,
)

# MAC on explicit vectors: orthogonal target/attribute pairs give exactly 1
targets = np.eye(4)[:2]
attribute_sets = [np.eye(4)[2:3], np.eye(4)[3:4]]
report = mac(targets, attribute_sets)
print("orthogonal MAC:", report.mac, "table shape:", report.table.shape)

# antipodal vectors are maximally distant (2), identical ones minimally (0)
print("antipodal:", mean_cos_distance(np.array([1.0, 0]), np.array([[-1.0, 0]])))
print("identical:", mean_cos_distance(np.array([1.0, 0]), np.array([[2.0, 0]])))

# a debiasing run shifts the f table; pair the before/after cells
rng = np.random.default_rng(3)
before = rng.uniform(0.7, 0.9, size=12)
after = before + rng.uniform(0.02, 0.08, size=12)   # consistent improvement
t, p, df = paired_t_test(before, after)
print(f"\npaired t-test: t = {t:.3f}, p = {p:.2g}, df = {df}")

t0, p0, _ = paired_t_test(before, before)
print(f"no change: t = {t0}, p = {p0}")

# the t CDF itself is exposed (regularized incomplete beta underneath)
print("P(T <= 2.776 | df=4) =", student_t_cdf(2.776, 4))

# extrinsic metrics from confusion counts per demographic group
overall = GroupOutcome("overall", tp=50, fp=20, tn=80, fn=30)
groups = [
    GroupOutcome("group_a", tp=30, fp=5, tn=45, fn=10),
    GroupOutcome("group_b", tp=20, fp=15, tn=35, fn=20),
]
fped, fned = equality_differences(groups, overall)
print(f"\nFPED = {fped:.4f}  FNED = {fned:.4f}  Total = {fped + fned:.4f}")
print("(zero would mean every group matches the overall rates exactly)")
