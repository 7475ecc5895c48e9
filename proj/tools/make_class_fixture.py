#!/usr/bin/env python3
"""Writes the synthetic per-class stimulus manifest used by tests and demos.

Each manipulation class gets ten targets whose distance scores sit at
symmetric offsets around the class average, plus two manipulated references.
Offsets are chosen so that the exact mean of the stored scores rounds to the
class average. Reference subjects never overlap target subjects.
"""
import argparse
import csv
import hashlib
import itertools
import sys
from fractions import Fraction

CLASSES = [
    ("faceswap", "hard", "Fewshotface", 0.37),
    ("faceswap", "hard", "SimpleFS", 0.40),
    ("faceswap", "easy", "SimpleFS", 0.14),
    ("morph", "hard", "FaceFusion", 0.55),
    ("morph", "hard", "UBO", 0.56),
    ("morph", "easy", "FaceFusion", 0.27),
    ("morph", "easy", "UBO", 0.28),
    ("retouch", "hard", "Instabeauty", 0.60),
    ("retouch", "hard", "Fotorus", 0.72),
    ("retouch", "easy", "Instabeauty", 0.45),
    ("retouch", "easy", "Fotorus", 0.41),
]
TARGET_OFFSET_SETS = [
    [-0.05, -0.04, -0.03, -0.02, -0.01, 0.01, 0.02, 0.03, 0.04, 0.05],
    [-0.06, -0.04, -0.03, -0.02, -0.01, 0.01, 0.02, 0.03, 0.04, 0.06],
    [-0.08, -0.04, -0.03, -0.02, -0.01, 0.01, 0.02, 0.03, 0.04, 0.08],
    [-0.07, -0.05, -0.03, -0.02, -0.01, 0.01, 0.02, 0.03, 0.05, 0.07],
]
REFERENCE_OFFSET_SETS = [[-0.02, 0.02], [-0.01, 0.01], [-0.03, 0.03]]
BONA_FIDE_TARGETS = 60
BONA_FIDE_REFERENCES = 12


def opaque_uri(stimulus_id):
    digest = hashlib.sha256(stimulus_id.encode()).hexdigest()[:20]
    return f"stimuli/{digest}.png"


def scores(avg, offsets):
    return [float(f"{avg + off:.2f}") for off in offsets]


def pick_offsets(avg):
    """Offsets whose scores, as doubles, have a correctly rounded mean equal to avg."""
    for targets, refs in itertools.product(TARGET_OFFSET_SETS, REFERENCE_OFFSET_SETS):
        values = scores(avg, targets) + scores(avg, refs)
        if len(set(scores(avg, targets))) != len(targets):
            continue
        if float(sum(Fraction(v) for v in values) / len(values)) == avg:
            return targets, refs
    raise SystemExit(f"no offset set reproduces {avg}")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("-o", "--output", default="-")
    args = ap.parse_args()

    subject = 0

    def subjects(n):
        nonlocal subject
        ids = []
        for _ in range(n):
            subject += 1
            ids.append(f"subj{subject:04d}")
        return ";".join(ids)

    rows = []
    for type_, difficulty, method, avg in CLASSES:
        target_offsets, reference_offsets = pick_offsets(avg)
        for role, offsets in (("target", target_offsets), ("reference", reference_offsets)):
            for k, off in enumerate(offsets):
                sid = f"{type_}-{difficulty}-{method.lower()}-{role[0]}{k + 1:02d}"
                rows.append({
                    "stimulus_id": sid,
                    "uri": opaque_uri(sid),
                    "kind": "manipulated",
                    "manipulation_type": type_,
                    "method": method,
                    "difficulty": difficulty,
                    "distance_score": f"{avg + off:.2f}",
                    "subject_ids": subjects(2 if type_ == "morph" else 1),
                    "role": role,
                })
    for role, n in (("target", BONA_FIDE_TARGETS), ("reference", BONA_FIDE_REFERENCES)):
        for k in range(n):
            sid = f"bonafide-{role[0]}{k + 1:03d}"
            rows.append({
                "stimulus_id": sid,
                "uri": opaque_uri(sid),
                "kind": "bona_fide",
                "manipulation_type": "",
                "method": "",
                "difficulty": "",
                "distance_score": "",
                "subject_ids": subjects(1),
                "role": role,
            })

    out = sys.stdout if args.output == "-" else open(args.output, "w", newline="")
    w = csv.DictWriter(out, fieldnames=list(rows[0].keys()), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    if out is not sys.stdout:
        out.close()


if __name__ == "__main__":
    main()
