#!/usr/bin/env python3
"""Sorts small inputs correctly but crashes on large ones."""
import sys

steps = 0
a = [int(t) for t in sys.stdin.read().split()]
if len(a) > 50:
    print("index out of range", file=sys.stderr)
    sys.exit(139)
for i in range(1, len(a)):
    key = a[i]
    j = i - 1
    while j >= 0:
        steps += 1
        if a[j] <= key:
            break
        a[j + 1] = a[j]
        steps += 1
        j -= 1
    a[j + 1] = key
    steps += 1
print(" ".join(map(str, a)))
print(f"CASET_STEPS={steps}", file=sys.stderr)
