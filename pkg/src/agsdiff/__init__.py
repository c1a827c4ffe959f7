"""Golden-master GUI regression checking on attribute trees.

The package compares two GUI states (forests of elements carrying string
attributes), explains how they differ, and maintains golden masters so
reviewers can accept or ignore individual changes::

    from agsdiff import ags, executor

    expected = ags.load_state("login.ags.json")
    actual = ags.load_state("login-now.ags.json")
    report = executor.execute(expected, actual)
    for entry in report.attribute_diffs:
        print(entry.handle, [c.key for c in entry.changes])
"""

from __future__ import annotations

__version__ = "0.1.0"
