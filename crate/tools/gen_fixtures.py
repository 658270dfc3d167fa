#!/usr/bin/env python3
"""Writes the hand-labeled table fixtures used by the test suites.

Gold trees here are hand-derived from the documented extraction rules, not
produced by the extractor; the extraction test compares the two.
"""
import json
import os

ROOT = os.path.join(os.path.dirname(__file__), "..", "crates", "core", "tests", "fixtures")


def fmt_grid(shape, marks):
    """formats array: shape (rows, cols); marks maps (r, c) -> dict."""
    rows, cols = shape
    out = []
    for r in range(rows):
        row = []
        for c in range(cols):
            m = marks.get((r, c), {})
            row.append({"bold": m.get("bold", False), "indent": m.get("indent", 0)})
        out.append(row)
    return out


def node(cell, own=(), children=()):
    return {"cell": list(cell) if cell else None, "own": list(own), "children": list(children)}


def root(children):
    return {"cell": None, "own": [], "children": list(children)}


def write(name, doc, subdir="hierarchy"):
    path = os.path.join(ROOT, subdir, name + ".json")
    os.makedirs(os.path.dirname(path), exist_ok=True)
    with open(path, "w") as f:
        json.dump(doc, f, indent=1)
        f.write("\n")
    print("wrote", path)


# ---------------------------------------------------------------------------
# f1: two years each holding a country pair

f1 = {
    "table_id": "f1",
    "cells": [
        ["", "gdp", "population"],
        ["2012", "", ""],
        ["china", "8.5", "1351"],
        ["u.s.", "16.2", "314"],
        ["2013", "", ""],
        ["china", "9.6", "1357"],
        ["u.s.", "16.8", "316"],
    ],
    "formats": fmt_grid((7, 3), {(2, 0): {"indent": 1}, (3, 0): {"indent": 1},
                                 (5, 0): {"indent": 1}, (6, 0): {"indent": 1}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0], [node((2, 0), [1]), node((3, 0), [2])]),
        node((4, 0), [3], [node((5, 0), [4]), node((6, 0), [5])]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
}
write("f1", f1, subdir="tables")

# ---------------------------------------------------------------------------
# hierarchy corpus

# t01: flat table
write("t01", {
    "table_id": "t01",
    "cells": [
        ["", "exports", "imports"],
        ["canada", "12.5", "9.1"],
        ["mexico", "8.2", "11.4"],
        ["japan", "6.7", "5.3"],
    ],
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([node((1, 0), [0]), node((2, 0), [1]), node((3, 0), [2])]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t02: two-level top header via merges
write("t02", {
    "table_id": "t02",
    "cells": [
        ["", "masters", "", "doctoral", ""],
        ["", "all", "percent", "all", "percent"],
        ["physics", "120", "40", "30", "25"],
        ["chemistry", "90", "30", "45", "37.5"],
        ["biology", "90", "30", "45", "37.5"],
    ],
    "merged": [
        {"r0": 0, "c0": 1, "r1": 0, "c1": 2},
        {"r0": 0, "c0": 3, "r1": 0, "c1": 4},
    ],
    "top_header_rows": 2,
    "left_header_cols": 1,
    "left_tree": root([node((2, 0), [0]), node((3, 0), [1]), node((4, 0), [2])]),
    "top_tree": root([
        node((0, 1), [], [node((1, 1), [0]), node((1, 2), [1])]),
        node((0, 3), [], [node((1, 3), [2]), node((1, 4), [3])]),
    ]),
})

# t03: two-level left header via indentation
write("t03", {
    "table_id": "t03",
    "cells": [
        ["", "count", "share"],
        ["goods", "210", "60"],
        ["food", "90", "26"],
        ["fuel", "120", "34"],
        ["services", "140", "40"],
        ["travel", "140", "40"],
    ],
    "formats": fmt_grid((6, 3), {(2, 0): {"indent": 1}, (3, 0): {"indent": 1},
                                 (5, 0): {"indent": 1}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0], [node((2, 0), [1]), node((3, 0), [2])]),
        node((4, 0), [3], [node((5, 0), [4])]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t04: two-level left header via bold
write("t04", {
    "table_id": "t04",
    "cells": [
        ["", "budget", "spent"],
        ["federal", "500", "480"],
        ["research office", "300", "290"],
        ["standards office", "200", "190"],
        ["state", "240", "235"],
        ["parks office", "240", "235"],
    ],
    "formats": fmt_grid((6, 3), {(1, 0): {"bold": True}, (4, 0): {"bold": True}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0], [node((2, 0), [1]), node((3, 0), [2])]),
        node((4, 0), [3], [node((5, 0), [4])]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t05: merged top parent owning the column with no child beneath
write("t05", {
    "table_id": "t05",
    "cells": [
        ["", "total", "", "other"],
        ["", "", "sub", ""],
        ["north", "55", "21", "8"],
        ["south", "62", "25", "9"],
    ],
    "merged": [{"r0": 0, "c0": 1, "r1": 0, "c1": 2}],
    "top_header_rows": 2,
    "left_header_cols": 1,
    "left_tree": root([node((2, 0), [0]), node((3, 0), [1])]),
    "top_tree": root([
        node((0, 1), [0], [node((1, 2), [1])]),
        node((0, 3), [2]),
    ]),
})

# t06: three-level left header
write("t06", {
    "table_id": "t06",
    "cells": [
        ["", "persons", "rate"],
        ["all", "900", "100"],
        ["men", "440", "49"],
        ["young", "200", "22"],
        ["older", "240", "27"],
        ["women", "460", "51"],
        ["young", "210", "23"],
    ],
    "formats": fmt_grid((7, 3), {(2, 0): {"indent": 1}, (3, 0): {"indent": 2},
                                 (4, 0): {"indent": 2}, (5, 0): {"indent": 1},
                                 (6, 0): {"indent": 2}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0], [
            node((2, 0), [1], [node((3, 0), [2]), node((4, 0), [3])]),
            node((5, 0), [4], [node((6, 0), [5])]),
        ]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t07: three-level top header via nested merges
write("t07", {
    "table_id": "t07",
    "cells": [
        ["", "full year", "", "", ""],
        ["", "first half", "", "second half", ""],
        ["", "q1", "q2", "q3", "q4"],
        ["output", "10", "12", "14", "16"],
        ["hours", "40", "41", "39", "42"],
    ],
    "merged": [
        {"r0": 0, "c0": 1, "r1": 0, "c1": 4},
        {"r0": 1, "c0": 1, "r1": 1, "c1": 2},
        {"r0": 1, "c0": 3, "r1": 1, "c1": 4},
    ],
    "top_header_rows": 3,
    "left_header_cols": 1,
    "left_tree": root([node((3, 0), [0]), node((4, 0), [1])]),
    "top_tree": root([
        node((0, 1), [], [
            node((1, 1), [], [node((2, 1), [0]), node((2, 2), [1])]),
            node((1, 3), [], [node((2, 3), [2]), node((2, 4), [3])]),
        ]),
    ]),
})

# t08: two left header columns
write("t08", {
    "table_id": "t08",
    "cells": [
        ["", "", "volume"],
        ["2019", "", ""],
        ["", "east", "50"],
        ["", "west", "70"],
        ["2020", "", ""],
        ["", "east", "61"],
    ],
    "top_header_rows": 1,
    "left_header_cols": 2,
    "left_tree": root([
        node((1, 0), [0], [node((2, 1), [1]), node((3, 1), [2])]),
        node((4, 0), [3], [node((5, 1), [4])]),
    ]),
    "top_tree": root([node((0, 2), [0])]),
})

# t09: duplicate leaf names under different parents
write("t09", {
    "table_id": "t09",
    "cells": [
        ["", "rev", "cost"],
        ["division east", "", ""],
        ["ops", "31", "22"],
        ["sales", "45", "18"],
        ["division west", "", ""],
        ["ops", "28", "24"],
        ["sales", "39", "16"],
    ],
    "formats": fmt_grid((7, 3), {(2, 0): {"indent": 1}, (3, 0): {"indent": 1},
                                 (5, 0): {"indent": 1}, (6, 0): {"indent": 1}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0], [node((2, 0), [1]), node((3, 0), [2])]),
        node((4, 0), [3], [node((5, 0), [4]), node((6, 0), [5])]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t10: four-level left chain with a return
write("t10", {
    "table_id": "t10",
    "cells": [
        ["", "n", "pct"],
        ["universe", "1000", "100"],
        ["stratum", "600", "60"],
        ["cluster", "300", "30"],
        ["unit", "120", "12"],
        ["remainder", "400", "40"],
    ],
    "formats": fmt_grid((6, 3), {(2, 0): {"indent": 1}, (3, 0): {"indent": 2},
                                 (4, 0): {"indent": 3}, (5, 0): {"indent": 1}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0], [
            node((2, 0), [1], [node((3, 0), [2], [node((4, 0), [3])])]),
            node((5, 0), [4]),
        ]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t11: merged top levels over an indented left hierarchy
write("t11", {
    "table_id": "t11",
    "cells": [
        ["", "masters", "", "doctoral", ""],
        ["", "all", "percent", "all", "percent"],
        ["all students", "160", "100", "80", "100"],
        ["self-support", "96", "60", "52", "65"],
        ["external", "64", "40", "28", "35"],
    ],
    "merged": [
        {"r0": 0, "c0": 1, "r1": 0, "c1": 2},
        {"r0": 0, "c0": 3, "r1": 0, "c1": 4},
    ],
    "formats": fmt_grid((5, 5), {(3, 0): {"indent": 1}, (4, 0): {"indent": 1}}),
    "top_header_rows": 2,
    "left_header_cols": 1,
    "left_tree": root([
        node((2, 0), [0], [node((3, 0), [1]), node((4, 0), [2])]),
    ]),
    "top_tree": root([
        node((0, 1), [], [node((1, 1), [0]), node((1, 2), [1])]),
        node((0, 3), [], [node((1, 3), [2]), node((1, 4), [3])]),
    ]),
})

# t12: full-width merged section rows
write("t12", {
    "table_id": "t12",
    "cells": [
        ["", "v", "w"],
        ["2012", "", ""],
        ["x", "1.5", "2.5"],
        ["y", "3.5", "4.5"],
        ["2013", "", ""],
        ["x", "2", "3"],
    ],
    "merged": [
        {"r0": 1, "c0": 0, "r1": 1, "c1": 2},
        {"r0": 4, "c0": 0, "r1": 4, "c1": 2},
    ],
    "formats": fmt_grid((6, 3), {(2, 0): {"indent": 1}, (3, 0): {"indent": 1},
                                 (5, 0): {"indent": 1}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0], [node((2, 0), [1]), node((3, 0), [2])]),
        node((4, 0), [3], [node((5, 0), [4])]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t13: total rows carrying data at the parent level
write("t13", {
    "table_id": "t13",
    "cells": [
        ["", "amount", "count"],
        ["all sources", "740", "3"],
        ["grants", "400", "1"],
        ["contracts", "220", "1"],
        ["gifts", "120", "1"],
        ["unallocated", "60", "1"],
    ],
    "formats": fmt_grid((6, 3), {(1, 0): {"bold": True},
                                 (2, 0): {"indent": 1}, (3, 0): {"indent": 1},
                                 (4, 0): {"indent": 1}, (5, 0): {"bold": True}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0], [node((2, 0), [1]), node((3, 0), [2]), node((4, 0), [3])]),
        node((5, 0), [4]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t14: two top header rows without merges (single-column chains)
write("t14", {
    "table_id": "t14",
    "cells": [
        ["", "group one", "group two"],
        ["", "x", "y"],
        ["r1", "4", "5"],
        ["r2", "6", "7"],
    ],
    "top_header_rows": 2,
    "left_header_cols": 1,
    "left_tree": root([node((2, 0), [0]), node((3, 0), [1])]),
    "top_tree": root([
        node((0, 1), [], [node((1, 1), [0])]),
        node((0, 2), [], [node((1, 2), [1])]),
    ]),
})

# t15: repeated child names under sibling sections plus a top-level total
write("t15", {
    "table_id": "t15",
    "cells": [
        ["", "count", "rate"],
        ["total", "880", "100"],
        ["men", "430", "49"],
        ["young", "180", "20"],
        ["middle", "150", "17"],
        ["older", "100", "11"],
        ["women", "450", "51"],
        ["young", "190", "22"],
        ["middle", "160", "18"],
        ["older", "100", "11"],
    ],
    "formats": fmt_grid((10, 3), {(3, 0): {"indent": 1}, (4, 0): {"indent": 1},
                                  (5, 0): {"indent": 1}, (7, 0): {"indent": 1},
                                  (8, 0): {"indent": 1}, (9, 0): {"indent": 1}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0]),
        node((2, 0), [1], [node((3, 0), [2]), node((4, 0), [3]), node((5, 0), [4])]),
        node((6, 0), [5], [node((7, 0), [6]), node((8, 0), [7]), node((9, 0), [8])]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t16: bold-only sections at equal indent
write("t16", {
    "table_id": "t16",
    "cells": [
        ["", "v", "w"],
        ["alpha", "9", "1"],
        ["beta", "5", "2"],
        ["gamma", "4", "3"],
        ["delta", "7", "4"],
        ["epsilon", "7", "5"],
    ],
    "formats": fmt_grid((6, 3), {(1, 0): {"bold": True}, (4, 0): {"bold": True}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0], [node((2, 0), [1]), node((3, 0), [2])]),
        node((4, 0), [3], [node((5, 0), [4])]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t17: report-style table, three merged top parents over a 3-level left tree
write("t17", {
    "table_id": "t17",
    "cells": [
        ["", "total", "", "masters", "", "doctoral", ""],
        ["", "all", "percent", "all", "percent", "all", "percent"],
        ["all full-time", "310", "100", "190", "100", "120", "100"],
        ["self-support", "80", "25.8", "60", "31.6", "20", "16.7"],
        ["federal", "150", "48.4", "90", "47.4", "60", "50"],
        ["nsf", "60", "19.4", "35", "18.4", "25", "20.8"],
        ["nih", "55", "17.7", "30", "15.8", "25", "20.8"],
        ["dod", "35", "11.3", "25", "13.2", "10", "8.3"],
        ["institutional", "80", "25.8", "40", "21.1", "40", "33.3"],
    ],
    "merged": [
        {"r0": 0, "c0": 1, "r1": 0, "c1": 2},
        {"r0": 0, "c0": 3, "r1": 0, "c1": 4},
        {"r0": 0, "c0": 5, "r1": 0, "c1": 6},
    ],
    "formats": fmt_grid((9, 7), {
        (3, 0): {"indent": 1}, (4, 0): {"indent": 1, "bold": True},
        (5, 0): {"indent": 2}, (6, 0): {"indent": 2}, (7, 0): {"indent": 2},
        (8, 0): {"indent": 1},
    }),
    "top_header_rows": 2,
    "left_header_cols": 1,
    "left_tree": root([
        node((2, 0), [0], [
            node((3, 0), [1]),
            node((4, 0), [2], [node((5, 0), [3]), node((6, 0), [4]), node((7, 0), [5])]),
            node((8, 0), [6]),
        ]),
    ]),
    "top_tree": root([
        node((0, 1), [], [node((1, 1), [0]), node((1, 2), [1])]),
        node((0, 3), [], [node((1, 3), [2]), node((1, 4), [3])]),
        node((0, 5), [], [node((1, 5), [4]), node((1, 6), [5])]),
    ]),
})

# t18: footnote markers in header text
write("t18", {
    "table_id": "t18",
    "cells": [
        ["", "2021 a", "2022 b"],
        ["revenue 1", "410", "435"],
        ["operating 2", "300", "310"],
        ["licensing a", "110", "125"],
        ["expenses c", "380", "401"],
    ],
    "formats": fmt_grid((5, 3), {(2, 0): {"indent": 1}, (3, 0): {"indent": 1}}),
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([
        node((1, 0), [0], [node((2, 0), [1]), node((3, 0), [2])]),
        node((4, 0), [3]),
    ]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# t19: year headers on top
write("t19", {
    "table_id": "t19",
    "cells": [
        ["", "2018", "2019", "2020"],
        ["imports", "22.5", "24.1", "19.8"],
        ["exports", "18.3", "20.6", "21.2"],
    ],
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([node((1, 0), [0]), node((2, 0), [1])]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1]), node((0, 3), [2])]),
})

# t20: rank ties stay siblings
write("t20", {
    "table_id": "t20",
    "cells": [
        ["", "value", "share"],
        ["overview", "12", "50"],
        ["detail one", "7", "29"],
        ["detail two", "5", "21"],
    ],
    "top_header_rows": 1,
    "left_header_cols": 1,
    "left_tree": root([node((1, 0), [0]), node((2, 0), [1]), node((3, 0), [2])]),
    "top_tree": root([node((0, 1), [0]), node((0, 2), [1])]),
})

# ---------------------------------------------------------------------------
# samples for f1

samples = [
    {"sample_id": "s1", "table_id": "f1",
     "question": "What is the GDP of China in 2012?", "answers": [8.5],
     "entity_links": {"china": [2, 0], "2012": [1, 0]},
     "quantity_links": {"gdp of china": [2, 1]},
     "formula": "=B3"},
    {"sample_id": "s2", "table_id": "f1",
     "question": "Which country has the highest GDP in 2012?", "answers": ["u.s."],
     "entity_links": {"2012": [1, 0]},
     "formula": "=XLOOKUP(LARGE(B3:B4, 1), B3:B4, A3:A4)"},
    {"sample_id": "s3", "table_id": "f1",
     "question": "How much more is U.S. GDP higher than China in 2013?", "answers": [7.2],
     "entity_links": {"u.s.": [6, 0], "china": [5, 0]},
     "quantity_links": {"u.s. gdp": [6, 1]},
     "formula": "=B7-B6"},
    {"sample_id": "s4", "table_id": "f1",
     "question": "What is the population of China in 2013?", "answers": [1357],
     "entity_links": {"china": [5, 0], "2013": [4, 0], "population": [0, 2]},
     "formula": "=C6"},
    {"sample_id": "n1", "table_id": "f1", "question": "",
     "target_text": "U.S. GDP was 7.2 higher than China's in 2013.",
     "highlighted_cells": [[5, 1], [6, 1]],
     "operators": ["diff"],
     "formula": "=B7-B6"},
]
os.makedirs(os.path.join(ROOT, "samples"), exist_ok=True)
with open(os.path.join(ROOT, "samples", "f1_samples.jsonl"), "w") as f:
    for s in samples:
        f.write(json.dumps(s) + "\n")
print("wrote samples")

preds = [
    {"sample_id": "s1",
     "program": "(filter_tree 2012) (filter_tree china) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1)"},
    {"sample_id": "s2",
     "program": "(filter_tree 2012) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1) (argmax 1)"},
    {"sample_id": "s3",
     "program": "(filter_tree u.s. china) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1) (difference)"},
    {"sample_id": "s4", "answer": 1357},
]
with open(os.path.join(ROOT, "samples", "f1_predictions.jsonl"), "w") as f:
    for p in preds:
        f.write(json.dumps(p) + "\n")

gold_programs = [
    {"sample_id": "s1",
     "program": "(filter_tree 2012) (filter_tree china) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1)"},
    {"sample_id": "s2",
     "program": "(filter_tree 2012) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1) (argmax 1)"},
    {"sample_id": "s3",
     "program": "(filter_tree 2013) (filter_tree u.s. china) (filter_level LEFT_2) (filter_tree gdp) (filter_level TOP_1) (difference)"},
    {"sample_id": "s4",
     "program": "(filter_tree 2013) (filter_tree china) (filter_level LEFT_2) (filter_tree population) (filter_level TOP_1)"},
]
with open(os.path.join(ROOT, "samples", "f1_gold_programs.jsonl"), "w") as f:
    for g in gold_programs:
        f.write(json.dumps(g) + "\n")
print("wrote predictions and gold programs")
