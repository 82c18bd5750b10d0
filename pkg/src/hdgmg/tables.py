"""Published iteration counts and the markdown layout of benchmark tables.

Levels are the published mesh levels 2..7 (internal level + 1).  Every
entry is ``(iterations with m=1, iterations with m=2)``.
"""
import re

LEVELS = (2, 3, 4, 5, 6, 7)
TAUS = ("1/h", "1")

REFERENCE_DOFS = {
    1: (80, 352, 1472, 6016, 24320, 97792),
    2: (120, 528, 2208, 9024, 36480, 146688),
    3: (160, 704, 2944, 12032, 48640, 195584),
}

_I1 = {
    (1, "1/h"): ((18, 10), (22, 12), (22, 12), (23, 12), (23, 12), (23, 12)),
    (1, "1"): ((18, 10), (21, 12), (22, 12), (22, 12), (22, 12), (23, 12)),
    (2, "1/h"): ((13, 8), (13, 7), (12, 7), (12, 7), (12, 7), (12, 7)),
    (2, "1"): ((13, 8), (13, 7), (12, 7), (12, 7), (12, 7), (12, 7)),
    (3, "1/h"): ((17, 11), (17, 10), (17, 10), (17, 10), (17, 10), (17, 10)),
    (3, "1"): ((17, 11), (17, 10), (17, 10), (17, 10), (17, 10), (17, 10)),
}
_P2_I2 = ((11, 8), (11, 7), (11, 7), (11, 7), (11, 7), (11, 7))
_P2_I0 = ((13, 8), (12, 7), (11, 7), (10, 6), (10, 6), (9, 5))
_P3_I0 = ((24, 15), (25, 15), (25, 15), (25, 15), (25, 15), (25, 15))

REFERENCE_ITERATIONS = {
    "I0": {
        (1, "1/h"): ((33, 17), (39, 20), (38, 19), (36, 19), (35, 18), (35, 18)),
        (1, "1"): ((33, 17), (39, 19), (36, 18), (35, 18), (34, 17), (33, 17)),
        (2, "1/h"): _P2_I0, (2, "1"): _P2_I0,
        (3, "1/h"): _P3_I0, (3, "1"): _P3_I0,
    },
    "I1": dict(_I1),
    "I2": {**_I1, (2, "1/h"): _P2_I2, (2, "1"): _P2_I2},
    "I3": dict(_I1),
}


def reference_iterations(injection, p, tau, level, m):
    """Published count for one configuration, or None when not tabulated."""
    try:
        row = REFERENCE_ITERATIONS[injection][(p, tau)]
        return row[LEVELS.index(level)][m - 1]
    except (KeyError, ValueError, IndexError):
        return None


def within_tolerance(observed, reference, rel=0.30, absolute=5):
    """Both |obs - ref| <= rel * ref and |obs - ref| <= absolute."""
    diff = abs(observed - reference)
    return diff <= rel * reference and diff <= absolute


# markdown ----------------------------------------------------------------

def render_markdown(rows):
    """Markdown tables, one per injection, levels as columns and m as sub-columns.

    ``rows`` are mappings with the bench CSV fields.  Cells that did not
    converge show ``DIVERGED``.
    """
    out = []
    for inj in _unique(r["injection"] for r in rows):
        sub = [r for r in rows if r["injection"] == inj]
        levels = sorted(_unique(r["paper_level"] for r in sub))
        ms = sorted(_unique(r["m"] for r in sub))
        out.append(f"### injection {inj}")
        out.append("")
        head = ["p", "row"] + [f"L{lv} m={m}" for lv in levels for m in ms]
        out.append("| " + " | ".join(head) + " |")
        out.append("|" + "---|" * len(head))
        for p in _unique(r["p"] for r in sub):
            cells = {(r["tau"], r["paper_level"], r["m"]): r for r in sub if r["p"] == p}
            dofs = {r["paper_level"]: r["dofs"] for r in cells.values()}
            out.append("| " + " | ".join([str(p), "# DoFs"] +
                                         [str(dofs.get(lv, "")) for lv in levels for m in ms]) + " |")
            for tau in _unique(r["tau"] for r in cells.values()):
                vals = []
                for lv in levels:
                    for m in ms:
                        r = cells.get((tau, lv, m))
                        vals.append("" if r is None else _cell(r))
                out.append("| " + " | ".join([str(p), f"tau={tau}"] + vals) + " |")
        out.append("")
    return "\n".join(out)


def _cell(row):
    it = row["iterations"]
    return "DIVERGED" if it is None or it == "DIVERGED" else str(it)


def _unique(items):
    seen = []
    for it in items:
        if it not in seen:
            seen.append(it)
    return seen


_HEAD = re.compile(r"L(\d+) m=(\d+)")


def parse_markdown(text):
    """Recover (injection, p, tau, paper_level, dofs, m, iterations) rows."""
    rows = []
    inj, columns, dofs = None, [], {}
    for line in text.splitlines():
        line = line.strip()
        if line.startswith("### injection "):
            inj = line.split()[-1]
            continue
        if not line.startswith("|") or line.startswith("|---"):
            continue
        cells = [c.strip() for c in line.strip("|").split("|")]
        if cells[:2] == ["p", "row"]:
            columns = [tuple(int(g) for g in _HEAD.fullmatch(c).groups()) for c in cells[2:]]
            continue
        p, label = int(cells[0]), cells[1]
        if label == "# DoFs":
            dofs = {lv: int(v) for (lv, _), v in zip(columns, cells[2:]) if v}
            continue
        tau = label.removeprefix("tau=")
        for (lv, m), v in zip(columns, cells[2:]):
            if not v:
                continue
            it = None if v == "DIVERGED" else int(v)
            rows.append({"injection": inj, "p": p, "tau": tau, "paper_level": lv,
                         "dofs": dofs.get(lv), "m": m, "iterations": it})
    return rows
