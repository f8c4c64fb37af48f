#!/usr/bin/env python3
"""Writes the warehouse fixture maps under maps/.

fulfillment.map  33x46: 8 shelf rows of three 10-cell blocks, endpoints ('E') above and
                 below each block, start cells ('W') in the two side aisles.
sorting.map      37x77: 11x25 chutes ('@') on a 3-cell pitch with endpoints on all four
                 sides, 25 work stations ('W') on each of the top and bottom rows, the four
                 corner cells blocked, and the one-way aisle pattern in DIRECTIONS.
corridor.map     3x5 ring around a blocked middle row.
crossing.map     7x9 east-west corridor crossed by two north-south corridors.
"""
import pathlib
import sys

NAMES = "NSEW"
DELTAS = {"N": (-1, 0), "S": (1, 0), "E": (0, 1), "W": (0, -1)}


def fulfillment():
    rows, cols = 33, 46
    g = [["." for _ in range(cols)] for _ in range(rows)]
    for r in range(2, 31, 4):
        for start in (7, 18, 29):
            for c in range(start, start + 10):
                g[r][c] = "@"
                g[r - 1][c] = "E"
                g[r + 1][c] = "E"
    for r in range(1, 32):
        for c in list(range(1, 6)) + list(range(40, 45)):
            g[r][c] = "W"
    return g, None


def sorting():
    rows, cols = 37, 77
    g = [["." for _ in range(cols)] for _ in range(rows)]
    for r, c in ((0, 0), (0, cols - 1), (rows - 1, 0), (rows - 1, cols - 1)):
        g[r][c] = "@"
    for r in range(3, 34, 3):
        for c in range(2, 75, 3):
            g[r][c] = "@"
            for dr, dc in DELTAS.values():
                g[r + dr][c + dc] = "E"
    directions = aisle_directions(g)
    core = strongly_connected_core(g, directions)
    for r in (0, rows - 1):
        for c in range(2, 75, 3):
            # The one-way pattern leaves a few dead ends at the corners; slide a station
            # west until it sits where agents can both reach and leave it.
            while (r, c) not in core:
                c -= 1
            g[r][c] = "W"
    return g, directions


def aisle_directions(g):
    rows, cols = len(g), len(g[0])
    # Two rows east / two rows west; two columns south / two columns north.
    directions = {}
    for r in range(rows):
        for c in range(cols):
            if g[r][c] == "@":
                continue
            horizontal = "E" if (r // 2) % 2 == 0 else "W"
            vertical = "S" if (c // 2) % 2 == 0 else "N"
            mask = ""
            for name in NAMES:
                if name not in (horizontal, vertical):
                    continue
                dr, dc = DELTAS[name]
                nr, nc = r + dr, c + dc
                if 0 <= nr < rows and 0 <= nc < cols and g[nr][nc] != "@":
                    mask += name
            directions[(r, c)] = mask or "-"
    return directions


def strongly_connected_core(g, directions):
    """Cells of the largest strongly connected component under the aisle directions."""
    succ = {}
    for (r, c), mask in directions.items():
        succ[(r, c)] = [(r + DELTAS[m][0], c + DELTAS[m][1]) for m in mask if m != "-"]
    pred = {v: [] for v in succ}
    for v, ns in succ.items():
        for n in ns:
            pred[n].append(v)

    def reach(start, edges):
        seen, todo = {start}, [start]
        while todo:
            for n in edges[todo.pop()]:
                if n not in seen:
                    seen.add(n)
                    todo.append(n)
        return seen

    # The map centre lies in the main component.
    centre = (len(g) // 2 - 1, len(g[0]) // 2)
    return reach(centre, succ) & reach(centre, pred)


def corridor():
    return [list("....."), list(".@@@."), list(".....")], None


def crossing():
    rows = ["@@@@@..@@", "@@@@@@.@@", "@@@.@@.@@", "@@@.@@.@@", "@@@.@@.@@", ".........", "@@@.@@.@@"]
    return [list(r) for r in rows], None


def render(grid, directions):
    lines = [f"{len(grid)} {len(grid[0])}"] + ["".join(row) for row in grid]
    if directions:
        lines.append("DIRECTIONS")
        lines += [f"{r} {c} {m}" for (r, c), m in sorted(directions.items())]
    return "\n".join(lines) + "\n"


def main():
    out = pathlib.Path(sys.argv[1] if len(sys.argv) > 1 else "maps")
    out.mkdir(parents=True, exist_ok=True)
    for name, build in (("fulfillment", fulfillment), ("sorting", sorting), ("corridor", corridor), ("crossing", crossing)):
        (out / f"{name}.map").write_text(render(*build()))


if __name__ == "__main__":
    main()
