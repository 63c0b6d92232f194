"""Entropy versus minimal-cut length for a few HIT networks.

Prints the fitted slope (bits per cut edge), intercept and worst residual
for every contiguous boundary region of each patch.
"""

from hitlab.hit import make_l_shift, make_left_right, make_star
from hitlab.network import assemble, rt_fit
from hitlab.tiling import build_tiling, contiguous_regions

CASES = [
    ("left_right(3)", (7, 3, 1), make_left_right(3)),
    ("left_right(3)", (7, 3, 2), make_left_right(3)),
    ("star(4, 1)", (5, 4, 2), make_star(4, 1)),
    ("star(4, 2)", (5, 4, 1), make_star(4, 2)),
    ("l_shift(4, [1])", (5, 4, 1), make_l_shift(4, [1])),
]


def main() -> None:
    print(f"{'spec':<18}{'tiling':<12}{'regions':>8}{'slope':>10}{'intercept':>12}{'residual':>12}")
    for name, pql, spec in CASES:
        g = build_tiling(*pql)
        regions = contiguous_regions(g.n_boundary)
        fit = rt_fit(assemble(g, spec), regions)
        print(f"{name:<18}{str(pql):<12}{len(regions):>8}{fit.slope:>10.4f}{fit.intercept:>12.2e}{fit.max_residual:>12.2e}")


if __name__ == "__main__":
    main()
