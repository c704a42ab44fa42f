"""Small grid-convergence study of the pressure pulse.

Uses coarse levels so it finishes in seconds; the acceptance suite runs
the full 40-80-160 study against a 320 reference.
"""
import sys

from wbkt import config_for, run_convergence


def main(levels=(20, 40, 80)):
    cfg = config_for("perturbed_x", cfl=0.485)
    table = run_convergence(cfg, list(levels))
    print(table.format())


if __name__ == "__main__":
    main(tuple(int(n) for n in sys.argv[1:]) or (20, 40, 80))
