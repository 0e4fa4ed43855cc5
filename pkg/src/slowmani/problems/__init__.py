"""Problem files shipped with the package."""

from importlib import resources

from ..frontend import parse_problem_file

NAMES = ("parabola", "iffl", "d2f", "feliu", "valorani", "vdp_embedded")


def source(name):
    return resources.files(__package__).joinpath(f"{name}.gspt").read_text(encoding="utf-8")


def load(name):
    """Parse a bundled problem by name, e.g. ``load("iffl")``."""
    if name not in NAMES:
        raise KeyError(f"no bundled problem {name!r}; choose from {', '.join(NAMES)}")
    return parse_problem_file(source(name))


def path(name):
    return resources.files(__package__).joinpath(f"{name}.gspt")


# Numeric parameters that a bundled file expresses through an irrational
# combination of rate constants. Maps problem name -> {param: (inputs, fn)}.
DERIVED_PARAMS = {
    "feliu": {"kappa": (("k1", "km1"), lambda k1, km1: (k1 / km1) ** (1.0 / 3.0))},
}
