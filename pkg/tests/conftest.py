import functools
import os

from hypothesis import HealthCheck, settings

from tessfault.automaton import build_automaton
from tessfault.tessellation import TessellationSpec, build_tessellation

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@functools.lru_cache(maxsize=None)
def tess(p, q, G, allow_spherical=False):
    return build_tessellation(TessellationSpec(p, q, G, allow_spherical=allow_spherical))


@functools.lru_cache(maxsize=None)
def automaton(p, q, G, weakening=None, kappa=1):
    return build_automaton(tess(p, q, G), weakening, kappa)


# one verdict line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = {}


def record_criterion(n, ok, detail):
    line = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"
    ACCEPTANCE_LINES[n] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
