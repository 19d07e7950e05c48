import random

import pytest

from gensing.lattice import GraphError, validate_graph


def chain(n, euler=-2):
    return validate_graph([(f"a{i}", euler) for i in range(1, n + 1)],
                          [(f"a{i}", f"a{i + 1}") for i in range(1, n)])


def dn(n):
    verts = [(f"a{i}", -2) for i in range(1, n + 1)]
    edges = [(f"a{i}", f"a{i + 1}") for i in range(1, n - 1)] + [(f"a{n - 2}", f"a{n}")]
    return validate_graph(verts, edges)


def en(n):
    verts = [(str(i), -2) for i in range(n)]
    edges = [(str(i), str(i + 1)) for i in range(n - 2)] + [("2", str(n - 1))]
    return validate_graph(verts, edges)


def star(center=-1, legs=(-4, -4, -4)):
    names = "abdefgh"
    verts = [("c", center)] + [(names[k], e) for k, e in enumerate(legs)]
    return validate_graph(verts, [("c", names[k]) for k in range(len(legs))])


def random_tree(rng, max_vertices=6, euler=(-6, -1), min_vertices=1, tries=1000):
    """A random negative-definite tree; rejection-sampled."""
    for _ in range(tries):
        n = rng.randint(min_vertices, max_vertices)
        verts = [(f"v{k}", rng.randint(*euler)) for k in range(n)]
        edges = [(f"v{k}", f"v{rng.randrange(k)}") for k in range(1, n)]
        try:
            return validate_graph(verts, edges)
        except GraphError:
            continue
    raise RuntimeError("no negative-definite tree found")


def random_trees(seed, count, **kw):
    rng = random.Random(seed)
    return [random_tree(rng, **kw) for _ in range(count)]


@pytest.fixture
def star_graph():
    return star()


@pytest.fixture
def rng():
    return random.Random(20261017)


# one line per acceptance criterion, printed after the run
ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[n])
