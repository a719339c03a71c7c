import random

import pytest

from inesh.core import Graph, ObservationKind, Observation, TrustTable


def random_instance(rng: random.Random, n_max: int = 12, real_costs: bool | None = None):
    """Random graph, trust table and threshold for oracle comparisons."""
    n = rng.randint(2, n_max)
    density = rng.uniform(0.2, 0.8)
    if real_costs is None:
        real_costs = rng.random() < 0.5
    g = Graph(n)
    for u in range(1, n + 1):
        for w in range(u + 1, n + 1):
            if rng.random() < density:
                g.add_edge(u, w, rng.uniform(0.5, 5.0) if real_costs else 1.0)
    table = TrustTable(initial=rng.choice([0.5, 1.0, 0.3]))
    observer = 1
    for v in range(2, n + 1):
        if rng.random() < 0.6:
            table.set(observer, v, rng.choice([0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 0.9, 1.0, rng.random()]))
        if rng.random() < 0.5:
            kinds = [rng.choice(list(ObservationKind)) for _ in range(rng.randint(1, 3))]
            table.observations[(observer, v)] = [Observation(k, float(i)) for i, k in enumerate(kinds)]
    threshold = rng.choice([0.0, 0.3, 0.5, 0.8, 1.0])
    dest = rng.randint(1, n)
    return g, table, 1, dest, threshold


@pytest.fixture
def diamond():
    # 1-2-4 and 1-3-4, unit costs
    return Graph.from_edges(4, [(1, 2), (2, 4), (1, 3), (3, 4)])


# -- acceptance reporting -------------------------------------------------------

def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")
    config._criteria = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call" and report.passed:
        return
    number, title = mark.args
    detail = dict(item.user_properties).get("detail", "")
    status = "PASS" if report.passed else "FAIL"
    item.config._criteria[number] = (status, title, detail)


def pytest_terminal_summary(terminalreporter, config):
    criteria = getattr(config, "_criteria", {})
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(criteria):
        status, title, detail = criteria[number]
        line = f"{status} [{number}] {title}"
        terminalreporter.write_line(f"{line} :: {detail}" if detail else line)
