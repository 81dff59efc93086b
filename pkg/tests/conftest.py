import pytest


def pytest_addoption(parser):
    parser.addoption(
        "--run-stretch",
        action="store_true",
        default=False,
        help="run the multi-hour exhaustive search targets",
    )


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-stretch"):
        return
    skip = pytest.mark.skip(reason="stretch target; enable with --run-stretch")
    for item in items:
        if "stretch" in item.keywords:
            item.add_marker(skip)
