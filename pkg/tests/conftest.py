import pathlib

import pytest

from reconfcheck.formulas import parse_ftpl
from reconfcheck.model import parse_config
from reconfcheck.operations import parse_ops
from reconfcheck.paths import compile_path, parse_path
from reconfcheck.properties import parse_definitions

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture(scope="session")
def httpd_config():
    return parse_config(FIXTURES.joinpath("httpd.json").read_text())


@pytest.fixture(scope="session")
def httpd_ops():
    return parse_ops(FIXTURES.joinpath("httpd.ops.json").read_text())


@pytest.fixture(scope="session")
def httpd_defs():
    return parse_definitions(FIXTURES.joinpath("httpd.defs").read_text())


@pytest.fixture(scope="session")
def example3_expr(httpd_ops):
    return parse_path(FIXTURES.joinpath("example3.rpx").read_text(), httpd_ops)


@pytest.fixture(scope="session")
def example3_automaton(example3_expr):
    return compile_path(example3_expr)


@pytest.fixture(scope="session")
def example2_formula(httpd_defs, httpd_ops):
    return parse_ftpl(FIXTURES.joinpath("example2.ftpl").read_text(), httpd_defs, httpd_ops)
