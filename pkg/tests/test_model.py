import json
import random

import pytest

from generators import gen_configuration
from reconfcheck.errors import ParseError
from reconfcheck.model import (
    Binding,
    Component,
    Configuration,
    Parameter,
    PortRef,
    Value,
    config_equal,
    parse_config,
    serialize_config,
    validate_config,
)


def test_fixture_validates(httpd_config):
    assert validate_config(httpd_config) == []


def test_fixture_shape(httpd_config):
    assert sorted(httpd_config.components) == [
        "CacheHandler", "FileServer1", "RequestDispatcher", "RequestHandler",
        "RequestReceiver"]
    cache = httpd_config.component("CacheHandler")
    assert cache.parameters["memorySize"].value == Value("int", 100)
    assert len(httpd_config.bindings) == 4


def test_subcomponent_cycle_detected():
    a = Component(name="A", cls="K", subcomponents=frozenset({"B"}))
    b = Component(name="B", cls="K", subcomponents=frozenset({"A"}))
    violations = validate_config(Configuration(components={"A": a, "B": b}))
    cycle = [v for v in violations if "cycle" in v]
    assert cycle and "A" in cycle[0] and "B" in cycle[0]


def test_binding_type_mismatch_detected():
    src = Component(name="S", cls="K", outputs={"o": "int"})
    dst = Component(name="D", cls="K", inputs={"i": "string"})
    config = Configuration(
        components={"S": src, "D": dst},
        bindings=frozenset({Binding(PortRef("S", "o"), PortRef("D", "i"))}))
    assert any("type mismatch" in v for v in validate_config(config))


def test_composite_with_parameters_rejected():
    child = Component(name="B", cls="K")
    parent = Component(name="A", cls="K",
                       parameters={"p": Parameter("int", Value("int", 1))},
                       subcomponents=frozenset({"B"}))
    violations = validate_config(Configuration(components={"A": parent, "B": child}))
    assert any("composite" in v for v in violations)


def test_port_name_sets_must_be_disjoint():
    comp = Component(name="A", cls="K", inputs={"p": "data"}, outputs={"p": "data"})
    assert any("disjoint" in v for v in validate_config(Configuration(components={"A": comp})))


def test_config_equal_reflexive(httpd_config):
    assert config_equal(httpd_config, httpd_config)


def test_config_equal_ignores_listing_order(httpd_config):
    doc = json.loads(serialize_config(httpd_config))
    doc["bindings"].reverse()
    doc["components"].reverse()
    assert config_equal(parse_config(json.dumps(doc)), httpd_config)


def test_config_equal_sees_parameter_change(httpd_config):
    doc = json.loads(serialize_config(httpd_config))
    for comp in doc["components"]:
        for param in comp["parameters"]:
            if param["name"] == "memorySize":
                param["value"] = 200
    assert not config_equal(parse_config(json.dumps(doc)), httpd_config)


def test_roundtrip_fixture(httpd_config):
    assert config_equal(parse_config(serialize_config(httpd_config)), httpd_config)


def test_parse_rejects_missing_components_key():
    with pytest.raises(ParseError, match="components"):
        parse_config('{"bindings": []}')


def test_parse_rejects_duplicate_component_names():
    doc = {"components": [
        {"name": "A", "class": "K", "parameters": [], "inputs": [], "outputs": [],
         "subcomponents": []},
        {"name": "A", "class": "K", "parameters": [], "inputs": [], "outputs": [],
         "subcomponents": []}]}
    with pytest.raises(ParseError, match="duplicate"):
        parse_config(json.dumps(doc))


def test_parse_reports_json_position():
    with pytest.raises(ParseError, match="line 2"):
        parse_config('{\n  "components": oops\n}')


def test_value_comparisons():
    assert Value("int", 3).compare("<", Value("int", 5)) is True
    assert Value("int", 3).compare("=", Value("string", "3")) is None
    assert Value("string", "a").compare("<", Value("string", "b")) is None
    assert Value("bool", True).compare("!=", Value("bool", False)) is True


def test_generated_configs_validate_and_roundtrip():
    rng = random.Random(20260810)
    for _ in range(200):
        config = gen_configuration(rng)
        assert validate_config(config) == []
        assert config_equal(parse_config(serialize_config(config)), config)


def test_config_equal_is_an_equivalence():
    rng = random.Random(42)
    configs = [gen_configuration(rng) for _ in range(40)]
    for c in configs:
        assert config_equal(c, c)
    for a in configs[:12]:
        for b in configs[:12]:
            assert config_equal(a, b) == config_equal(b, a)
            for c in configs[:12]:
                if config_equal(a, b) and config_equal(b, c):
                    assert config_equal(a, c)
