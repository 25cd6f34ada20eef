from pathlib import Path

import pytest

from repocorpus.analysis import FrontendConfig, ScanError, scan_repository
from repocorpus.graph import EntityKind, RelationKind

from fixtures import expected

FIXTURES = Path(__file__).parent / "fixtures"
CPP_CFG = FrontendConfig(language="cpp", include_roots=["include"])
PY_CFG = FrontendConfig(language="python")


def keyed(graph):
    key = {e.id: (e.kind.value, e.name, e.file_path) for e in graph.entities.values()}
    ents = set(key.values())
    rels = {(r.kind.value, key[r.src], key[r.dst]) for r in graph.relations}
    return ents, rels


def write(root: Path, files: dict[str, str]) -> Path:
    for rel, text in files.items():
        p = root / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_text(text)
    return root


def test_empty_directory(tmp_path):
    assert scan_repository(tmp_path, CPP_CFG).entities == {}


def test_unreadable_root(tmp_path):
    with pytest.raises(ScanError):
        scan_repository(tmp_path / "missing", CPP_CFG)


def test_three_cpp_files(tmp_path):
    write(
        tmp_path,
        {
            "a.hpp": "int g(int x);\nint g(int x) { return x; }\n",
            "b.cpp": '#include "a.hpp"\nint f() { return g(1); }\n',
            "c.cpp": '#include "a.hpp"\n',
        },
    )
    g = scan_repository(tmp_path, FrontendConfig(language="cpp"))
    ents, rels = keyed(g)
    assert {e for e in ents if e[0] == "file"} == {("file", p, p) for p in ("a.hpp", "b.cpp", "c.cpp")}
    assert {e[1] for e in ents if e[0] == "function"} == {"f", "g"}
    assert sum(r[0] == "include" for r in rels) == 2
    assert {r for r in rels if r[0] == "call"} == {("call", ("function", "f", "b.cpp"), ("function", "g", "a.hpp"))}


def test_python_package_sibling_import(tmp_path):
    write(
        tmp_path,
        {
            "pkg/__init__.py": "",
            "pkg/a.py": "from .b import Thing\n",
            "pkg/b.py": "class Thing:\n    def one(self):\n        pass\n\n    def two(self):\n        pass\n",
        },
    )
    g = scan_repository(tmp_path, PY_CFG)
    ents, rels = keyed(g)
    assert len(g.files()) == 3
    assert [r for r in rels if r[0] == "dependency"] == [("dependency", ("file", "pkg/a.py", "pkg/a.py"), ("file", "pkg/b.py", "pkg/b.py"))]
    assert len(list(g.of_kind(EntityKind.CLASS))) == 1 and len(list(g.of_kind(EntityKind.METHOD))) == 2
    assert ("contain", ("class", "pkg.b.Thing", "pkg/b.py"), ("method", "pkg.b.Thing.one", "pkg/b.py")) in rels


def test_builtin_call_gives_diagnostic_only(tmp_path):
    write(tmp_path, {"m.py": "def f():\n    print('hi')\n"})
    g = scan_repository(tmp_path, PY_CFG)
    assert not [r for r in g.relations if r.kind is RelationKind.CALL]
    assert [(d.tag, d.message) for d in g.diagnostics] == [("builtin", "print")]


def test_ambiguous_call_across_unrelated_files(tmp_path):
    write(
        tmp_path,
        {
            "x.cpp": "int helper() { return 1; }\n",
            "y.cpp": "int helper() { return 2; }\n",
            "z.cpp": "int main() { return helper(); }\n",
        },
    )
    g = scan_repository(tmp_path, FrontendConfig(language="cpp"))
    assert not [r for r in g.relations if r.kind is RelationKind.CALL]
    assert [d.tag for d in g.diagnostics] == ["ambiguous"]


def test_overloads_of_equal_arity_fan_out(tmp_path):
    write(tmp_path, {"o.cpp": "int h(int a) { return a; }\nint h(double a) { return 0; }\nint k() { return h(1); }\n"})
    g = scan_repository(tmp_path, FrontendConfig(language="cpp"))
    assert len([r for r in g.relations if r.kind is RelationKind.CALL]) == 2


def test_macro_heavy_file_degrades_to_file_node(tmp_path):
    write(tmp_path, {"m.cpp": "#define X(a) a {\nX(int f())\n  return 1;\n}}}}\nint g() { return 2; }\n"})
    g = scan_repository(tmp_path, FrontendConfig(language="cpp"))
    [f] = g.files()
    assert "X(int f())" in f.body_text
    assert any(d.tag == "parse-error" for d in g.diagnostics)


def test_python_syntax_error_degrades(tmp_path):
    write(tmp_path, {"bad.py": "def f(:\n", "ok.py": "def g():\n    return 1\n"})
    g = scan_repository(tmp_path, PY_CFG)
    assert {f.file_path for f in g.files()} == {"bad.py", "ok.py"}
    assert [e.name for e in g.of_kind(EntityKind.FUNCTION)] == ["ok.g"]
    assert any(d.file_path == "bad.py" and d.tag == "parse-error" for d in g.diagnostics)


def test_exclude_globs(tmp_path):
    write(tmp_path, {"a.py": "", "vendor/b.py": ""})
    g = scan_repository(tmp_path, FrontendConfig(language="python", exclude_globs=["vendor/*"]))
    assert [f.file_path for f in g.files()] == ["a.py"]


def test_out_of_repo_includes_make_no_nodes(tmp_path):
    write(tmp_path, {"a.cpp": "#include <vector>\n#include \"nothere.h\"\nint f() { return 0; }\n"})
    g = scan_repository(tmp_path, FrontendConfig(language="cpp"))
    assert len(g.files()) == 1 and not [r for r in g.relations if r.kind is RelationKind.INCLUDE]


@pytest.mark.parametrize("repo,cfg,want_e,want_r", [
    ("cpp_repo", CPP_CFG, expected.CPP_ENTITIES, expected.CPP_RELATIONS),
    ("py_repo", PY_CFG, expected.PY_ENTITIES, expected.PY_RELATIONS),
])
def test_fixture_ground_truth(repo, cfg, want_e, want_r):
    ents, rels = keyed(scan_repository(FIXTURES / repo, cfg))
    assert ents == want_e
    assert rels - want_r == set(), "unexpected relations"
    assert want_r - rels == set(), "missing relations"


@pytest.mark.parametrize("repo,cfg", [("cpp_repo", CPP_CFG), ("py_repo", PY_CFG)])
def test_scan_invariants(repo, cfg):
    g = scan_repository(FIXTURES / repo, cfg)
    g.check_integrity()
    for r in g.relations:
        if r.kind is RelationKind.CALL:
            src, dst = g[r.src], g[r.dst]
            assert dst.kind is not EntityKind.FILE
            assert src.file_path == r.evidence.file_path
            assert src.span.start <= r.evidence.line <= src.span.end


@pytest.mark.parametrize("repo,cfg", [("cpp_repo", CPP_CFG), ("py_repo", PY_CFG)])
def test_scan_deterministic_across_workers(repo, cfg):
    import dataclasses

    a = scan_repository(FIXTURES / repo, cfg)
    b = scan_repository(FIXTURES / repo, dataclasses.replace(cfg, workers=4))
    assert keyed(a) == keyed(b)
    assert a.content_hash == b.content_hash


def test_config_validation():
    with pytest.raises(ValueError):
        FrontendConfig(language="cpp", include_roots=[])
    with pytest.raises(ValueError):
        FrontendConfig(language="java")
