"""End-to-end command line tests: exit codes and byte-exact outputs."""

import json

import pytest

from quadcyl.cli import main
from quadcyl.pencils import Line, Pencil
from quadcyl.projective import ProjPoint, QuadForm, quadform_from_terms, vec
from quadcyl.serialize import (
    dumps, form_to_obj, line_from_obj, loads, pencil_from_obj,
    pencil_to_obj,
)
from quadcyl.tower import Tower, as_scalar, scalar_from_obj


@pytest.fixture(scope="module")
def docs(tmp_path_factory):
    root = tmp_path_factory.mktemp("docs")
    tw = Tower.rationals()
    split = quadform_from_terms(4, {(0, 1): 1, (2, 3): 1})
    (root / "split.qf").write_text(dumps(form_to_obj(split, tw)))
    definite = quadform_from_terms(3, {(0, 0): 1, (1, 1): 1, (2, 2): 1})
    (root / "definite.qf").write_text(dumps(form_to_obj(definite, tw)))
    conic = quadform_from_terms(3, {(0, 1): 1, (2, 2): 1})
    (root / "conic.qf").write_text(dumps(form_to_obj(conic, tw)))
    rank2 = quadform_from_terms(3, {(0, 1): 1})
    (root / "rank2.qf").write_text(dumps(form_to_obj(rank2, tw)))
    beta = quadform_from_terms(6, {(0, 1): 1, (2, 3): 1, (4, 5): 1})
    gamma = quadform_from_terms(6, {(0, 5): 1, (1, 2): 1, (3, 4): 1})
    (root / "hex.pf").write_text(dumps(pencil_to_obj(Pencil(beta, gamma),
                                                     tw)))
    return root


def run(*argv) -> int:
    return main([str(a) for a in argv])


class TestNormalize:

    def test_hyperbolic_definite_adjoins_minus_one(self, docs, tmp_path):
        out = tmp_path / "frame.json"
        assert run("normalize", "--hyperbolic", docs / "definite.qf",
                   "--out", out) == 0
        obj = loads(out.read_text())
        assert obj["style"] == "hyperbolic"
        assert obj["radicands"] == ["-1/1"]
        assert obj["pairs"] == 1 and obj["has_z"] is True

    def test_hyperbolic_congruence_witness(self, docs, tmp_path):
        out = tmp_path / "frame.json"
        run("normalize", "--hyperbolic", docs / "definite.qf", "--out", out)
        obj = loads(out.read_text())
        from quadcyl.charts import hyperbolic_target
        from quadcyl.tower import tower_from_obj
        tw = tower_from_obj(obj["radicands"])
        n = obj["size"]
        cells = [scalar_from_obj(c, tw) for c in obj["result"]]
        result = tuple(tuple(cells[i * n:(i + 1) * n]) for i in range(n))
        assert result == hyperbolic_target(n, obj["pairs"],
                                           obj["has_z"]).matrix

    def test_ctsq_identity_frame(self, docs, tmp_path):
        out = tmp_path / "frame.json"
        assert run("normalize", "--ctsq", "--point", "0,1,0",
                   docs / "conic.qf", "--out", out) == 0
        obj = loads(out.read_text())
        n = obj["size"]
        expect = ["1/1" if i == j else "0/1"
                  for i in range(n) for j in range(n)]
        assert obj["witness"] == expect

    def test_rank_too_low(self, docs, tmp_path, capsys):
        assert run("normalize", "--hyperbolic", docs / "rank2.qf") == 2
        assert "rank 2" in capsys.readouterr().err

    def test_missing_file(self, tmp_path):
        assert run("normalize", "--hyperbolic", tmp_path / "nope.qf") == 2


class TestConnect:

    def test_complement_connect_then_verify(self, docs, tmp_path):
        cert = tmp_path / "c.cert"
        assert run("connect", "complement", "--form", docs / "split.qf",
                   "--from", "1,1,0,0", "--to", "0,3,1,5", "--seed", 7,
                   "--out", cert) == 0
        assert run("verify", cert, "--form", docs / "split.qf",
                   "--out", tmp_path / "v.json") == 0

    def test_byte_identical_reruns(self, docs, tmp_path):
        a, b = tmp_path / "a.cert", tmp_path / "b.cert"
        for out in (a, b):
            run("connect", "complement", "--form", docs / "split.qf",
                "--from", "1,1,0,0", "--to", "0,3,1,5", "--seed", 7,
                "--out", out)
        assert a.read_bytes() == b.read_bytes()

    def test_equal_endpoints_zero_steps(self, docs, tmp_path):
        cert = tmp_path / "c.cert"
        assert run("connect", "complement", "--form", docs / "split.qf",
                   "--from", "1,1,0,0", "--to", "1,1,0,0",
                   "--out", cert) == 0
        assert loads(cert.read_text())["steps"] == []

    def test_quadric_connect_then_verify(self, docs, tmp_path):
        cert = tmp_path / "q.cert"
        assert run("connect", "quadric", "--form", docs / "split.qf",
                   "--from", "1,0,0,0", "--to", "0,0,1,0", "--seed", 5,
                   "--out", cert) == 0
        assert run("verify", cert, "--form", docs / "split.qf",
                   "--out", tmp_path / "v.json") == 0

    def test_ci_connect_then_verify(self, docs, tmp_path):
        cert = tmp_path / "x.cert"
        assert run("connect", "ci", "--pencil", docs / "hex.pf",
                   "--from", "1,0,0,0,0,0", "--to", "0,0,0,0,1,0",
                   "--seed", 3, "--out", cert) == 0
        assert run("verify", cert, "--pencil", docs / "hex.pf",
                   "--out", tmp_path / "v.json") == 0
        obj = loads((tmp_path / "v.json").read_text())
        assert obj["results"][0]["valid"] is True

    def test_ci_with_supplied_line(self, docs, tmp_path):
        line = tmp_path / "l.lf"
        assert run("find-line", "--pencil", docs / "hex.pf",
                   "--out", line) == 0
        cert = tmp_path / "x.cert"
        assert run("connect", "ci", "--pencil", docs / "hex.pf",
                   "--line", line, "--from", "1,0,0,0,0,0",
                   "--to", "0,1,0,0,0,0", "--out", cert) == 0
        assert run("verify", cert, "--pencil", docs / "hex.pf",
                   "--out", tmp_path / "v.json") == 0

    def test_point_off_quadric_rejected(self, docs, tmp_path, capsys):
        assert run("connect", "quadric", "--form", docs / "split.qf",
                   "--from", "1,1,0,0", "--to", "0,0,1,0") == 2

    def test_search_exhaustion_exit(self, docs, tmp_path):
        assert run("connect", "quadric", "--form", docs / "split.qf",
                   "--from", "1,0,0,0", "--to", "0,0,1,0",
                   "--retry-limit", 0) == 3

    def test_tower_limit_exit(self, docs, tmp_path):
        assert run("normalize", "--hyperbolic", docs / "definite.qf",
                   "--tower-limit", 0) == 4


class TestVerify:

    def make_cert(self, docs, tmp_path):
        cert = tmp_path / "c.cert"
        run("connect", "complement", "--form", docs / "split.qf",
            "--from", "1,1,0,0", "--to", "0,3,1,5", "--seed", 7,
            "--out", cert)
        return cert

    def test_corrupted_scalar_fails(self, docs, tmp_path):
        cert = self.make_cert(docs, tmp_path)
        bad = tmp_path / "bad.cert"
        bad.write_text(cert.read_text().replace('"5/3"', '"4/3"', 1))
        out = tmp_path / "v.json"
        assert run("verify", bad, "--form", docs / "split.qf",
                   "--out", out) == 1
        rep = loads(out.read_text())["results"][0]
        assert rep["valid"] is False
        assert "step" in rep["reason"]

    def test_wrong_form_fails(self, docs, tmp_path):
        cert = self.make_cert(docs, tmp_path)
        assert run("verify", cert, "--form", docs / "definite.qf",
                   "--out", tmp_path / "v.json") == 1

    def test_malformed_json_is_input_error(self, docs, tmp_path):
        bad = tmp_path / "broken.cert"
        bad.write_text("{nope")
        assert run("verify", bad, "--form", docs / "split.qf",
                   "--out", tmp_path / "v.json") == 2

    def test_parallel_matches_serial(self, docs, tmp_path):
        cert = self.make_cert(docs, tmp_path)
        one, two = tmp_path / "one.json", tmp_path / "two.json"
        assert run("verify", cert, cert, "--form", docs / "split.qf",
                   "--out", one) == 0
        assert run("verify", cert, cert, "--form", docs / "split.qf",
                   "--jobs", 2, "--out", two) == 0
        assert one.read_bytes() == two.read_bytes()

    def test_needs_exactly_one_reference(self, docs, tmp_path):
        cert = self.make_cert(docs, tmp_path)
        assert run("verify", cert) == 2
        assert run("verify", cert, "--form", docs / "split.qf",
                   "--pencil", docs / "hex.pf") == 2


class TestAuditAndBuilders:

    def test_eacx_build_and_audit(self, docs, tmp_path):
        pf = tmp_path / "diag.pf"
        assert run("eacx-build", "--lambdas", "0,1,2,3,4,5",
                   "--out", pf) == 0
        pen, _ = pencil_from_obj(loads(pf.read_text()))
        assert pen.beta.matrix[0][0] == as_scalar(1)
        assert pen.gamma.matrix[5][5] == as_scalar(5)
        line = tmp_path / "diag.lf"
        assert run("find-line", "--pencil", pf, "--out", line) == 0
        out = tmp_path / "audit.json"
        assert run("audit", "--pencil", pf, "--line", line,
                   "--out", out) == 0
        obj = loads(out.read_text())
        assert obj["smooth"] is True
        assert obj["image_rank"] in (3, 4)
        assert obj["degrees"]["total_degree"] == 3
        assert obj["round_trip_failures"] == 0

    def test_eacx_duplicate_is_input_error(self, tmp_path, capsys):
        assert run("eacx-build", "--lambdas", "0,1,1,3,4,5") == 2

    def test_audit_nonsmooth_pencil_exits_nonzero(self, docs, tmp_path,
                                                  capsys):
        line = tmp_path / "hex.lf"
        run("find-line", "--pencil", docs / "hex.pf", "--out", line)
        out = tmp_path / "audit.json"
        assert run("audit", "--pencil", docs / "hex.pf", "--line", line,
                   "--out", out) == 1
        obj = loads(out.read_text())
        assert obj["smooth"] is False
        # the chart itself is still healthy and fully reported
        assert obj["image_rank"] == 3
        assert obj["degrees"]["total_degree"] == 3
        assert obj["passed"] is True
        assert "not smooth" in capsys.readouterr().err

    def test_find_line_output_is_valid(self, docs, tmp_path):
        out = tmp_path / "l.lf"
        assert run("find-line", "--pencil", docs / "hex.pf",
                   "--out", out) == 0
        raw, _ = line_from_obj(loads(out.read_text()))
        beta = quadform_from_terms(6, {(0, 1): 1, (2, 3): 1, (4, 5): 1})
        gamma = quadform_from_terms(6, {(0, 5): 1, (1, 2): 1, (3, 4): 1})
        Line.through(Pencil(beta, gamma), raw.v1, raw.v2)

    def test_find_line_through_point(self, docs, tmp_path):
        out = tmp_path / "l.lf"
        assert run("find-line", "--pencil", docs / "hex.pf",
                   "--point", "1,0,0,0,0,0", "--out", out) == 0
        raw, _ = line_from_obj(loads(out.read_text()))
        assert raw.contains(ProjPoint(vec([1, 0, 0, 0, 0, 0])))

    def test_find_line_deterministic(self, docs, tmp_path):
        a, b = tmp_path / "a.lf", tmp_path / "b.lf"
        for out in (a, b):
            run("find-line", "--pencil", docs / "hex.pf", "--seed", 9,
                "--out", out)
        assert a.read_bytes() == b.read_bytes()
