import json
import re
from pathlib import Path

import pytest

import fbac

DEMO = Path(__file__).resolve().parents[2] / "demo"

POLICY = """\
SUBJECT alice
SUBJECT bob
FUNCTION grep 1
FUNCTION diff 2
OBJECT a.txt
OBJECT b.txt
ENTRY alice grep a.txt TRUE_RE:context=[0-5]\\nSTDIN:.*
ENTRY bob grep a.txt TRUE
ENTRY alice diff a.txt,b.txt TRUE
"""


@pytest.fixture
def tensor():
    return fbac.parse_policy(POLICY)


def test_decide_and_arity(tensor):
    assert tensor.decide("alice", "grep", ["a.txt"], {"context": "5"})["outcome"] == "Allow"
    assert tensor.decide("alice", "grep", ["a.txt"], {"context": "6"})["outcome"] == "Deny"
    assert tensor.decide("bob", "diff", ["a.txt", "b.txt"])["reason"] == "no-entry"
    assert tensor.lookup("alice", "grep", ["a.txt", "b.txt"]) == "N/A"
    assert tensor.lookup("bob", "grep", ["b.txt"]) == "FALSE"
    assert len(tensor) == 3
    assert tensor.functions == {"diff": 2, "grep": 1}


def test_policy_round_trip(tensor):
    again = fbac.parse_policy(fbac.serialize_policy(tensor))
    assert again.fingerprint() == tensor.fingerprint()


def test_errors_carry_codes(tensor):
    with pytest.raises(fbac.FbacError) as err:
        tensor.lookup("mallory", "grep", ["a.txt"])
    assert err.value.code == "UnknownSubject"
    with pytest.raises(fbac.FbacError) as err:
        fbac.parse_policy("ENTRY nobody grep x TRUE\n")
    assert err.value.code in {"UnknownSubject", "UnknownFunction", "UnknownObject"}


def test_canonical_serialization_matches_python_regex():
    s = fbac.canonical_serialize({"context": "3", "quiet": None}, "stdin text")
    assert s.endswith("\nSTDIN:stdin text")
    assert re.fullmatch(r"context=[0-5](;.*)?\nSTDIN:.*", s, re.S)
    pattern = fbac.decimal_at_most(37)
    for n in range(100):
        assert fbac.regex_full_match(pattern, str(n)) == (n <= 37)


def test_projections(tensor):
    authz = fbac.project(tensor, "authz", {"object": "a.txt"})
    cells = {(c["subject"], c["function"]): c["entry"] for c in authz["cells"]}
    assert cells[("bob", "grep")] == "TRUE"
    assert ("bob", "diff") not in cells  # N/A compressed away
    flist = fbac.project(tensor, "flist", {"subject": "alice", "object": "a.txt,b.txt"})
    assert "diff" in json.dumps(flist)
    assert "Authorization matrix" in fbac.project(tensor, "authz", {"object": "a.txt"}, text=True)


def test_lattice_compile():
    t = fbac.compile_lattice(
        """\
LEVEL 0 UNCLASSIFIED
LEVEL 1 SECRET
MODE confidentiality
SUBJECTCLASS analyst SECRET
PAIRCLASS read doc1 UNCLASSIFIED
PAIRCLASS read doc2 SECRET
"""
    )
    assert t.decide("analyst", "read", ["doc1"])["outcome"] == "Allow"
    assert t.decide("analyst", "read", ["doc2"])["outcome"] == "Allow"


def test_documents_and_questionnaire():
    adoc = fbac.import_plain_text("first para\n\nsecond para\n", "memo")
    assert fbac.normalize_adoc(adoc) == adoc
    authored = fbac.questionnaire_defaults(adoc, "alice", printable=False)
    assert '<forbidden functions="print"/>' in authored
    assert fbac.validate_adoc(authored) == []
    with pytest.raises(fbac.FbacError) as err:
        fbac.questionnaire_defaults(authored, "bob")
    assert err.value.code == "InconsistentDefaults"


def test_monitor_over_demo(tmp_path):
    m = fbac.Monitor(outbox=str(tmp_path / "outbox.jsonl"))
    m.load_directory(str(DEMO))
    assert m.documents == ["memo"]
    bob = m.authenticate("bob-token")
    assert (bob.subject, bob.role) == ("bob", "viewer")

    outcome, view = m.invoke(bob, "read", ["memo"])
    assert outcome == "Allow"
    kinds = [s["kind"] for s in view["segments"]]
    assert kinds == ["content", "redacted", "content"]
    assert "Initech" not in json.dumps(view)

    assert m.invoke(bob, "search", ["memo"], {"context": "2", "pattern": "Revenue"})[0] == "Allow"
    outcome, result = m.invoke(bob, "search", ["memo"], {"context": "3", "pattern": "Revenue"})
    assert (outcome, result) == ("Deny", {})

    alice = m.authenticate("alice-token")
    assert m.invoke(alice, "email", ["memo", "a2"], {"to": "carol@example.org"})[0] == "Allow"
    record = json.loads((tmp_path / "outbox.jsonl").read_text().splitlines()[0])
    assert "supervisor@localhost" in record["cc"]

    records = m.audit()
    assert [r["sequence"] for r in records] == [1, 2, 3, 4]
    assert len(m.audit(outcome="Deny")) == 1

    with pytest.raises(fbac.FbacError) as err:
        m.projection(bob, "authz", {"object": "memo/a1"})
    assert err.value.code == "Forbidden"
    with pytest.raises(fbac.FbacError):
        m.authenticate("stolen")
