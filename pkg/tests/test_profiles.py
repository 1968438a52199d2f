"""Metric profiles: the builtin table, its algebraic laws, and the validators."""

import itertools

import pytest

from pqra.circuits import GATES, WireType, random_circuits
from pqra.indices import NatLit, evaluate
from pqra.profiles import (
    CMI,
    ProfileKind,
    RMI,
    ValidationReport,
    builtin_profiles,
    get_profile,
    validate_cmi_sound,
    validate_local_coherence,
    validate_well_behaved,
)

Q = WireType.QUBIT
B = WireType.BIT

GLOBAL_NAMES = ("width", "gatecount", "gatecount_all", "tcount", "qubitcount", "bitcount")


def test_builtin_roster():
    names = [p.name for p in builtin_profiles()]
    assert names == list(GLOBAL_NAMES) + ["depth"]
    for p in builtin_profiles():
        expected = ProfileKind.LOCAL if p.name == "depth" else ProfileKind.GLOBAL
        assert p.kind is expected


def test_get_profile_aliases():
    assert get_profile("qubits") is get_profile("qubitcount")
    assert get_profile("bits") is get_profile("bitcount")
    assert get_profile("width").name == "width"


def test_get_profile_unknown():
    with pytest.raises(KeyError):
        get_profile("latency")


def test_profiles_are_singletons():
    assert get_profile("width") is get_profile("width")


class TestCmiArithmetic:
    """Hand-checked values of the circuit-level metric functions."""

    def test_width_append(self):
        # appending onto a width-2 circuit with 1 bystander wire and a
        # 1-input/2-output gate needs one extra slot
        f = get_profile("width").cmi.append_fn
        assert f("Init0", 2, 1, 1, 2) == 3
        assert f("Init0", 5, 1, 1, 2) == 5  # wide circuits absorb the gate

    def test_width_identity(self):
        assert get_profile("width").cmi.id_fn((Q, B)) == 2
        assert get_profile("qubitcount").cmi.id_fn((Q, B)) == 1
        assert get_profile("bitcount").cmi.id_fn((Q, B)) == 1
        assert get_profile("gatecount").cmi.id_fn((Q, B)) == 0

    def test_gatecount_append_respects_counting_flag(self):
        f = get_profile("gatecount").cmi.append_fn
        assert f("H", 5, 0, 1, 1) == 6
        assert f("Discard", 5, 0, 1, 0) == 5
        assert f("Init0", 5, 0, 0, 1) == 5
        assert get_profile("gatecount_all").cmi.append_fn("Discard", 5, 0, 1, 0) == 6

    def test_tcount_append(self):
        f = get_profile("tcount").cmi.append_fn
        assert f("T", 0, 3, 1, 1) == 1
        assert f("H", 7, 3, 1, 1) == 7

    def test_depth_gate(self):
        g = get_profile("depth").cmi.gate_fn
        assert g("CNOT", 1, [3, 5]) == 6
        assert g("CNOT", 2, [3, 5]) == 6
        assert g("H", 1, [0]) == 1
        assert g("Init0", 1, []) == 0  # initializations start fresh wires at 0
        assert g("Meas", 1, [4]) == 5  # measurement counts as a gate

    def test_global_profiles_have_trivial_gate_fn(self):
        for name in GLOBAL_NAMES:
            assert get_profile(name).cmi.gate_fn("H", 1, [9]) == 0


def test_symbolic_templates_agree_with_callables():
    """The index-term templates and the plain functions must compute the same
    thing — simplification and SMT export go through the templates."""
    grid = range(4)
    for p in builtin_profiles():
        for gate in sorted(GATES):
            tmpl = p.cmi.append_sym(gate)
            for n, l, h, k in itertools.product(grid, grid, grid, grid):
                want = p.cmi.append_fn(gate, n, l, h, k)
                got = evaluate(tmpl(NatLit(n), NatLit(l), NatLit(h), NatLit(k)), {}, p)
                assert got == want, (p.name, gate, n, l, h, k)
            decl = GATES[gate]
            for pos in range(1, len(decl.outputs) + 1):
                gt = p.cmi.gate_sym(gate, pos)
                for args in itertools.product(grid, repeat=len(decl.inputs)):
                    want = p.cmi.gate_fn(gate, pos, list(args))
                    got = evaluate(gt([NatLit(a) for a in args]), {}, p)
                    assert got == want, (p.name, gate, pos, args)


class TestWellBehaved:
    @pytest.mark.parametrize("name", [p.name for p in builtin_profiles()])
    def test_builtins_pass(self, name):
        report = validate_well_behaved(get_profile(name).rmi, 16)
        assert report.ok, report.render()

    def test_first_projection_seq_is_rejected(self):
        broken = RMI(0, lambda w: 1, lambda a, b: a, lambda a, b: a + b)
        report = validate_well_behaved(broken, 8)
        assert not report.ok
        assert report.constraint == "seq-identity"
        assert report.witness == (1,)  # 0 `seq` 1 = 0, not 1

    def test_nonmonotone_par_is_rejected(self):
        broken = RMI(0, lambda w: 0,
                     lambda a, b: a + b,
                     lambda a, b: max(a, b) if (a, b) != (1, 1) else 0)
        report = validate_well_behaved(broken, 8)
        assert not report.ok

    def test_sequencing_must_be_max_when_wires_count(self):
        # plus-sequencing is fine for sizeless wires but not for width-style ones
        broken = RMI(0, lambda w: 1, lambda a, b: a + b, lambda a, b: a + b)
        report = validate_well_behaved(broken, 8)
        assert not report.ok
        assert report.constraint in ("seq-is-max", "wire-distributes")

    def test_render(self):
        assert validate_well_behaved(get_profile("width").rmi, 4).render() == "pass"
        bad = validate_well_behaved(RMI(0, lambda w: 1, lambda a, b: a, lambda a, b: a + b), 4)
        assert bad.render().startswith("FAIL seq-identity witness=(1,)")


class TestLocalCoherence:
    @pytest.mark.parametrize("name", GLOBAL_NAMES)
    def test_builtin_pairs_cohere(self, name):
        p = get_profile(name)
        report = validate_local_coherence(p.rmi, p.cmi, 8)
        assert report.ok, report.render()

    def test_depth_pair_coheres(self):
        p = get_profile("depth")
        assert validate_local_coherence(p.rmi, p.cmi, 8).ok

    def test_mismatched_pair_is_rejected(self):
        # a counting RMI cannot price the width CMI's identity layers
        report = validate_local_coherence(
            get_profile("gatecount").rmi, get_profile("width").cmi, 8
        )
        assert not report.ok
        assert report.constraint == "id-extension"
        assert report.witness is not None

    def test_mismatched_pair_other_direction(self):
        report = validate_local_coherence(
            get_profile("width").rmi, get_profile("gatecount").cmi, 8
        )
        assert not report.ok
        assert report.constraint == "append-seq"


class TestCmiSound:
    CORPUS = random_circuits(24, seed=7, max_gates=10)

    @pytest.mark.parametrize("name", [p.name for p in builtin_profiles()])
    def test_bounds_dominate_oracles(self, name):
        report = validate_cmi_sound(get_profile(name), self.CORPUS)
        assert report.ok, report.render()

    def test_exactness_is_reported(self):
        report = validate_cmi_sound(get_profile("gatecount"), self.CORPUS)
        assert report.detail == "bounds exactly equal oracles"

    def test_violations_carry_a_witness(self):
        rigged = get_profile("gatecount")
        broken = type(rigged)(
            "gatecount", rigged.rmi, rigged.cmi,
            lambda c: rigged.oracle(c) + 1,  # oracle inflated past the bound
            rigged.kind,
        )
        report = validate_cmi_sound(broken, self.CORPUS)
        assert not report.ok
        assert report.constraint == "global-bound"


def test_validation_report_is_plain_data():
    r = ValidationReport(False, "seq-identity", (1,), "0 seq 1 = 0")
    assert (r.ok, r.constraint, r.witness) == (False, "seq-identity", (1,))


def test_cmi_fields_are_callables():
    c = get_profile("width").cmi
    assert isinstance(c, CMI)
    assert callable(c.id_fn) and callable(c.append_fn) and callable(c.gate_fn)
    assert callable(c.append_sym) and callable(c.gate_sym)


def test_rmi_kind_tags_drive_simplification():
    assert get_profile("width").rmi.seq_kind == "max"
    assert get_profile("width").rmi.par_kind == "plus"
    assert get_profile("gatecount").rmi.seq_kind == "plus"
    assert get_profile("depth").rmi.seq_kind == "max"
