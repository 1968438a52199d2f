"""Circuit construction and the measurement oracles."""

import pytest

from pqra.circuits import (
    Circuit,
    CircuitError,
    ConsB,
    GATES,
    NilB,
    PairB,
    SingleB,
    WireType,
    append,
    bundle_labels,
    concat,
    identity,
    oracle_bit_width,
    oracle_depth,
    oracle_gatecount,
    oracle_gatecount_all,
    oracle_qubit_width,
    oracle_tcount,
    oracle_width,
    random_circuits,
    relabel,
    relabel_bundle,
    serialize,
)
from pqra.indices import NatLit

Q = WireType.QUBIT
B = WireType.BIT


def build_teleport():
    """The standard teleportation circuit: 2 inits, 8 gates, 2 discards.

    One qubit in, one qubit out; two ancillas measured away mid-flight.
    """
    c = identity([("a", Q)])
    c = append(c, "Init0", ())            # b
    b = c.gates[-1].outs[0]
    c = append(c, "Init0", ())            # c (the target half of the Bell pair)
    t = c.gates[-1].outs[0]
    c = append(c, "H", (t,))
    t = c.gates[-1].outs[0]
    c = append(c, "CNOT", (t, b))
    t, b = c.gates[-1].outs
    c = append(c, "CNOT", ("a", b))
    a, b = c.gates[-1].outs
    c = append(c, "H", (a,))
    a = c.gates[-1].outs[0]
    c = append(c, "Meas", (a,))
    ma = c.gates[-1].outs[0]
    c = append(c, "Meas", (b,))
    mb = c.gates[-1].outs[0]
    c = append(c, "CX_classical", (mb, t))
    mb, t = c.gates[-1].outs
    c = append(c, "CZ_classical", (ma, t))
    ma, t = c.gates[-1].outs
    c = append(c, "CDiscard", (mb,))
    c = append(c, "CDiscard", (ma,))
    return c


class TestTeleportGoldens:
    def test_gatecount(self):
        assert oracle_gatecount(build_teleport()) == 8

    def test_gatecount_all_includes_inits_and_discards(self):
        assert oracle_gatecount_all(build_teleport()) == 12

    def test_width(self):
        assert oracle_width(build_teleport()) == 3

    def test_kinded_widths(self):
        c = build_teleport()
        assert oracle_qubit_width(c) == 3
        assert oracle_bit_width(c) == 2

    def test_tcount(self):
        assert oracle_tcount(build_teleport()) == 0

    def test_depth_from_zero(self):
        c = build_teleport()
        depths = oracle_depth(c, {"a": 0})
        assert [depths[lab] for lab, _ in c.live] == [6]

    def test_one_qubit_in_one_out(self):
        c = build_teleport()
        assert [wt for _, wt in c.initial] == [Q]
        assert [wt for _, wt in c.live] == [Q]


def test_identity_width_counts_all_wires():
    c = identity([("l", Q), ("k", B)])
    assert oracle_width(c) == 2
    assert oracle_gatecount(c) == 0
    assert oracle_gatecount_all(c) == 0


def test_identity_rejects_duplicate_labels():
    with pytest.raises(CircuitError, match="duplicate"):
        identity([("l", Q), ("l", Q)])


def test_single_t_gate_tcount():
    c = append(identity([("q", Q)]), "T", ("q",))
    assert oracle_tcount(c) == 1
    assert oracle_gatecount(c) == 1


class TestAppendErrors:
    def setup_method(self):
        self.c = identity([("q", Q), ("b", B)])

    def test_unknown_gate(self):
        with pytest.raises(CircuitError, match="unknown gate"):
            append(self.c, "Toffoli", ("q",))

    def test_dead_label(self):
        c2 = append(self.c, "Meas", ("q",))
        with pytest.raises(CircuitError, match="not a live output"):
            append(c2, "H", ("q",))

    def test_wire_type_mismatch(self):
        with pytest.raises(CircuitError, match="wants Qubit"):
            append(self.c, "H", ("b",))

    def test_arity_mismatch(self):
        with pytest.raises(CircuitError, match="expects 2 inputs"):
            append(self.c, "CNOT", ("q",))

    def test_duplicated_input_label(self):
        with pytest.raises(CircuitError, match="duplicated"):
            append(self.c, "CNOT", ("q", "q"))

    def test_parameter_required(self):
        c2 = append(self.c, "Init0", ())
        q2 = c2.gates[-1].outs[0]
        with pytest.raises(CircuitError, match="requires a parameter"):
            append(c2, "CR", ("q", q2))

    def test_parameter_rejected(self):
        with pytest.raises(CircuitError, match="takes no parameter"):
            append(self.c, "H", ("q",), param=NatLit(2))


def test_append_accepts_bundles():
    c = identity([("q", Q), ("r", Q)])
    c = append(c, "CNOT", PairB(SingleB("q"), SingleB("r")))
    assert c.gates[-1].ins == ("q", "r")


def test_append_never_decreases_width():
    c = identity([("q", Q)])
    prev = oracle_width(c)
    for gate, ins in [("H", 1), ("Init0", 0), ("Meas", 1)]:
        args = tuple(lab for lab, _ in c.live[: ins])
        c = append(c, gate, args)
        w = oracle_width(c)
        assert w >= prev
        prev = w


def test_width_reuses_discarded_slots():
    # init, discard, init again: the second ancilla fits in the freed slot
    c = identity([("q", Q)])
    c = append(c, "Init0", ())
    a = c.gates[-1].outs[0]
    c = append(c, "Discard", (a,))
    c = append(c, "Init0", ())
    assert oracle_width(c) == 2


class TestConcat:
    def test_gatecount_additive(self):
        c = append(identity([("q", Q)]), "H", ("q",))
        out = c.gates[-1].outs[0]
        d = identity([(out, Q)])
        d = append(d, "X", (out,))
        d = append(d, "T", (d.gates[-1].outs[0],))
        whole = concat(c, d)
        assert oracle_gatecount(whole) == oracle_gatecount(c) + oracle_gatecount(d)
        assert oracle_gatecount_all(whole) == 3

    def test_interface_mismatch(self):
        c = identity([("q", Q)])
        d = identity([("r", Q)])
        with pytest.raises(CircuitError, match="interface mismatch"):
            concat(c, d)

    def test_wire_type_mismatch_at_interface(self):
        c = identity([("q", Q)])
        d = append(identity([("q", B)]), "CDiscard", ("q",))
        with pytest.raises(CircuitError, match="interface mismatch"):
            concat(c, d)

    def test_label_collision(self):
        c = append(identity([("q", Q), ("q0", Q)]), "H", ("q",))  # mints w0
        d = append(identity([("q0", Q)]), "H", ("q0",))  # independently mints w0
        with pytest.raises(CircuitError, match="collision"):
            concat(c, d)


class TestRelabel:
    def test_oracles_invariant(self):
        c = build_teleport()
        mapping = {lab: f"x_{i}" for i, lab in enumerate(sorted(c.all_labels()))}
        r = relabel(c, mapping)
        assert oracle_gatecount(r) == oracle_gatecount(c)
        assert oracle_width(r) == oracle_width(c)
        assert oracle_tcount(r) == oracle_tcount(c)
        da = oracle_depth(c, {"a": 0})
        db = oracle_depth(r, {mapping["a"]: 0})
        assert {mapping[k]: v for k, v in da.items()} == db

    def test_must_be_total(self):
        c = append(identity([("q", Q)]), "H", ("q",))
        with pytest.raises(CircuitError, match="not total"):
            relabel(c, {"q": "r"})

    def test_must_be_injective(self):
        c = append(identity([("q", Q)]), "H", ("q",))
        out = c.gates[-1].outs[0]
        with pytest.raises(CircuitError):
            relabel(c, {"q": "same", out: "same"})

    def test_relabel_bundle(self):
        b = ConsB(ConsB(NilB(), SingleB("a")), SingleB("b"))
        r = relabel_bundle(b, {"a": "x", "b": "y"})
        assert bundle_labels(r) == ("x", "y")


class TestDepthOracle:
    def test_init_starts_at_zero(self):
        c = append(identity([]), "Init0", ())
        (out,) = c.gates[-1].outs
        assert oracle_depth(c, {}) == {out: 0}

    def test_counting_gate_takes_max_plus_one(self):
        c = identity([("a", Q), ("b", Q)])
        c = append(c, "CNOT", ("a", "b"))
        o1, o2 = c.gates[-1].outs
        d = oracle_depth(c, {"a": 3, "b": 5})
        assert d == {o1: 6, o2: 6}

    def test_discard_does_not_deepen(self):
        c = identity([("a", Q), ("b", Q)])
        c = append(c, "H", ("a",))
        h = c.gates[-1].outs[0]
        c = append(c, "Discard", (h,))
        d = oracle_depth(c, {"a": 0, "b": 0})
        assert d == {"b": 0}

    def test_missing_input_depth(self):
        c = identity([("a", Q)])
        with pytest.raises(CircuitError, match="missing input depth"):
            oracle_depth(c, {})

    def test_pointwise_monotone_on_random_circuits(self):
        for c in random_circuits(12, seed=5, max_gates=8):
            ins = [lab for lab, _ in c.initial]
            lo = oracle_depth(c, {lab: 0 for lab in ins})
            hi = oracle_depth(c, {lab: 2 for lab in ins})
            for lab in lo:
                assert lo[lab] <= hi[lab]


def test_serialize_golden():
    c = identity([("q", Q)])
    c = append(c, "H", ("q",))
    h = c.gates[-1].outs[0]
    c = append(c, "Meas", (h,))
    m = c.gates[-1].outs[0]
    c = append(c, "CDiscard", (m,))
    assert serialize(c) == (
        "inputs q:Qubit\n"
        "H(q; w0)\n"
        "Meas(w0; w1)\n"
        "CDiscard(w1;)\n"
        "outputs \n"
    )


def test_serialize_prints_parameters():
    c = identity([("a", Q), ("b", Q)])
    c = append(c, "CR", ("a", "b"), param=NatLit(3))
    assert "CR[3](a,b; w0,w1)" in serialize(c)


def test_random_circuits_deterministic_and_bounded():
    xs = random_circuits(20, seed=42, max_gates=10)
    ys = random_circuits(20, seed=42, max_gates=10)
    assert [serialize(c) for c in xs] == [serialize(c) for c in ys]
    assert all(len(c.gates) <= 10 for c in xs)
    assert any(c.gates for c in xs)
    zs = random_circuits(20, seed=43, max_gates=10)
    assert [serialize(c) for c in xs] != [serialize(c) for c in zs]


def test_gate_registry_wire_kinds():
    assert GATES["Meas"].inputs == (Q,) and GATES["Meas"].outputs == (B,)
    assert GATES["CX_classical"].inputs == (B, Q)
    assert not GATES["Init0"].counts_as_gate
    assert not GATES["CDiscard"].counts_as_gate
    assert GATES["T"].is_t and not GATES["H"].is_t
    assert GATES["CR"].parameterized


def test_circuit_is_immutable():
    c = identity([("q", Q)])
    d = append(c, "H", ("q",))
    assert c.gates == () and len(d.gates) == 1
    assert isinstance(c, Circuit)
