"""Tests for the model catalog, the scheme context and the built-in HLPN rules."""

import re
import sys

import pytest

sys.path.insert(0, 'src')
from petriproof.catalog import (
    COMPOSITES,
    MODEL_NAMES,
    catalog,
    fuse_nets,
    instantiate,
    model_source,
    parse_model_id,
)
from petriproof.context import PROVER_ID, SENSING_TIME, build_context
from petriproof.exceptions import TokenTypeError, UnknownModelError, UnknownNodeError
from petriproof.models.cpn import CpnModel
from petriproof.models.net import ModelId, Net
from petriproof.models.scheme import ContextInfo, VerifiedContext
from petriproof.rules import hlpn_rules
from petriproof.scheme import generate_keys, sign, verify, verify_location_proof
from petriproof.sim import bounded_explore, run_trace

WORKFLOW_PREFIXES = {
    "ecdsa-keygen": "keygen",
    "ecdsa-siggen": "siggen",
    "ecdsa-sigverify": "sigverify",
    "lps-calc-location": "calc",
    "lps-gen-proof": "genproof",
    "lps-verify-proof": "verifyproof",
}


class TestCatalog:
    """Catalog listing and model ids."""

    def test_listing(self):
        """Six HLPNs and twelve CPNs, plus two composites on request."""
        entries = catalog()
        assert len(entries) == 18
        assert [str(m) for m in entries[:6]] == list(MODEL_NAMES)
        assert str(entries[6]) == "ecdsa-keygen/cpn/untimed"
        assert str(entries[7]) == "ecdsa-keygen/cpn/timed"
        with_composites = catalog(include_composites=True)
        assert len(with_composites) == 20
        assert [m.name for m in with_composites[-2:]] == list(COMPOSITES)

    @pytest.mark.parametrize("text,expected", [
        ("lps-gen-proof", ModelId(name="lps-gen-proof", layer="hlpn")),
        ("lps-gen-proof/hlpn", ModelId(name="lps-gen-proof", layer="hlpn")),
        ("lps-gen-proof/cpn", ModelId(name="lps-gen-proof", layer="cpn", timing="untimed")),
        ("lps-gen-proof/cpn/timed", ModelId(name="lps-gen-proof", layer="cpn", timing="timed")),
        ("ecdsa-full", ModelId(name="ecdsa-full", layer="hlpn")),
    ])
    def test_parse_model_id(self, text, expected):
        """Bare names select the HLPN, `/cpn` the untimed CPN."""
        assert parse_model_id(text) == expected

    @pytest.mark.parametrize("text", ["ecdsa", "ecdsa-keygen/hlpn/timed", "ecdsa-keygen/pt", "ecdsa-full/cpn",
                                      "ecdsa-keygen/cpn/timed/x"])
    def test_invalid_model_id(self, text):
        """Unknown names, layers and timings are rejected."""
        with pytest.raises(UnknownModelError):
            parse_model_id(text)

    def test_timing_needs_cpn(self):
        """HLPN ids carry no timing and CPN ids need one."""
        with pytest.raises(ValueError):
            ModelId(name="ecdsa-keygen", layer="hlpn", timing="timed")
        with pytest.raises(ValueError):
            ModelId(name="ecdsa-keygen", layer="cpn")

    def test_composites_have_no_source(self):
        """Composites are assembled, not read."""
        with pytest.raises(UnknownModelError):
            model_source(ModelId(name="lps-full", layer="hlpn"))

    @pytest.mark.parametrize("model_id", catalog(include_composites=True), ids=str)
    def test_every_entry_compiles(self, model_id):
        """Every entry compiles to the right layer."""
        model = instantiate(model_id)
        assert isinstance(model, CpnModel if model_id.layer == "cpn" else Net)
        assert model.name == model_id.name

    def test_cpn_initial_marking(self):
        """Generate Location Proof starts with its six symbolic inputs."""
        model = instantiate(parse_model_id("lps-gen-proof/cpn"))
        assert sorted(model.initial_marking["Inputs"]) == sorted(["ID", "Time", "Loc", "Act", "PRK", "H"])

    def test_composite_fusion(self):
        """Interface places fuse; every other place and transition keeps its component prefix."""
        net = instantiate(parse_model_id("ecdsa-full"))
        assert "siggen.ComputeHash" in net.transition_ids
        assert "sigverify.ComputeHash" in net.transition_ids
        assert {"keygen.Inputs", "siggen.Inputs", "sigverify.Inputs"} <= set(net.place_ids)
        assert "Inputs" not in net.place_ids
        assert net.place_ids.count("HashIntegerStore") == 1
        assert net.place("HashIntegerStore").type == "int"
        assert net.place("sigverify.SignatureStore").type == "SIG"
        assert net.place("siggen.SignatureStore").type == "SIGPART"
        assert len(net.transition_ids) == sum(
            len(instantiate(ModelId(name=c, layer="hlpn")).transition_ids) for c in COMPOSITES["ecdsa-full"])

    def test_fusion_rejects_type_clash(self):
        """Fusing places whose types differ is an error, not an untyped place."""
        siggen = instantiate(parse_model_id("ecdsa-siggen"))
        sigverify = instantiate(parse_model_id("ecdsa-sigverify"))
        with pytest.raises(TokenTypeError, match="SignatureStore"):
            fuse_nets("sig", [("siggen", siggen), ("sigverify", sigverify)], ("SignatureStore",))
        with pytest.raises(UnknownNodeError):
            fuse_nets("sig", [("siggen", siggen), ("sigverify", sigverify)], ("KeysStore",))

    @pytest.mark.parametrize("name,verdict_place", [
        ("ecdsa-full", "sigverify.AcceptReject"),
        ("lps-full", "verifyproof.AcceptRejectLocationProof"),
    ])
    def test_composites_execute(self, name, verdict_place):
        """Both composites explore and run to honest verdicts."""
        net = instantiate(parse_model_id(name))
        assert bounded_explore(net, 2000).states > 1
        verdicts = []
        for seed in range(30):
            trace = run_trace(net, 300, seed=seed)
            verdicts.extend(trace.final_marking.tokens(verdict_place))
        assert verdicts
        assert set(verdicts) == {"Accept"}


class TestContext:
    """Per-run scheme state."""

    def test_seeded(self):
        """Same seed, same keys and proof."""
        a, b = build_context(seed=4), build_context(seed=4)
        assert a.keys == b.keys
        assert a.verifier_input == b.verifier_input

    def test_honest_inputs(self):
        """The verification input holds a signature over the message under the prover's key."""
        ctx = build_context(seed=2)
        vi = ctx.verification_input
        assert verify(vi.signature, vi.Q, vi.m, ctx.dp)
        assert ctx.prover_input.id == PROVER_ID
        assert ctx.prover_input.time == SENSING_TIME
        assert verify_location_proof(ctx.verifier_input.proof, ctx.keys.Q, ctx.lbs, ctx.dp).accepted

    def test_clone_scenario(self):
        """The clone's proof is signed with a key the LBS does not know."""
        ctx = build_context(seed=2, scenario="clone")
        assert ctx.foreign_keys.d != ctx.keys.d
        outcome = verify_location_proof(ctx.verifier_input.proof, ctx.keys.Q, ctx.lbs, ctx.dp)
        assert outcome.reason == "signature"

    def test_records(self):
        """Recorded values and counters are kept per function."""
        ctx = build_context()
        ctx.record("genKeys", 1)
        ctx.record("genKeys", 2)
        assert ctx.values["genKeys"] == [1, 2]
        assert [ctx.next_index("compCoord") for _ in range(3)] == [0, 1, 2]


def _fire(rules, name, **variables):
    return rules[name].action(variables)


class TestRules:
    """The host rules compute the real scheme values."""

    @pytest.fixture
    def ctx(self):
        """Toy-profile context."""
        return build_context(seed=1)

    @pytest.fixture
    def rules(self, ctx):
        """Rules closing over `ctx`."""
        return hlpn_rules(ctx)

    def test_keygen(self, ctx, rules):
        """Domain parameters validate and the keys are generated on the bound parameters."""
        dp = _fire(rules, "keygen.inputs")["Inputs"][0]
        assert _fire(rules, "keygen.generate_domain_parameters", i=dp) == {"DomainParametersStore": [ctx.dp]}
        assert _fire(rules, "keygen.generate_keys", dp=dp) == {"KeysStore": [ctx.keys]}
        other = build_context(seed=1, profile="standard").dp
        (keys,) = _fire(rules, "keygen.generate_keys", dp=other)["KeysStore"]
        assert keys == generate_keys(other, seed=1)
        assert keys.Q != ctx.keys.Q

    def test_siggen_matches_sign(self, ctx, rules):
        """The signature pair equals what `sign` produces with the same nonce."""
        si = ctx.signing_input
        c = _fire(rules, "siggen.compute_coordinates", i=si)["CoordinatesStore"][0]
        e = _fire(rules, "siggen.compute_hash", i=si)["HashIntegerStore"][0]
        (_, r), = _fire(rules, "siggen.generate_signature_pair_1", c=c)["SignatureStore"]
        (_, s), = _fire(rules, "siggen.generate_signature_pair_2", i=si, e=e)["SignatureStore"]
        expected = sign(si.m, si.d, ctx.dp, nonce=si.k)
        assert (r, s) == (expected.r, expected.s)

    def test_sigverify_chain(self, ctx, rules):
        """Running the verification rules in workflow order accepts."""
        vi = ctx.verification_input
        sig = _fire(rules, "sigverify.get_signature_integers", i=vi)["SignatureStore"][0]
        e = _fire(rules, "sigverify.compute_hash", i=vi)["HashIntegerStore"][0]
        w = _fire(rules, "sigverify.calculate_point", sig=sig)["PointStore"][0]
        c = _fire(rules, "sigverify.compute_verification_coordinates", sig=sig, e=e, w=w)["CoordinatesStore"][0]
        assert _fire(rules, "sigverify.verify_signatures", i=vi, c=c) == {"AcceptReject": ["Accept"]}

    def test_distance(self, rules):
        """(1, 2) to (4, 6) is 5 apart."""
        coords = _fire(rules, "calc.inputs")["Inputs"][0]
        placement = _fire(rules, "calc.determine_2d_point_space", i=coords)["PointsStore"][0]
        assert _fire(rules, "calc.calculate_distance", ps=placement) == {"ProversDistanceStore": [5.0]}

    def test_gen_proof_chain(self, ctx, rules):
        """Sensed, stored and requested context yields a proof that verifies."""
        pi = _fire(rules, "genproof.inputs")["Inputs"][0]
        cis = _fire(rules, "genproof.sense_context_information", i=pi)["ContextInformationStore"][0]
        lis = _fire(rules, "genproof.store_context_information", cis=cis)["LBSInformationStore"][0]
        lps = _fire(rules, "genproof.request_location_proof", lis=lis)["LocationProofsStore"][0]
        assert rules["genproof.generate_location_proof"].guard({"lps": lps, "cis": cis})
        proof = _fire(rules, "genproof.generate_location_proof", i=pi, cis=cis, lps=lps)["SignedLocationProofsStore"][0]
        assert verify_location_proof(proof, ctx.keys.Q, ctx.lbs, ctx.dp).accepted

    def test_gen_proof_guard(self, rules):
        """A request for another epoch does not match the sensed context."""
        pi = _fire(rules, "genproof.inputs")["Inputs"][0]
        cis = _fire(rules, "genproof.sense_context_information", i=pi)["ContextInformationStore"][0]
        lps = _fire(rules, "genproof.request_location_proof", lis=cis)["LocationProofsStore"][0]
        later = lps.model_copy(update={"time": lps.time + 1})
        assert not rules["genproof.generate_location_proof"].guard({"lps": later, "cis": cis})

    @pytest.mark.parametrize("scenario,verdict", [("honest", "Accept"), ("clone", "Reject")])
    def test_verify_proof_chain(self, scenario, verdict):
        """Honest proofs are accepted, cloned devices rejected."""
        rules = hlpn_rules(build_context(seed=1, scenario=scenario))
        vi = _fire(rules, "verifyproof.inputs")["Inputs"][0]
        eci = _fire(rules, "verifyproof.extract_context_information", i=vi)["ExtractedContextInformationStore"][0]
        assert isinstance(eci, ContextInfo)
        lps = _fire(rules, "verifyproof.accept_location_proof_request", eci=eci)["LocationProofsStore"][0]
        assert rules["verifyproof.verify_context_information"].guard({"eci": eci, "lps": lps})
        vis = _fire(rules, "verifyproof.verify_context_information", eci=eci, lps=lps)["VerifiedInformationStore"][0]
        assert isinstance(vis, VerifiedContext)
        out = _fire(rules, "verifyproof.verify_location_proof", i=vi, vis=vis)
        assert out == {"AcceptRejectLocationProof": [verdict]}

    def test_missing_context_blocks_verification(self, ctx, rules):
        """Without an LBS record the extract rule yields NotFound and no request is accepted."""
        vi = ctx.verifier_input
        moved = vi.model_copy(update={"proof": vi.proof.model_copy(
            update={"context": vi.proof.context.model_copy(update={"time": 5})})})
        eci = _fire(rules, "verifyproof.extract_context_information", i=moved)["ExtractedContextInformationStore"][0]
        assert eci == "NotFound"
        assert not rules["verifyproof.accept_location_proof_request"].guard({"eci": eci})

    def test_accepted_request_follows_extracted_context(self, ctx, rules):
        """The request names the prover and time of the extracted context token."""
        eci = ContextInfo(id=11, time=250, loc=3.0, actv="walking")
        (request,) = _fire(rules, "verifyproof.accept_location_proof_request", eci=eci)["LocationProofsStore"]
        assert (request.prover_id, request.time) == (11, 250)
        assert request.verifier_id == ctx.verifier_input.verifier_id

    @pytest.mark.parametrize("name", MODEL_NAMES)
    def test_bound_rules_use_workflow_prefix(self, name):
        """Each HLPN binds only rules of its own workflow."""
        prefix = WORKFLOW_PREFIXES[name]
        binds = re.findall(r"^bind \S+ = (\S+)", model_source(ModelId(name=name, layer="hlpn")), re.MULTILINE)
        assert binds
        assert all(b.startswith(prefix + ".") for b in binds)
        assert all(r.split(".")[0] in WORKFLOW_PREFIXES.values() for r in hlpn_rules())
