"""Tests for SMT-LIB2 generation and validation."""

import sys

import pytest

sys.path.insert(0, 'src')
from petriproof.exceptions import SmtValidationError, UnknownPropertyError, UnknownRuleError, UnparseableOutputError
from petriproof.smtgen import (
    ALIASES,
    RULES,
    emit_property,
    emit_rule,
    parse_verdict,
    property_names,
    quote,
    render_script,
    resolve_property,
    validate_script,
)


class TestRules:
    """Per-rule fragments."""

    @pytest.mark.parametrize("rule", list(RULES))
    def test_fragment_is_well_formed(self, rule):
        """Every fragment validates once a check-sat closes it."""
        validate_script(render_script(emit_rule(rule)))

    def test_domain_parameters_fragment(self):
        """R1 ties gdp positions to its intermediates and position 6 to the function."""
        script = emit_rule("r1")
        assert script.name == "R1"
        assert "(assert (= (select |gdp| 1) (select |prime.field.order| 1)))" in script.assertions
        assert "(assert (= (select |gdp| 5) (select |cofactor| 5)))" in script.assertions
        function_line = script.assertions[-1]
        assert function_line.startswith("(assert (= (select |gdp| 6) (|Generate Domain Parameters| ")
        names = [d.name for d in script.declarations]
        assert names[0] == "gdp"
        assert "Generate Domain Parameters" in names

    def test_rule_without_function(self):
        """R4 has intermediates only."""
        script = emit_rule("R4")
        assert len(script.assertions) == 2
        assert all(d.sort == "(Array Int Int)" for d in script.declarations)

    def test_repeated_intermediate_declared_once(self):
        """mod.r appears twice in R5 but is declared once."""
        names = [d.name for d in emit_rule("R5").declarations]
        assert names.count("mod.r") == 1
        assert "mod" not in names

    @pytest.mark.parametrize("rule", ["", "R0", "R22", "gdp"])
    def test_unknown_rule(self, rule):
        """Only R1 to R21 exist."""
        with pytest.raises(UnknownRuleError):
            emit_rule(rule)


class TestProperties:
    """Whole-workflow property scripts."""

    def test_names(self):
        """Six properties, each aliased by its model."""
        assert property_names() == [
            "key-generation",
            "signature-generation",
            "signature-verification",
            "calculate-location",
            "generate-location-proof",
            "verify-location-proof",
        ]
        assert resolve_property("lps-gen-proof") == "generate-location-proof"
        assert sorted(ALIASES) == sorted([
            "ecdsa-keygen", "ecdsa-siggen", "ecdsa-sigverify", "lps-calc-location", "lps-gen-proof",
            "lps-verify-proof",
        ])

    def test_unknown_property(self):
        """Neither a property nor a model."""
        with pytest.raises(UnknownPropertyError):
            emit_property("liveness")

    @pytest.mark.parametrize("name", property_names())
    @pytest.mark.parametrize("with_bindings", [True, False])
    def test_well_formed(self, name, with_bindings):
        """Scripts validate with and without bindings."""
        text = render_script(emit_property(name, with_bindings=with_bindings))
        validate_script(text)
        assert text.count("(check-sat)") == 1
        assert text.startswith("; ")

    @pytest.mark.parametrize("name", property_names())
    def test_deterministic(self, name):
        """Emitting twice gives byte-identical text."""
        assert render_script(emit_property(name)) == render_script(emit_property(name))

    def test_bindings_use_transition_columns(self):
        """Key generation binds group terms to columns 2 and 3 (Start is column 1)."""
        script = emit_property("key-generation")
        assert "(assert (= (select |prime.field.order| 1) 2))" in script.assertions
        assert "(assert (= (select |generate.public.key| 7) 3))" in script.assertions

    def test_unbound_script_has_only_rules_and_negation(self):
        """Without bindings nothing constrains the group terms."""
        bound = emit_property("signature-generation")
        free = emit_property("signature-generation", with_bindings=False)
        assert len(bound.assertions) > len(free.assertions)
        assert free.assertions[-1] == bound.assertions[-1]
        assert free.assertions[-1].startswith("(assert (not (or (= ")

    def test_symbolic_index(self):
        """Signature verification indexes two arrays by the declared constant `verified`."""
        script = emit_property("signature-verification")
        assert any(d.name == "verified" and d.sort == "Int" and not d.args for d in script.declarations)
        assert "(= (select |calculate.point.1| |verified|) (select |calculate.point.2| |verified|))" in \
            script.assertions[-1]


class TestValidation:
    """The pre-solver well-formedness check."""

    GOOD = "(set-logic QF_AUFLIA)\n(declare-fun |a| () Int)\n(assert (= |a| 1))\n(check-sat)\n"

    def test_good(self):
        """A minimal script passes."""
        validate_script(self.GOOD)

    @pytest.mark.parametrize("text,message", [
        ("(set-logic QF_AUFLIA)\n(assert (= |a| 1))\n(check-sat)\n", "before it is declared"),
        ("(set-logic QF_AUFLIA)\n(declare-fun |a| () Int)\n(assert (= |a| 1)\n(check-sat)\n", "unclosed"),
        ("(set-logic QF_AUFLIA)\n(check-sat))\n", "unbalanced"),
        ("(declare-fun |a| () Int)\n(check-sat)\n", "set-logic"),
        ("(set-logic QF_AUFLIA)\n(check-sat)\n(check-sat)\n", "check-sat"),
    ])
    def test_bad(self, text, message):
        """Each defect is reported."""
        with pytest.raises(SmtValidationError, match=message):
            validate_script(text)

    def test_quote(self):
        """Dots and spaces are fine inside bars, bars are not."""
        assert quote("Generate Keys") == "|Generate Keys|"
        with pytest.raises(SmtValidationError):
            quote("a|b")


class TestVerdicts:
    """Reading solver output."""

    @pytest.mark.parametrize("output,verdict", [
        ("unsat\n", "unsat"),
        ("sat\n(model)\n", "sat"),
        ("Z3 version banner\n  unknown  \n", "unknown"),
    ])
    def test_parse(self, output, verdict):
        """The first verdict line wins."""
        assert parse_verdict(output) == verdict

    def test_no_verdict(self):
        """Errors without a verdict are unparseable."""
        with pytest.raises(UnparseableOutputError):
            parse_verdict("(error \"line 3: unknown constant\")\n")
