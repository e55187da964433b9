"""JSON serialization of certified polynomials.

The document keeps three things exactly: the original B / delta text the
problem was built from, every high-precision value as a sign/hex-mantissa/
exponent/bits quadruple (so parse(render(p)) reproduces the object bit for
bit), and the monomial coefficients as exact "numerator/denominator"
strings.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .approx import ChebSeries, ExportedPolynomial, ProblemSpec, problem
from .coeffs import CoeffValue, Target
from .errors import DomainError
from .hp import HPReal

FORMAT_TAG = "expcheb-poly/1"


def hp_to_text(x: HPReal) -> str:
    """Exact text form: [-]0x<mantissa>p<exponent>@<bits>."""
    s, man, exp, bc = x.raw
    if man == 0:
        return f"0@{x.bits}"
    return f"{'-' if s else ''}0x{man:x}p{exp}@{x.bits}"


def hp_from_text(text: str) -> HPReal:
    try:
        body, bits_s = text.split("@")
        bits = int(bits_s)
        if body == "0":
            return HPReal(0, bits)
        neg = body.startswith("-")
        if neg:
            body = body[1:]
        man_s, exp_s = body[2:].split("p")
        man = int(man_s, 16)
        exp = int(exp_s)
    except (ValueError, IndexError) as err:
        raise DomainError(f"malformed high-precision value {text!r}") from err
    value = HPReal(man if not neg else -man, max(bits, man.bit_length() + 1))
    return value.shifted(exp).with_bits(bits)


def _frac_to_text(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def _frac_from_text(text: str) -> Fraction:
    try:
        num, den = text.split("/")
        return Fraction(int(num), int(den))
    except (ValueError, ZeroDivisionError) as err:
        raise DomainError(f"malformed rational {text!r}") from err


def render_polynomial(spec: ProblemSpec, poly: ExportedPolynomial) -> str:
    doc = {
        "format": FORMAT_TAG,
        "target": spec.target.value,
        "B": spec.B_text,
        "delta": spec.delta_text,
        "spec_bits": spec.B.bits,
        "degree": poly.degree,
        "precision_bits": poly.precision_bits,
        "certified_sup_bound": hp_to_text(poly.certified_sup_bound),
        "rounding_bound": hp_to_text(poly.rounding_bound),
        "cheb_coeffs": [
            {"value": hp_to_text(cv.value), "radius": hp_to_text(cv.radius)}
            for cv in poly.cheb_form.coeffs
        ],
        "monomial": [_frac_to_text(c) for c in poly.monomial_form],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def parse_polynomial(text: str) -> tuple[ProblemSpec, ExportedPolynomial]:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as err:
        raise DomainError(f"not a polynomial document: {err}") from err
    if not isinstance(doc, dict) or doc.get("format") != FORMAT_TAG:
        raise DomainError("not a polynomial document (missing format tag)")
    try:
        target = Target(doc["target"])
        spec = problem(target, doc["B"], doc["delta"], int(doc["spec_bits"]))
        degree = int(doc["degree"])
        coeffs = tuple(
            CoeffValue(hp_from_text(e["value"]), hp_from_text(e["radius"]))
            for e in doc["cheb_coeffs"])
        mono = tuple(_frac_from_text(t) for t in doc["monomial"])
        poly = ExportedPolynomial(
            degree=degree,
            domain_B=spec.B,
            cheb_form=ChebSeries(spec.lam, target, coeffs),
            monomial_form=mono,
            certified_sup_bound=hp_from_text(doc["certified_sup_bound"]),
            rounding_bound=hp_from_text(doc["rounding_bound"]),
            precision_bits=int(doc["precision_bits"]),
        )
    except (KeyError, TypeError) as err:
        raise DomainError(f"incomplete polynomial document: {err}") from err
    if len(poly.cheb_form.coeffs) != degree + 1 or len(mono) != degree + 1:
        raise DomainError("polynomial document is internally inconsistent")
    return spec, poly
