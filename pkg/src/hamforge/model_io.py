"""Versioned JSON model files.

Exact rationals are written as ``{"rat": "p/q"}``. Multiprecision floats
carry a readable decimal and the exact binary value
``{"mpf": "1.52137…", "bin": "<mantissa>p<exponent>"}``; loading uses the
binary field, so a save/load cycle reproduces every number bit for bit.
Files are written with a fixed key order and no timestamps, so identical
models give byte-identical files.
"""
from __future__ import annotations

import json
from fractions import Fraction

import mpmath

from . import geomlab
from .polycore import Poly, RootTuple
from .profiles import AnsatzConfig, CertificationReport, Profile, ProfileSet
from .solvers import SolitonModel

FORMAT = "hamforge-model"
VERSION = 1


class ModelFileError(ValueError):
    pass


def encode(x):
    if x is None or isinstance(x, (bool, str)):
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, Fraction):
        return {"rat": f"{x.numerator}/{x.denominator}"}
    if isinstance(x, float):
        return {"float": repr(x)}
    if isinstance(x, mpmath.mpf):
        if not mpmath.isfinite(x):
            return {"mpf": str(x)}
        sign, man, exp, _ = x._mpf_
        man = -int(man) if sign else int(man)
        return {"mpf": mpmath.nstr(x, int(mpmath.mp.dps) + 2), "bin": f"{man}p{exp}"}
    if isinstance(x, (list, tuple)):
        return [encode(v) for v in x]
    if isinstance(x, dict):
        return {str(k): encode(v) for k, v in x.items()}
    if isinstance(x, mpmath.matrix):
        return [[encode(x[i, j]) for j in range(x.cols)] for i in range(x.rows)]
    raise TypeError(f"cannot encode {type(x).__name__}")


def decode(x):
    if isinstance(x, list):
        return [decode(v) for v in x]
    if isinstance(x, dict):
        if "rat" in x and len(x) == 1:
            p, q = x["rat"].split("/")
            return Fraction(int(p), int(q))
        if "float" in x and len(x) == 1:
            return float(x["float"])
        if "mpf" in x:
            if "bin" in x:
                man, exp = x["bin"].split("p")
                return mpmath.mpf((int(man), int(exp))) if int(man) else mpmath.mpf(0)
            return mpmath.mpf(x["mpf"])
        return {k: decode(v) for k, v in x.items()}
    return x


def _poly(p: Poly) -> list:
    return encode(list(p.coeffs))


def model_to_dict(model: SolitonModel, report: CertificationReport | None = None) -> dict:
    cfg = model.config
    ps = model.profiles
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "bits": mpmath.mp.prec,
        "config": {
            "case": cfg.case, "soliton_class": cfg.soliton_class, "d_B": cfg.d_B, "i_B": cfg.i_B,
            "d_js": list(cfg.d_js), "m_js": list(cfg.m_js), "a": encode(cfg.a),
            "experimental": cfg.experimental,
        },
        "roots": {"alphas": encode(list(model.roots.alphas)), "min_gap": encode(model.roots.min_gap)},
        "a": encode(model.a),
        "q": _poly(model.q),
        "profiles": {
            "functions": [{"P": _poly(p.P), "c": encode(p.c), "anchor": encode(p.anchor),
                           "a": encode(p.a), "d_B": p.d_B} for p in ps.profiles],
            "c_anchored": encode(ps.c_anchored),
            "beta": encode(ps.beta),
            "beta_minus": encode(ps.beta_minus),
        },
        "deltas": encode(list(model.deltas)),
        "delta_targets": list(cfg.delta_targets),
        "v_basis": encode(model.v_basis),
        "K_ell_coeffs": encode(model.K_ell_coeffs),
        "K1_coeffs": encode(model.K1_coeffs),
        "beta": encode(model.beta),
        "growth": encode(model.growth),
        "conventions": {
            "kahler_form_factor": geomlab.KAHLER_FORM_FACTOR,
            "ricci_residual": "R + q_ell * kahler_form_factor * ddbar(H) - ddbar(w)",
            "delta_target_sign": cfg.delta_sign,
            "q0": encode(cfg.q0),
        },
        "info": encode(model.info),
        "certification": report.to_dict() if report is not None else None,
    }
    return doc


def dumps(model: SolitonModel, report: CertificationReport | None = None) -> str:
    return json.dumps(model_to_dict(model, report), indent=1, ensure_ascii=False) + "\n"


def save(model: SolitonModel, path, report: CertificationReport | None = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dumps(model, report))


def model_from_dict(doc: dict) -> SolitonModel:
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFileError("not a model file")
    if doc.get("version") != VERSION:
        raise ModelFileError(f"unsupported model file version {doc.get('version')!r} (expected {VERSION})")
    try:
        c = doc["config"]
        a = decode(doc["a"])
        cfg = AnsatzConfig(c["case"], c["soliton_class"], c["d_B"], c["i_B"], tuple(c["d_js"]),
                           tuple(c["m_js"]), decode(c["a"]), c.get("experimental", False))
        roots = RootTuple(tuple(decode(doc["roots"]["alphas"])), cfg.case, cfg.d_js,
                          decode(doc["roots"]["min_gap"]))
        q = Poly(decode(doc["q"]))
        pd = doc["profiles"]
        profs = tuple(Profile(Poly(decode(f["P"])), decode(f["c"]), decode(f["anchor"]), decode(f["a"]),
                              f["d_B"]) for f in pd["functions"])
        ps = ProfileSet(q, roots, cfg.d_B, profs[0].a, profs, c_anchored=decode(pd["c_anchored"]),
                        beta=decode(pd["beta"]), beta_minus=decode(pd["beta_minus"]),
                        soliton_class=cfg.soliton_class)
        return SolitonModel(cfg, roots, a, q, ps, decode(doc["deltas"]), decode(doc["v_basis"]),
                            decode(doc["K_ell_coeffs"]), decode(doc["K1_coeffs"]), decode(doc["beta"]),
                            decode(doc["growth"]), decode(doc["info"]))
    except ModelFileError:
        raise
    except Exception as exc:       # malformed content
        raise ModelFileError(f"corrupted model file: {exc}") from exc


def loads(text: str) -> SolitonModel:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"corrupted model file: {exc}") from exc
    return model_from_dict(doc)


def load(path) -> SolitonModel:
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read())


def stored_certification(path) -> dict | None:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh).get("certification")
