"""Exact F-nef cone computations on the moduli spaces of stable pointed curves."""

__version__ = "0.1.0"

from .combinat import ClassIndex, ModuliSig, StratumCurve, enumerate_strata
from .cone import ConeH, ConeV, Member, Separated, extremal_rays, facets, membership
from .divisor import DivisorClass, ch_gamma, flag_divisor, unmarked_class
from .errors import FaberConeError
from .fulton import build_E, build_N, build_V, fulton_question, kappa_class, lemma44_check
from .intersection import is_f_nef, nef_criterion_61, verify_flag_divisor

__all__ = [
    "ClassIndex", "ConeH", "ConeV", "DivisorClass", "FaberConeError", "Member", "ModuliSig",
    "Separated", "StratumCurve", "build_E", "build_N", "build_V", "ch_gamma", "enumerate_strata",
    "extremal_rays", "facets", "flag_divisor", "fulton_question", "is_f_nef", "kappa_class",
    "lemma44_check", "membership", "nef_criterion_61", "unmarked_class", "verify_flag_divisor",
]
