from .ratfunc import MultiPoly, RatFunc, Ring, ratfunc_diff, ratfunc_normalize, ratfunc_subs
from .matrix import RatMat, det, left_pseudo_inverse, mat_inverse
from .series import Composer, EpsSeries, series_arith, series_compose, series_scale

__all__ = [
    "Ring", "MultiPoly", "RatFunc", "ratfunc_normalize", "ratfunc_diff", "ratfunc_subs",
    "RatMat", "det", "mat_inverse", "left_pseudo_inverse",
    "EpsSeries", "Composer", "series_arith", "series_compose", "series_scale",
]
