"""Python interface to the Anderson-Bernoulli numerical laboratory core."""

from ._core import (
    AlgebraicNumber,
    Operator,
    __version__,
    bernoulli_fourier,
    build_operator,
    diophantine_floor,
    expander_average_norm,
    fp_frame,
    freeness_certificate,
    furstenberg_fixed_point,
    furstenberg_mc,
    halperin_alpha,
    hypothesis_check,
    ids_sturm,
    lyapunov_mc,
    mobius_angle,
    mobius_derivative,
    parabolic_pair,
    phi,
    pisot_check,
    pisot_nondecay_probe,
    real_root,
    restricted_norm,
    thouless,
    transfer_matrix,
)


def sqrt5_minus_2():
    """The reference coupling sqrt(5) - 2, root of x^2 + 4x - 1 in (0, 1)."""
    return real_root([-1, 4, 1], "0", "1")


__all__ = [
    "AlgebraicNumber",
    "Operator",
    "__version__",
    "bernoulli_fourier",
    "build_operator",
    "diophantine_floor",
    "expander_average_norm",
    "fp_frame",
    "freeness_certificate",
    "furstenberg_fixed_point",
    "furstenberg_mc",
    "halperin_alpha",
    "hypothesis_check",
    "ids_sturm",
    "lyapunov_mc",
    "mobius_angle",
    "mobius_derivative",
    "parabolic_pair",
    "phi",
    "pisot_check",
    "pisot_nondecay_probe",
    "real_root",
    "restricted_norm",
    "sqrt5_minus_2",
    "thouless",
    "transfer_matrix",
]
