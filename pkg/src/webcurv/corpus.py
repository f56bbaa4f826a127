"""Built-in web generators.

Each generator returns a WebSpec whose integral order matches the source
computations exactly; the trivialization (and hence the connection form)
depends on that order, so it is part of the contract.
"""

from __future__ import annotations

import math

from .engine import c, pi_prime
from .errors import WebCurvError
from .expr import Binding, WebSpec, parse_expr


def _web(n, sources, params=None, notes=()):
    params = dict(params or {})
    exprs = tuple(parse_expr(src, n, params) for src in sources)
    return WebSpec(n, exprs, params, tuple(notes))


def _g_binding(deform):
    """G binding: Binding, nilpotent order (int), or a rational value."""
    if isinstance(deform, Binding):
        return deform
    if deform is None:
        return Binding.rational(0)
    if isinstance(deform, int) and deform >= 2:
        return Binding.nilpotent(deform)
    return Binding.rational(deform)


def hexagonal3(f: str = "x1^2*x2", deform=None) -> WebSpec:
    """Deformed hexagonal 3-web (x, y, x+y+G*f(x,y)); n=2, k0=2, rank 1."""
    return _web(2, ["x1", "x2", f"x1+x2+G*({f})"], {"G": _g_binding(deform)})


def example2(f_of_y: str = "x2^2") -> WebSpec:
    """The 6-web z, x+y+z, 2x+4y+z, 3x+9y+z, 4x+16y+z, 5x+F(y)+z on n=3.

    F is a free function of y; the corpus default is y^2.  The source
    imposes F != 25, surfaced as a note rather than enforced.
    """
    sources = ["x3"] + [f"{k}*x1+{k * k}*x2+x3" for k in range(1, 5)]
    sources.append(f"5*x1+({f_of_y})+x3")
    return _web(3, sources, notes=("requires F != 25 on the free function F(y)",))


def pereira_pirio(n: int, deform=None) -> WebSpec:
    """The c(n,4)-web of cross-ratios of 4 of the n+3 numbers
    (x_1..x_n, 0, 1, oo); Bol's 5-web for n=2.

    The optional deformation G sits in the (x_j-1+G)/(x_i-1) family only,
    exactly where the reference computation puts it.
    """
    if n < 2:
        raise WebCurvError("pereira_pirio needs n >= 2")
    c2, c3 = math.comb(n, 2), math.comb(n, 3)
    d = c(n, 4)
    slots: list[str] = [""] * d

    def x(i):
        return f"x{i}"

    for j in range(1, n + 1):
        slots[j - 1] = x(j)
    base = n
    for j in range(2, n + 1):
        for i in range(1, j):
            slots[base + i + math.comb(j - 1, 2) - 1] = f"{x(j)}/{x(i)}"
    base = n + c2
    for j in range(2, n + 1):
        for i in range(1, j):
            slots[base + i + math.comb(j - 1, 2) - 1] = f"({x(j)}-1+G)/({x(i)}-1)"
    base = n + 2 * c2
    for k in range(3, n + 1):
        for j in range(2, k):
            for i in range(1, j):
                idx = i + math.comb(j - 1, 2) + math.comb(k - 1, 3)
                slots[base + idx - 1] = f"({x(i)}-{x(k)})/({x(j)}-{x(k)})"
    base = n + 2 * c2 + c3
    for j in range(2, n + 1):
        for i in range(1, j):
            slots[base + i + math.comb(j - 1, 2) - 1] = (
                f"{x(i)}*({x(j)}-1)/({x(j)}*({x(i)}-1))"
            )
    base = n + 3 * c2 + c3
    for k in range(3, n + 1):
        for j in range(2, k):
            for i in range(1, j):
                idx = i + math.comb(j - 1, 2) + math.comb(k - 1, 3)
                slots[base + idx - 1] = (
                    f"{x(j)}*({x(i)}-{x(k)})/({x(i)}*({x(j)}-{x(k)}))"
                )
    base = n + 3 * c2 + 2 * c3
    for k in range(3, n + 1):
        for j in range(2, k):
            for i in range(1, j):
                idx = i + math.comb(j - 1, 2) + math.comb(k - 1, 3)
                slots[base + idx - 1] = (
                    f"({x(j)}-1)*({x(i)}-{x(k)})/(({x(i)}-1)*({x(j)}-{x(k)}))"
                )
    base = n + 3 * c2 + 3 * c3
    for m in range(4, n + 1):
        for k in range(3, m):
            for j in range(2, k):
                for i in range(1, j):
                    idx = (
                        i
                        + math.comb(j - 1, 2)
                        + math.comb(k - 1, 3)
                        + math.comb(m - 1, 4)
                    )
                    slots[base + idx - 1] = (
                        f"({x(j)}-{x(m)})*({x(i)}-{x(k)})"
                        f"/(({x(i)}-{x(m)})*({x(j)}-{x(k)}))"
                    )
    assert all(slots), "generator left an unfilled slot"
    return _web(n, slots, {"G": _g_binding(deform)})


def pirio5(variant: str = "sumsq") -> WebSpec:
    """Pirio's planar 5-webs (x, y, x+y, x-y, x^2+y^2 or xy); rank 6."""
    if variant == "sumsq":
        last = "x1^2+x2^2"
    elif variant == "product":
        last = "x1*x2"
    else:
        raise WebCurvError(f"unknown pirio5 variant {variant!r}")
    return _web(2, ["x1", "x2", "x1+x2", "x1-x2", last])


def _pirio_tail(deform, extra):
    params = {"G": _g_binding(deform)}
    sources = ["x1", "x2", "x1+x2", "x1-x2", "x1^2+(1+G)*x2^2", "x1*x2"] + extra
    return _web(2, sources, params)


def pirio6(deform=None) -> WebSpec:
    """Pirio's 6-web (x, y, x+y, x-y, x^2+(1+G)y^2, xy); rank 10 at G=0."""
    return _pirio_tail(deform, [])


def pirio7(deform=None) -> WebSpec:
    """The 7-web adding x^2-(1+G)y^2; rank 15 at G=0."""
    return _pirio_tail(deform, ["x1^2-(1+G)*x2^2"])


def pirio8(deform=None) -> WebSpec:
    """The 8-web adding x^4+y^4: curvature nonzero, first 19 basis vectors
    span an invariant flat subbundle (rank 19 or 20)."""
    return _pirio_tail(deform, ["x1^2-(1+G)*x2^2", "x1^4+x2^4"])


def robert9() -> WebSpec:
    """G. Robert's exceptional planar 9-web; rank 28."""
    sources = [
        "x1",
        "x2",
        "x1/(1+x2)",
        "(1+x1)/x2",
        "x1/x2",
        "(1+x1)/(1+x2)",
        "x2*(1+x1)/(x1*(1+x2))",
        "(1+x1)*(1+x2)/(x1*x2)",
        "x1*(1+x1)/(x2*(1+x2))",
    ]
    return _web(2, sources)


_WB_FOUR_VAR = {
    "product": lambda q: "*".join(q),
    "sum": lambda q: "+".join(q),
    "sumsq": lambda q: "+".join(f"{v}^2" for v in q),
}


def wb(n: int, four_var_variant: str = "product") -> WebSpec:
    """The c(n,4)-webs generalizing Pirio's planar 5-webs: x_i; x_i+x_j,
    x_j-x_i, x_i*x_j; x_i+x_j+x_k, x_i^2+x_j^2+x_k^2, x_i*x_j*x_k; and one
    4-variable family."""
    if n < 2:
        raise WebCurvError("wb needs n >= 2")
    if four_var_variant not in _WB_FOUR_VAR:
        raise WebCurvError(f"unknown wb 4-variable family {four_var_variant!r}")
    xs = [f"x{i}" for i in range(1, n + 1)]
    sources = list(xs)
    import itertools

    for a, b in itertools.combinations(xs, 2):
        sources.append(f"{a}+{b}")
    for a, b in itertools.combinations(xs, 2):
        sources.append(f"{b}-{a}")
    for a, b in itertools.combinations(xs, 2):
        sources.append(f"{a}*{b}")
    for t in itertools.combinations(xs, 3):
        sources.append("+".join(t))
    for t in itertools.combinations(xs, 3):
        sources.append("+".join(f"{v}^2" for v in t))
    for t in itertools.combinations(xs, 3):
        sources.append("*".join(t))
    mk = _WB_FOUR_VAR[four_var_variant]
    for q in itertools.combinations(xs, 4):
        sources.append(mk(q))
    assert len(sources) == c(n, 4)
    return _web(n, sources)


def wb_rank_identity(n: int) -> tuple[int, int]:
    """(6*C(n,2) + 8*C(n,3) + 3*C(n,4), pi_prime(n, c(n,4))) — equal for n >= 2.

    The left side counts independent 2-, 3- and 4-variable abelian relations
    of the wb(n) web; the right side is the sharp bound for d = c(n,4).
    """
    if n < 2:
        raise WebCurvError("wb_rank_identity needs n >= 2")
    combinatorial = (
        6 * math.comb(n, 2) + 8 * math.comb(n, 3) + 3 * math.comb(n, 4)
    )
    return combinatorial, pi_prime(n, c(n, 4))


# --- builtin registry for the CLI ------------------------------------------


def _parse_deform(text):
    if text is None:
        return None
    text = str(text)
    if text.startswith("nilpotent(") and text.endswith(")"):
        return Binding.nilpotent(int(text[len("nilpotent(") : -1]))
    if text in ("nil", "nilpotent"):
        return Binding.nilpotent(2)
    from gmpy2 import mpq

    return Binding.rational(mpq(text))


def generate(name: str, **kwargs) -> WebSpec:
    """Instantiate a builtin web by name with string-valued parameters."""
    deform = _parse_deform(kwargs.pop("G", None))
    if name == "bol":
        web = pereira_pirio(2, deform)
    elif name == "pereira_pirio":
        web = pereira_pirio(int(kwargs.pop("n", 2)), deform)
    elif name == "hexagonal3":
        web = hexagonal3(kwargs.pop("f", "x1^2*x2"), deform)
    elif name == "example2":
        web = example2(kwargs.pop("F", "x2^2"))
    elif name == "pirio5":
        web = pirio5(kwargs.pop("variant", "sumsq"))
    elif name == "pirio6":
        web = pirio6(deform)
    elif name == "pirio7":
        web = pirio7(deform)
    elif name == "pirio8":
        web = pirio8(deform)
    elif name == "robert9":
        web = robert9()
    elif name == "wb":
        web = wb(int(kwargs.pop("n", 3)), kwargs.pop("variant", "product"))
    else:
        raise WebCurvError(f"unknown builtin web {name!r}")
    if kwargs:
        raise WebCurvError(f"unknown parameters for {name!r}: {sorted(kwargs)}")
    return web


BUILTIN_NAMES = (
    "bol",
    "pereira_pirio",
    "hexagonal3",
    "example2",
    "pirio5",
    "pirio6",
    "pirio7",
    "pirio8",
    "robert9",
    "wb",
)
