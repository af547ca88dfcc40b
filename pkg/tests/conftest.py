import random
from fractions import Fraction as Q

import pytest

from nccalc.cyclic import pair
from nccalc.geometry import LieSpaceContext
from nccalc.nc import dynkin_theta_word


def random_lie(ctx, rng, wmax=3, nterms=3, letters=None):
    """Random Lie series built from bracketed words (primitive by design)."""
    letters = list(letters) if letters is not None else list(ctx.x_letters())
    out = ctx.zero_nc()
    for _ in range(nterms):
        w = rng.randint(1, wmax)
        word = tuple(rng.choice(letters) for _ in range(w))
        c = Q(rng.randint(-4, 4), rng.randint(1, 4))
        if c:
            out = out + dynkin_theta_word(ctx.alphabet, word, ctx.max_weight).scale(c)
    return out


def random_function(ctx, rng, wmax=3, nterms=2):
    """Random coordinate function: sum of pairings of Lie series."""
    out = ctx.zero_cyc()
    for _ in range(nterms):
        out = out + pair(random_lie(ctx, rng, wmax, 2), random_lie(ctx, rng, wmax, 2))
    return out


def random_one_form(ctx, rng, wmax=3):
    out = ctx.zero_cyc()
    for i in range(ctx.n):
        out = out + pair(random_lie(ctx, rng, wmax, 2), ctx.gen_series(ctx.dx(i)))
    return out


def random_two_form(ctx, rng, wmax=2, nterms=3):
    """Random 2-form via skew pairs <dx_i, Ad_w dx_j>."""
    from nccalc.nc import ad_apply

    out = ctx.zero_cyc()
    for _ in range(nterms):
        i = rng.randrange(ctx.n)
        j = rng.randrange(ctx.n)
        w = random_lie(ctx, rng, wmax, 1)
        c = Q(rng.randint(-3, 3), rng.randint(1, 3))
        out = out + pair(
            ctx.gen_series(ctx.dx(i)), ad_apply(w, ctx.gen_series(ctx.dx(j)))
        ).scale(c)
        out = out + pair(ctx.gen_series(ctx.dx(i)), ctx.gen_series(ctx.dx(j))).scale(c)
    return out


def random_closed_two_form(ctx, rng, wmax=3):
    from nccalc.geometry import de_rham

    return de_rham(ctx, random_one_form(ctx, rng, wmax))


@pytest.fixture
def rng():
    return random.Random(20240817)
