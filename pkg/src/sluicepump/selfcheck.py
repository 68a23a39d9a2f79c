"""Fast algebraic self-tests of the master-equation kernels.

Used by ``sluicepump check`` and by the test-suite.  Every check returns
(name, passed, worst deviation).
"""

from __future__ import annotations

import numpy as np

from .core import AdiabaticFrame, DensityMatrix2, SpectralTriple
from .master_equations import BLOCH, FULL, SECULAR, UNITARY, rhs_kernel, rhs_terms


def random_batch(rng: np.random.Generator, n: int):
    """Arrays for n random (frame, spectra, rho) tuples with realistic scales."""
    omega0 = 10.0 ** rng.uniform(9.5, 11.5, n)
    eta = rng.uniform(-0.999, 0.999, n)
    g = 10.0 ** rng.uniform(-3, -0.5, n)
    m2_phase = rng.uniform(0, 2 * np.pi, n)
    alpha = 10.0 ** rng.uniform(-6, -1, n)
    w_scale = alpha * omega0
    b = {
        "omega0": omega0,
        "m1": -g * eta,
        "m2": g * np.sqrt(1 - eta**2) * np.exp(1j * m2_phase),
        "w_gg": w_scale * rng.normal(size=n),
        "w_ee": w_scale * rng.normal(size=n),
        "w_ge": w_scale * (rng.normal(size=n) + 1j * rng.normal(size=n)),
        "s_plus": omega0 * 10.0 ** rng.uniform(0, 2.5, n),
        "s_minus": omega0 * 10.0 ** rng.uniform(-3, 1, n),
        "s_zero": omega0 * 10.0 ** rng.uniform(-2, 1, n),
    }
    # random physical states: Bloch vectors inside the ball
    v = rng.normal(size=(n, 3))
    v *= (rng.uniform(0, 1, n) ** (1 / 3) / np.linalg.norm(v, axis=1))[:, None]
    b["rho_gg"] = 0.5 * (1 + v[:, 2])
    b["rho_ge"] = 0.5 * (v[:, 0] + 1j * v[:, 1])
    return b


def call(variant, b, **over):
    d = dict(b, **over)
    return rhs_terms(
        variant,
        d["omega0"],
        d["m1"],
        d["m2"],
        d["w_gg"],
        d["w_ee"],
        d["w_ge"],
        d["s_plus"],
        d["s_minus"],
        d["s_zero"],
        d["rho_gg"],
        d["rho_ge"],
    )


def nonsecular_remainder(b):
    """Terms of the full equation that survive at w = 0 but are absent from Bloch damping."""
    m1, m2, rho_ge, rho_gg = b["m1"], b["m2"], b["rho_ge"], b["rho_gg"]
    s_sum = b["s_plus"] + b["s_minus"]
    m2_sq = np.abs(m2) ** 2
    d_gg = 2.0 * np.real(np.conj(m2) * rho_ge) * b["s_zero"] * m1
    d_ge = (
        -b["s_plus"] * m1 * m2
        + s_sum * m1 * m2 * rho_gg
        - 1j * s_sum * m2 * (m2.real * rho_ge.imag - m2.imag * rho_ge.real)
        + 0.5 * s_sum * m2_sq * rho_ge
    )
    return d_gg, d_ge


def rel_dev(a, b, scale=None):
    """Component-wise relative deviation (real and imaginary parts separately).

    ``scale`` (same layout as ``a``) replaces max(|a|, |b|) as the reference
    magnitude, for comparisons of sums that cancel.
    """
    out = []
    refs = (None, None, None) if scale is None else (scale[0], np.real(scale[1]), np.imag(scale[1]))
    for (x, y), ref in zip(((a[0], b[0]), (a[1].real, b[1].real), (a[1].imag, b[1].imag)), refs):
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        scale = np.maximum(np.abs(x), np.abs(y)) if ref is None else np.abs(ref)
        scale = np.maximum(scale, 1e-300)
        out.append(np.max(np.where((x == 0) & (y == 0), 0.0, np.abs(x - y) / scale)))
    return float(max(out))


def run_checks(n: int = 10_000, seed: int = 0, tol: float = 1e-12):
    rng = np.random.default_rng(seed)
    b = random_batch(rng, n)
    zero_w = {"w_gg": 0.0 * b["w_gg"], "w_ee": 0.0 * b["w_ee"], "w_ge": 0.0 * b["w_ge"]}
    zero_s = {"s_plus": 0.0 * b["s_plus"], "s_minus": 0.0 * b["s_minus"], "s_zero": 0.0 * b["s_zero"]}
    results = []

    def add(name, dev):
        results.append((name, dev <= tol, dev))

    unit = call(UNITARY, b)
    add("full(S=0) == unitary", rel_dev(call(FULL, b, **zero_s), unit))
    add("secular(S=0) == unitary", rel_dev(call(SECULAR, b, **zero_s), unit))
    bloch = call(BLOCH, b)
    add("secular(w=0) == bloch", rel_dev(call(SECULAR, b, **zero_w), bloch))
    rem = nonsecular_remainder(b)
    full0 = call(FULL, b, **zero_w)
    mag = (
        np.abs(bloch[0]) + np.abs(rem[0]),
        np.abs(bloch[1].real) + np.abs(rem[1].real) + 1j * (np.abs(bloch[1].imag) + np.abs(rem[1].imag)),
    )
    add("full(w=0) == bloch + non-secular remainder", rel_dev(full0, (bloch[0] + rem[0], bloch[1] + rem[1]), mag))
    add("bloch ignores w", rel_dev(call(BLOCH, b, **zero_w), bloch))

    # compiled kernel agrees with the numpy evaluation
    idx = rng.choice(n, size=min(n, 200), replace=False)
    worst = 0.0
    for i in idx:
        for v in (FULL, SECULAR, BLOCH, UNITARY):
            ref = call(v, {k: val[i] for k, val in b.items()})
            got = rhs_kernel(
                v,
                b["omega0"][i],
                b["m1"][i],
                complex(b["m2"][i]),
                b["w_gg"][i],
                b["w_ee"][i],
                complex(b["w_ge"][i]),
                b["s_plus"][i],
                b["s_minus"][i],
                b["s_zero"][i],
                b["rho_gg"][i],
                complex(b["rho_ge"][i]),
            )
            worst = max(worst, rel_dev(ref, got))
    add("compiled kernel == numpy", worst)
    return results


def frame_from_batch(b, i) -> tuple[AdiabaticFrame, SpectralTriple, DensityMatrix2]:
    fr = AdiabaticFrame(
        e12=float("nan"),
        gamma=0.0,
        eta=float(-b["m1"][i] / np.hypot(b["m1"][i], abs(b["m2"][i]))),
        omega0=float(b["omega0"][i]),
        m1=float(b["m1"][i]),
        m2_re=float(b["m2"][i].real),
        m2_im=float(b["m2"][i].imag),
        w_gg=float(b["w_gg"][i]),
        w_ee=float(b["w_ee"][i]),
        w_ge_re=float(b["w_ge"][i].real),
        w_ge_im=float(b["w_ge"][i].imag),
    )
    sp = SpectralTriple(float(b["s_plus"][i]), float(b["s_minus"][i]), float(b["s_zero"][i]))
    rho = DensityMatrix2.from_complex(float(b["rho_gg"][i]), complex(b["rho_ge"][i]))
    return fr, sp, rho
