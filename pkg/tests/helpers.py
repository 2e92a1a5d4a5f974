"""Shared instance builders for the test suite."""

from __future__ import annotations

import numpy as np

import sparsereg as sr
from sparsereg.rng import derive_key, make_generator


def make_instance(seed, n, p, k, sigma2, kind="binary"):
    dims = sr.Dimensions(n=n, p=p, k=k, sigma2=sigma2)
    beta = sr.sample_beta_star(p, k, kind, seed=derive_key(seed, "beta"))
    inst = sr.gen_instance(dims, beta, seed=derive_key(seed, "instance"))
    return inst, beta


def planted_gap_instance(seed, n=14, p=12, k=3, sigma2=0.01, eps=0.05):
    """Instance whose landscape has a certified overlap gap.

    Columns 5, 6, 7 are drawn so that only their full sum reproduces the
    signal ``X[:, :k] @ 1`` (column 7 is the completion, plus eps noise).
    Disjoint supports containing {5, 6, 7} then fit almost exactly, while
    supports mixing part of the truth with other columns fit badly, so the
    intermediate overlap levels are empty below the obvious radii.
    """
    dims = sr.Dimensions(n=n, p=p, k=k, sigma2=sigma2)
    beta = sr.SparseVector(length=p, indices=np.arange(k), values=np.ones(k))
    g = make_generator(seed, "plant")
    X = g.standard_normal((n, p))
    signal = X[:, :k] @ np.ones(k)
    X[:, 7] = signal - X[:, 5] - X[:, 6] + eps * g.standard_normal(n)
    W = dims.sigma * g.standard_normal(n)
    Y = signal + W
    X.setflags(write=False)
    W.setflags(write=False)
    Y.setflags(write=False)
    return sr.Instance(dims=dims, X=X, beta_star=beta, W=W, Y=Y, seed=seed)
