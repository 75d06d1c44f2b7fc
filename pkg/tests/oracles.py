"""Loop-based reference implementations, written independently of the
vectorized package code."""

import math

import numpy as np


def softmax_row(z):
    m = max(z)
    e = [math.exp(v - m) for v in z]
    t = sum(e)
    p = [max(v / t, 1e-12) for v in e]
    t = sum(p)
    return [v / t for v in p]


def skl(p, q):
    total = 0.0
    for a, b in zip(p, q):
        total += a * math.log(a / b) + b * math.log(b / a)
    return total


def k_matrix(z1, z2):
    n = len(z1)
    p = [softmax_row(row) for row in z1]
    q = [softmax_row(row) for row in z2]
    k = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            k[i, j] = max(skl(p[i], q[j]), 1e-12)
    return k


def gda(z1, z2):
    flat1 = softmax_row(list(np.ravel(z1)))
    flat2 = softmax_row(list(np.ravel(z2)))
    total = skl(flat1, flat2)
    for a, b in zip(z1, z2):
        total += skl(softmax_row(a), softmax_row(b))
    return total


def nca(k, neighbors, eta):
    n = len(k)
    total = 0.0
    for i in range(n):
        num = k[i][i]
        for m in neighbors[i]:
            num += eta * k[i][m]
        num /= len(neighbors[i]) + 1
        den = 0.0
        for j in range(n):
            if j != i:
                den += k[i][j]
        den = den / (n - 1) + 1e-12
        total += num / den
    return total / n


def cosine_matrix(z1, z2):
    n = len(z1)
    s = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            a, b = z1[i], z2[j]
            s[i, j] = sum(x * y for x, y in zip(a, b)) / (
                math.sqrt(sum(x * x for x in a)) * math.sqrt(sum(y * y for y in b))
            )
    return s


def afc(s, h):
    n = len(s)
    total = 0.0
    for i in range(n):
        num = math.exp(s[i][i])
        den = 0.0
        for j in range(n):
            den += math.exp(s[i][j])
            if j != i:
                num += h[i][j] * math.exp(s[i][j])
        total += -math.log(num / den)
    return total / n
