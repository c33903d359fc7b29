"""Smoke test for the qfloquet_py extension module."""

import math

import qfloquet_py as qf


def close(a, b, tol):
    return abs(a - b) <= tol


def main():
    i, j, k = qf.Quaternion(0, 1), qf.Quaternion(0, 0, 1), qf.Quaternion(0, 0, 0, 1)
    assert i * j == k and j * i == -k
    assert close((1 + i).norm(), math.sqrt(2), 1e-15)
    assert close(qf.Quaternion(1, 0, 3, 4).standardize(), 1 + 5j, 1e-15)
    assert abs(qf.eval_expr("2 + j*cos(2*t)^2 + k*sin(2*t)", math.pi / 4) - qf.Quaternion(2, 0, 0, 1)) < 1e-15

    a = qf.QMatrix([[i, j, j], [k, 1, k], [0, 0, 1]])
    values = sorted(a.standard_eigenvalues(), key=lambda e: (e[0].real, e[0].imag))
    expected = [0, 1, 1 + 1j]
    assert all(close(v, e, 1e-9) for (v, _, _), e in zip(values, expected)), values
    assert qf.classify_constant(a) == "Unstable"
    assert len(a.adjoint()) == 6

    b = qf.QMatrix([[qf.Quaternion(0.1, 0.2, -0.3, 0.1), 0.5], [j, qf.Quaternion(-0.2, 0, 0.1, 0.4)]])
    back = b.logm().expm()
    assert max(abs(x - y) for r1, r2 in zip(back.rows(), b.rows()) for x, y in zip(r1, r2)) < 1e-10

    fd = qf.analyze_periodic([["1", "1"], ["0", "i + 2*exp(2*i*t)*j"]], math.pi)
    rho = sorted((v for v, _, _ in fd["multipliers"]), key=abs)
    assert close(rho[0], -1, 1e-6) and close(rho[1], math.exp(math.pi), 1e-6), rho
    assert fd["verdict"] == "Unstable"

    hill = qf.analyze_hill("2 + j*cos(2*t)^2 + k*sin(2*t)", math.pi)
    assert close(hill["re_trace"], -0.262372, 5e-3)
    assert close(hill["frob_sq"], 5.14637, 1e-2)
    assert hill["verdict_trace"] == "Undetermined"
    assert hill["verdict_multipliers"] == "Unstable"

    try:
        qf.eval_expr("2 +")
    except ValueError as e:
        assert "byte 3" in str(e)
    else:
        raise AssertionError("syntax error not raised")
    try:
        qf.QMatrix([[0, 0], [0, 0]]).inverse()
    except qf.NumericalError:
        pass
    else:
        raise AssertionError("singular inverse not raised")

    print("smoke test passed")


if __name__ == "__main__":
    main()
