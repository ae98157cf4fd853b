"""
Reverse-mode gradients on numpy arrays
======================================

A tape records every operation inside ``with Tape()``; ``backward`` walks it in
reverse. Complex inputs get the gradient dL/dRe + i dL/dIm, so a gradient step
on a complex array is just ``z - lr * grad``.
"""
import numpy as np

from rxprobe.autodiff import Adam, Tape, Tensor, finite_diff, ops, rel_error

# %% A real function and its gradient
x = Tensor(np.array([0.5, -1.0, 2.0]), requires_grad=True)
with Tape() as tape:
    y = ops.tsum(ops.sigmoid(x) * x ** 2)
tape.backward(y)
print("f(x) =", y.item())
print("grad  =", x.grad)

# %% Check it against central differences
(num,) = finite_diff(lambda a: ops.tsum(ops.sigmoid(Tensor(a)) * Tensor(a) ** 2).item(), [x.data])
print("relative error vs finite differences:", rel_error(x.grad, num))

# %% Complex inputs: |h z|^2 summed, gradient w.r.t. z
h = np.array([1 + 1j, 0.5 - 2j])
z = Tensor(np.array([0.3 + 0.1j, -1.0 + 0.4j]), requires_grad=True)
with Tape() as tape:
    p = ops.tsum(ops.abs2(z * h))
tape.backward(p)
print("complex grad:", z.grad, " expected 2|h|^2 z:", 2 * np.abs(h) ** 2 * z.data)

# %% Adam drives a small least-squares problem to its solution
rng = np.random.default_rng(0)
A, b = rng.standard_normal((20, 3)), rng.standard_normal((20, 1))
w = Tensor(np.zeros((3, 1)), requires_grad=True)
opt = Adam([w], lr=0.05)
for step in range(400):
    with Tape() as tape:
        loss = ops.mean((ops.matmul(A, w) - b) ** 2)
    tape.backward(loss)
    opt.step()
print("Adam:", np.round(w.data.ravel(), 4), " lstsq:", np.round(np.linalg.lstsq(A, b, rcond=None)[0].ravel(), 4))
