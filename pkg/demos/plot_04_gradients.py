"""
Exact gradients
===============

Every angle appears twice, once in the encoder and once negated in the
decoder. Shifting each occurrence separately gives the exact derivative.
Shifting both at once does not.
"""

import numpy as np

from qmae.masking import make_grid, mask_spec
from qmae.model import ModelConfig, ParamSet, forward
from qmae.optim import grad_theta_shift, grad_token_fd, shift_gradient

rng = np.random.default_rng(2)
cfg = ModelConfig(2, 1, make_grid(2, 2, 1, 1))
params = ParamSet(rng.uniform(-np.pi, np.pi, 15), np.array([0.5]))
image = rng.uniform(0.1, 1, (2, 2))
spec = mask_spec(cfg.grid, [1])


def loss_of(theta):
    return forward(cfg, ParamSet(theta, params.token), image, spec).loss


# %%
# Central differences as the reference.
h = 1e-6
fd = np.array([(loss_of(params.theta + h * e) - loss_of(params.theta - h * e)) / (2 * h)
               for e in np.eye(15)])
exact = grad_theta_shift(cfg, params, image, spec)
joint = shift_gradient(loss_of, params.theta)
print("per-occurrence shift vs FD:", np.max(np.abs(exact - fd)))
print("joint shift vs FD:        ", np.max(np.abs(joint - fd)))

# %%
# The token gradient uses central differences.
print("d loss / d token:", grad_token_fd(cfg, params, image, spec))
