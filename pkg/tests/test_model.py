import numpy as np
import pytest

from qmae import statevec as sv
from qmae.embedding import amplitude_embed
from qmae.errors import ConfigError, DegenerateInputError, FormatError
from qmae.masking import make_grid, mask_spec, preset, sample_mask
from qmae.model import (
    QAE,
    QMAE,
    ModelConfig,
    ParamSet,
    fast_forward,
    forward,
    init_params,
    load_checkpoint,
    loss,
    reconstruct,
    save_checkpoint,
    sigma_z_batch,
    swap_test,
)

from .conftest import random_image, tiny_config
from .oracles import oracle_sigma, random_instance

# -- configuration ------------------------------------------------------------------------

def test_qubit_budget_16px_profile():
    grid, n_masked = preset(16, 25)
    cfg = ModelConfig(8, 7, grid, n_masked)
    assert cfg.n_trash == 1
    assert cfg.n_total == 18
    assert cfg.n_params == 420 + 64


def test_desk_scale_budget():
    grid, n_masked = preset(8, 25)
    cfg = ModelConfig(6, 5, grid, n_masked)
    assert cfg.n_total == 14
    assert cfg.n_params == 225 + 16


def test_layout():
    cfg = tiny_config(n=3, k=1)
    assert cfg.data_qubits == [1, 2, 3]
    assert cfg.reference_qubits == [4, 5, 6]
    assert cfg.reset_ancillas == [7, 8]


@pytest.mark.parametrize("kwargs", [
    dict(n_latent=2),  # t = 0
    dict(n_latent=0),
    dict(variant="vae"),
    dict(n_masked=9),
    dict(shots=0),
])
def test_config_errors(kwargs):
    base = dict(n_data=2, n_latent=1, grid=make_grid(2, 2, 1, 1))
    base.update(kwargs)
    with pytest.raises(ConfigError):
        ModelConfig(**base)


def test_config_pixels_must_fit():
    with pytest.raises(ConfigError):
        ModelConfig(2, 1, make_grid(4, 4, 2, 2))


def test_params_shape_checked(rng):
    cfg = tiny_config()
    bad = ParamSet(np.zeros(14), np.zeros(1))
    with pytest.raises(ConfigError):
        forward(cfg, bad, np.ones((2, 2)), mask_spec(cfg.grid, []))


def test_all_zero_image():
    cfg = tiny_config()
    params = init_params(cfg, np.random.default_rng(0))
    with pytest.raises(DegenerateInputError):
        forward(cfg, params, np.zeros((2, 2)), mask_spec(cfg.grid, [0]))
    with pytest.raises(DegenerateInputError):
        reconstruct(cfg, params, np.zeros((2, 2)), mask_spec(cfg.grid, [0]))


def test_image_range_checked():
    cfg = tiny_config()
    params = init_params(cfg, np.random.default_rng(0))
    with pytest.raises(ConfigError):
        forward(cfg, params, np.full((2, 2), 1.5), mask_spec(cfg.grid, []))


def test_init_params(rng):
    cfg = tiny_config(n=3)
    p = init_params(cfg, rng)
    assert p.theta.shape == (45,) and np.all(np.abs(p.theta) <= np.pi)
    assert np.all(p.token == 0.5)


# -- loss ---------------------------------------------------------------------------------

@pytest.mark.parametrize("sigma,expected", [(1, 0), (0, 1), (0.734, 0.266)])
def test_loss(sigma, expected):
    assert loss(sigma) == pytest.approx(expected, abs=1e-15)


# -- SWAP test harness --------------------------------------------------------------------

def test_swap_test_identical_states(rng):
    x = rng.uniform(0.1, 1, 4)
    s = sv.zero_state(5)
    amplitude_embed(x, s, 1, 2)
    amplitude_embed(x, s, 3, 2)
    sigma = swap_test(s, 0, [1, 2], [3, 4])
    assert sigma == pytest.approx(1, abs=1e-12)
    assert loss(sigma) == pytest.approx(0, abs=1e-12)


def test_swap_test_orthogonal_states():
    s = sv.zero_state(5)
    amplitude_embed([1, 1, 0, 0], s, 1, 2)
    amplitude_embed([0, 0, 1, 1], s, 3, 2)
    sigma = swap_test(s, 0, [1, 2], [3, 4])
    assert sigma == pytest.approx(0, abs=1e-12)
    assert loss(sigma) == pytest.approx(1, abs=1e-12)


def test_swap_test_squared_overlap(rng):
    x, y = rng.uniform(0.1, 1, 8), rng.uniform(0.1, 1, 8)
    s = sv.zero_state(7)
    amplitude_embed(x, s, 1, 3)
    amplitude_embed(y, s, 4, 3)
    expected = (x @ y) ** 2 / (x @ x) / (y @ y)
    assert swap_test(s, 0, [1, 2, 3], [4, 5, 6]) == pytest.approx(expected, abs=1e-12)


# -- forward against the dense oracle -----------------------------------------------------

def test_zero_theta_toy_matches_oracle():
    cfg = tiny_config(n=2, k=1, variant=QAE)
    params = ParamSet(np.zeros(15), np.zeros(1))
    image = np.array([[0.2, 0.9], [0.4, 0.6]])
    spec = mask_spec(cfg.grid, [])
    want, _ = oracle_sigma(cfg, params, image, spec)
    # block = SWAP: psi = sum x_ij |ij> -> trash (qubit 1) holds the former qubit 0
    x = image.ravel() / np.linalg.norm(image)
    rho_hand = np.zeros((4, 4))
    swapped = x.reshape(2, 2).T  # after SWAP: amplitude at |ji>
    reduced = swapped @ swapped.T  # trace out qubit 1
    reset = np.kron(reduced, np.diag([1, 0]))
    perm = np.eye(4)[[0, 2, 1, 3]]
    rho_hand = perm @ reset @ perm
    assert want == pytest.approx(x @ rho_hand @ x, abs=1e-12)
    assert forward(cfg, params, image, spec).sigma_z == pytest.approx(want, abs=1e-10)


@pytest.mark.parametrize("n,k", [(2, 1), (3, 1), (3, 2)])
@pytest.mark.parametrize("variant", [QMAE, QAE])
def test_forward_matches_oracle(n, k, variant):
    r = np.random.default_rng(100 * n + 10 * k + (variant == QAE))
    for _ in range(4):
        cfg, params, image, spec = random_instance(r, n, k, variant)
        want, rho = oracle_sigma(cfg, params, image, spec)
        res = forward(cfg, params, image, spec)
        assert abs(res.sigma_z - want) < 1e-10
        assert np.allclose(res.extras["rho"].entries, rho, atol=1e-10)
        assert res.loss == 1 - res.sigma_z


def test_sigma_in_unit_interval(rng):
    for _ in range(20):
        cfg, params, image, spec = random_instance(rng, 3, int(rng.integers(1, 3)), QMAE)
        sigma = forward(cfg, params, image, spec).sigma_z
        assert -1e-10 <= sigma <= 1 + 1e-10


def test_fast_route_matches_forward(rng):
    grid, n_masked = preset(8, 25)
    cfg = ModelConfig(6, 5, grid, n_masked)
    params = init_params(cfg, rng)
    image = random_image(rng, (8, 8))
    spec = sample_mask(grid, 1, rng)
    assert abs(fast_forward(cfg, params, image, spec) - forward(cfg, params, image, spec).sigma_z) < 1e-10


def test_sigma_z_batch_broadcasts(rng):
    cfg, params, image, spec = random_instance(rng, 3, 2, QMAE)
    thetas = rng.uniform(-3, 3, (5, cfg.n_theta))
    psi = rng.uniform(size=8)
    psi /= np.linalg.norm(psi)
    ref = rng.uniform(size=8)
    ref /= np.linalg.norm(ref)
    batch = sigma_z_batch(cfg, psi, ref, thetas, params.theta)
    single = [sigma_z_batch(cfg, psi, ref, t, params.theta) for t in thetas]
    assert np.allclose(batch, single, atol=1e-14)


def test_shot_mode_close_to_analytic(rng):
    cfg, params, image, spec = random_instance(rng, 2, 1, QMAE)
    analytic = forward(cfg, params, image, spec).sigma_z
    shot_cfg = ModelConfig(cfg.n_data, cfg.n_latent, cfg.grid, cfg.n_masked, shots=4000, shot_seed=3)
    est = forward(shot_cfg, params, image, spec).sigma_z
    assert abs(est - analytic) <= 4 / np.sqrt(4000)
    assert est == forward(shot_cfg, params, image, spec).sigma_z
    assert abs(fast_forward(shot_cfg, params, image, spec) - analytic) <= 4 / np.sqrt(4000)


# -- reconstruction -----------------------------------------------------------------------

def test_reconstruct_matches_forward(rng):
    for n, k in [(2, 1), (3, 2)]:
        cfg, params, image, spec = random_instance(rng, n, k, QMAE)
        assert np.max(np.abs(reconstruct(cfg, params, image, spec)
                             - forward(cfg, params, image, spec).reconstruction)) < 1e-12


def test_reconstruct_zero_theta_toy():
    cfg = tiny_config(n=2, k=1, variant=QAE)
    params = ParamSet(np.zeros(15), np.zeros(1))
    image = np.array([[0.2, 0.9], [0.4, 0.6]])
    x = image.ravel() / np.linalg.norm(image)
    # SWAP, reset qubit 1, SWAP back: qubit 0 ends in |0>, qubit 1 keeps its marginal
    p1 = np.array([x[0] ** 2 + x[2] ** 2, x[1] ** 2 + x[3] ** 2])
    expected = np.sqrt([p1[0], p1[1], 0, 0]) * np.linalg.norm(image)
    got = reconstruct(cfg, params, image, mask_spec(cfg.grid, []))
    assert np.allclose(got.ravel(), np.clip(expected, 0, 1), atol=1e-12)


def test_variants_agree_without_mask(rng):
    cfg, params, image, _ = random_instance(rng, 3, 2, QMAE)
    cfg_qae = ModelConfig(cfg.n_data, cfg.n_latent, cfg.grid, cfg.n_masked, variant=QAE)
    empty = mask_spec(cfg.grid, [])
    assert np.array_equal(reconstruct(cfg, params, image, empty), reconstruct(cfg_qae, params, image, empty))
    assert forward(cfg, params, image, empty).sigma_z == forward(cfg_qae, params, image, empty).sigma_z


def test_reference_is_unmasked(rng):
    # an identity-like model on a fully masked QAE input still compares against the original
    cfg, params, image, _ = random_instance(rng, 2, 1, QMAE)
    spec = mask_spec(cfg.grid, [0])
    want, _ = oracle_sigma(cfg, params, image, spec)
    assert abs(forward(cfg, params, image, spec).sigma_z - want) < 1e-10


# -- checkpoint ---------------------------------------------------------------------------

def test_checkpoint_round_trip(tmp_path, rng):
    grid, n_masked = preset(8, 25)
    cfg = ModelConfig(6, 5, grid, n_masked)
    params = ParamSet(rng.normal(size=225) * 1e3, rng.normal(size=16) / 7)
    params.theta[0] = np.nextafter(1.0, 2.0)
    params.theta[1] = 5e-324
    path = tmp_path / "ck.txt"
    save_checkpoint(path, cfg, params)
    assert path.read_text().splitlines()[0] == "qmae-params v1 n=6 k=5 ph=4 pw=4"
    meta, back = load_checkpoint(path)
    assert meta == {"n": 6, "k": 5, "ph": 4, "pw": 4, "frozen": False}
    assert np.array_equal(back.flat(), params.flat())


def test_checkpoint_frozen_flag(tmp_path):
    cfg = tiny_config(variant=QAE)
    save_checkpoint(tmp_path / "c", cfg, init_params(cfg, np.random.default_rng(0)))
    assert load_checkpoint(tmp_path / "c")[0]["frozen"] is True


@pytest.mark.parametrize("text", [
    "",
    "qmae-params v2 n=2 k=1 ph=1 pw=1\n" + "0\n" * 16,
    "qmae-params v1 n=2 k=1 ph=1\n" + "0\n" * 16,
    "qmae-params v1 n=2 k=1 ph=1 pw=1\n" + "0\n" * 15,
    "qmae-params v1 n=2 k=1 ph=1 pw=1\n" + "0\n" * 15 + "abc\n",
    "qmae-params v1 n=2 k=1 ph=1 pw=1\n" + "0\n" * 15 + "nan\n",
])
def test_checkpoint_rejects(tmp_path, text):
    path = tmp_path / "bad"
    path.write_text(text)
    with pytest.raises(FormatError):
        load_checkpoint(path)
