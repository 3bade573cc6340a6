"""Masked quantum autoencoder (QMAE) and plain quantum autoencoder on a dense statevector simulator."""
from .ansatz import (
    AnsatzCircuit,
    GateOp,
    apply_decoder,
    apply_encoder,
    build_encoder,
    build_pair_block,
)
from .dataio import Dataset, ImageSample, load_idx_dataset, read_pgm, write_pgm
from .embedding import amplitude_embed, extract_image
from .masking import (
    MaskSpec,
    PatchGrid,
    insert_mask_token,
    make_grid,
    preset,
    sample_mask,
)
from .metrics import EvalReport, cosine_similarity, evaluate, fidelity, ssim
from .model import (
    QAE,
    QMAE,
    ModelConfig,
    ParamSet,
    forward,
    init_params,
    loss,
    reconstruct,
)
from .optim import (
    AdamState,
    GradVector,
    adam_step,
    grad_theta_shift,
    grad_token_fd,
    train,
)
from .statevec import DensityMatrix, StateVector, zero_state

__version__ = "0.1.0"

__all__ = [
    "AnsatzCircuit", "GateOp", "apply_decoder", "apply_encoder", "build_encoder", "build_pair_block",
    "Dataset", "ImageSample", "load_idx_dataset", "read_pgm", "write_pgm",
    "amplitude_embed", "extract_image",
    "MaskSpec", "PatchGrid", "insert_mask_token", "make_grid", "preset", "sample_mask",
    "EvalReport", "cosine_similarity", "evaluate", "fidelity", "ssim",
    "QAE", "QMAE", "ModelConfig", "ParamSet", "forward", "init_params", "loss", "reconstruct",
    "AdamState", "GradVector", "adam_step", "grad_theta_shift", "grad_token_fd", "train",
    "DensityMatrix", "StateVector", "zero_state",
]
