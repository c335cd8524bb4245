"""
Model Module Configuration

Default architecture and optimizer settings, and the typed ModelConfig.
"""

from typing import Any, Dict, List

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from utils.errors import InvalidConfig

# =============================================================================
# ARCHITECTURE DEFAULTS
# =============================================================================

DEFAULT_GCN_DIMS = [128, 64]
DEFAULT_ATTN_WIDTH = 64
DEFAULT_LSTM_DIMS = [128, 64]
DEFAULT_LOOKBACK = 20          # T: trading days before the prediction day
DEFAULT_HORIZON = 1            # delta_t: look-forward days for the label

# Output head: column 0 is "up", column 1 is "down"
N_CLASSES = 2

# Initialization
WEIGHT_INIT = "xavier-uniform"
FORGET_BIAS_INIT = 1.0

# =============================================================================
# OPTIMIZER / TRAINING DEFAULTS
# =============================================================================

DEFAULT_LR = 1e-3
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_EPS = 1e-8
DEFAULT_EPOCHS = 10
DEFAULT_BATCH_SIZE = 32

# Probabilities are clipped to [PROB_CLIP, 1 - PROB_CLIP] inside the loss
PROB_CLIP = 1e-12

# =============================================================================
# CHECKPOINTS
# =============================================================================

CHECKPOINT_MAGIC = b"MGRNCKPT"
CHECKPOINT_FORMAT_VERSION = 1

# =============================================================================
# GRADIENT CHECK
# =============================================================================

GRADCHECK_STEP = 1e-5
GRADCHECK_TOLERANCE = 1e-4


class ModelConfig(BaseModel):
    """Architecture, optimizer and training-loop settings."""
    model_config = ConfigDict(extra="forbid")

    d: int = Field(ge=1, description="News embedding dimension")
    gcn_dims: List[int] = Field(default_factory=lambda: list(DEFAULT_GCN_DIMS), min_length=1)
    attn_w: int = Field(default=DEFAULT_ATTN_WIDTH, ge=1)
    lstm_dims: List[int] = Field(default_factory=lambda: list(DEFAULT_LSTM_DIMS), min_length=1)
    T: int = Field(default=DEFAULT_LOOKBACK, ge=1)
    delta_t: int = Field(default=DEFAULT_HORIZON, ge=1)
    lr: float = Field(default=DEFAULT_LR, gt=0.0)
    beta1: float = Field(default=DEFAULT_BETA1, ge=0.0, lt=1.0)
    beta2: float = Field(default=DEFAULT_BETA2, ge=0.0, lt=1.0)
    eps: float = Field(default=DEFAULT_EPS, gt=0.0)
    epochs: int = Field(default=DEFAULT_EPOCHS, ge=0)
    batch_size: int = Field(default=DEFAULT_BATCH_SIZE, ge=1)
    seed: int = 0
    use_final_epoch: bool = Field(default=False, description="Return last-epoch parameters instead of best dev loss")

    @field_validator("gcn_dims", "lstm_dims")
    @classmethod
    def _positive_dims(cls, dims: List[int]) -> List[int]:
        if any(v < 1 for v in dims):
            raise ValueError("layer widths must be >= 1")
        return dims

    @property
    def f_out(self) -> int:
        """Width of the fused graph embedding Z_d."""
        return self.gcn_dims[-1]

    @property
    def lstm_in(self) -> int:
        return self.d + self.f_out

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ModelConfig":
        try:
            return cls.model_validate(data)
        except ValidationError as e:
            raise InvalidConfig(f"Invalid model config: {e}") from e
