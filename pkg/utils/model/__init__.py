"""
Model Module

Multi-graph recurrent network: per-graph GCNs, attention over graphs, a
stacked LSTM with a softmax head, Adam training and checkpoints.
"""

from .config import ModelConfig
from .layers import (
    gcn_forward,
    gcn_backward,
    attention_aggregate,
    attention_backward,
    concat_features,
    lstm_forward,
    lstm_backward,
    predict,
    bce_loss,
)
from .mgrn import MgrnParams, MgrnModel, ForwardTrace
from .optimizer import Adam
from .samples import SampleSet
from .trainer import Trainer, TrainingData, TrainingHistory, train
from .checkpoint import Checkpoint, save_checkpoint, load_checkpoint
from .gradcheck_suite import run_gradcheck_suite, check_model_gradients

__all__ = [
    'ModelConfig',
    'gcn_forward',
    'gcn_backward',
    'attention_aggregate',
    'attention_backward',
    'concat_features',
    'lstm_forward',
    'lstm_backward',
    'predict',
    'bce_loss',
    'MgrnParams',
    'MgrnModel',
    'ForwardTrace',
    'Adam',
    'SampleSet',
    'Trainer',
    'TrainingData',
    'TrainingHistory',
    'train',
    'Checkpoint',
    'save_checkpoint',
    'load_checkpoint',
    'run_gradcheck_suite',
    'check_model_gradients',
]
