from .augment import augment, sample_augment, apply_augment, flip, AugmentDecision
from .losses import l1_loss, freq_loss, total_loss, compute_losses, LossTerms
from .loop import train_loop, sample_batch, Batch, TrainResult, checkpoint_name, write_nan_dump, METRICS_NAME, \
    METRICS_COLUMNS, LATEST_NAME, NAN_DUMP_NAME
from .optim import cosine_lr, adamw_step, clip_grad_norm, OptimizerState, AdamW
