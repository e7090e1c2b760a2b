from .accounting import count_params, estimate_flops, params_report, REFERENCE_PARAMS_M
from .checkpoint import save_checkpoint, load_checkpoint, restore_model, encode_checkpoint, decode_checkpoint, \
    config_path_for, MAGIC, FORMAT_VERSION, CONFIG_NAME
from .inference import derain, evaluate_pairs
from .model import DFSSM, Stage, StagePlan, stage_plan, build_model
