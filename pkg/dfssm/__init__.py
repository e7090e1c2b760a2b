from .config import ModelConfig, TrainConfig, PRESETS, get_preset, load_config, parse_config, save_config
from .errors import DFSSMError
from .network import DFSSM, build_model
