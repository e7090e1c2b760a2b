"""
Model and training configuration.

Config files are UTF-8 text with one ``key = value`` per line and ``#`` comments.
Keys of :class:`ModelConfig` and :class:`TrainConfig` share one namespace; an
optional ``preset`` line picks the base model configuration the other keys
override.
"""
from dataclasses import dataclass, fields, replace, asdict
from typing import Dict, Tuple, Any, Optional

from ditk import logging

from .errors import ConfigError

CONV_BLOCKS = ('mgcb', 'conv_layer')
MIN_LEVELS, MAX_LEVELS = 2, 4


@dataclass(frozen=True)
class ModelConfig:
    channels: int = 48
    n_s: int = 1
    n_f: int = 3
    gamma: float = 2.0
    state_dim: int = 16
    expand: int = 2
    conv_block: str = 'mgcb'
    use_freq_loss: bool = True
    levels: int = 4
    fftm_use_fft: bool = True
    fftm_spatial_convs: bool = True
    scan_chunk: int = 0

    def validate(self) -> 'ModelConfig':
        if self.n_s < 0 or self.n_f < 0 or self.n_s + self.n_f < 1:
            raise ConfigError(f'Each stage needs at least one group, but n_s={self.n_s!r}, n_f={self.n_f!r}.')
        if self.channels < 4 or self.channels % 2:
            raise ConfigError(f'Base channels must be even and at least 4, but {self.channels!r} found.')
        if not MIN_LEVELS <= self.levels <= MAX_LEVELS:
            raise ConfigError(f'Levels must be within [{MIN_LEVELS}, {MAX_LEVELS}], but {self.levels!r} found.')
        if self.state_dim < 1:
            raise ConfigError(f'State dimension must be positive, but {self.state_dim!r} found.')
        if self.expand < 1:
            raise ConfigError(f'Scan expansion must be positive, but {self.expand!r} found.')
        width = self.gamma * self.channels
        if self.gamma <= 0 or width != int(width) or int(width) % 2:
            raise ConfigError(f'γ·C must be a positive even integer, but γ={self.gamma!r}, C={self.channels!r}.')
        if self.conv_block not in CONV_BLOCKS:
            raise ConfigError(f'Conv block must be one of {CONV_BLOCKS!r}, but {self.conv_block!r} found.')
        if self.scan_chunk < 0:
            raise ConfigError(f'Scan chunk must be non-negative, but {self.scan_chunk!r} found.')
        return self

    @property
    def stage_count(self) -> int:
        return 2 * self.levels

    @property
    def pad_multiple(self) -> int:
        return 2 ** (self.levels - 1)


@dataclass(frozen=True)
class TrainConfig:
    iterations: int = 1000
    batch_size: int = 4
    patch_size: int = 128
    lr_init: float = 3e-4
    lr_final: float = 1e-6
    beta1: float = 0.9
    beta2: float = 0.999
    weight_decay: float = 1e-4
    adam_eps: float = 1e-8
    lambda_f: float = 0.01
    grad_clip: float = 0.0
    seed: int = 0
    checkpoint_every: int = 0
    log_every: int = 10
    holdout: bool = False

    def validate(self) -> 'TrainConfig':
        if self.iterations < 0:
            raise ConfigError(f'Iterations must be non-negative, but {self.iterations!r} found.')
        if self.batch_size < 1 or self.patch_size < 1:
            raise ConfigError(f'Batch size and patch size must be positive, '
                              f'but {self.batch_size!r} and {self.patch_size!r} found.')
        if not 0 < self.lr_final < self.lr_init:
            raise ConfigError(f'Learning rates need 0 < lr_final < lr_init, '
                              f'but {self.lr_final!r} and {self.lr_init!r} found.')
        if not (0 <= self.beta1 < 1 and 0 <= self.beta2 < 1):
            raise ConfigError(f'Betas must be within [0, 1), but {self.beta1!r} and {self.beta2!r} found.')
        if self.weight_decay < 0 or self.adam_eps <= 0:
            raise ConfigError(f'Invalid weight decay {self.weight_decay!r} or epsilon {self.adam_eps!r}.')
        if self.lambda_f < 0:
            raise ConfigError(f'Frequency loss weight must be non-negative, but {self.lambda_f!r} found.')
        if self.grad_clip < 0:
            raise ConfigError(f'Gradient clip must be non-negative, but {self.grad_clip!r} found.')
        if self.checkpoint_every < 0 or self.log_every < 1:
            raise ConfigError(f'Invalid cadence: checkpoint_every={self.checkpoint_every!r}, '
                              f'log_every={self.log_every!r}.')
        return self


PRESETS: Dict[str, ModelConfig] = {
    'dfssm': ModelConfig(channels=48, n_s=1, n_f=3),
    'dfssm-s': ModelConfig(channels=32, n_s=1, n_f=2),
    'toy': ModelConfig(channels=8, n_s=1, n_f=1, state_dim=4),
    'micro': ModelConfig(channels=4, n_s=1, n_f=1, state_dim=2, levels=2),
}

_MODEL_KEYS = {f.name: f for f in fields(ModelConfig)}
_TRAIN_KEYS = {f.name: f for f in fields(TrainConfig)}


def get_preset(name: str) -> ModelConfig:
    if name not in PRESETS:
        raise ConfigError(f'Unknown preset {name!r}, one of {sorted(PRESETS)!r} expected.')
    return PRESETS[name]


def _coerce(key: str, text: str, type_) -> Any:
    try:
        if type_ is bool:
            lowered = text.lower()
            if lowered in ('true', 'yes', 'on', '1'):
                return True
            elif lowered in ('false', 'no', 'off', '0'):
                return False
            raise ValueError(text)
        return type_(text)
    except ValueError as err:
        raise ConfigError(f'Invalid value {text!r} for {key!r}, {type_.__name__} expected.') from err


def parse_config(text: str, source: str = '<config>') -> Tuple[ModelConfig, TrainConfig]:
    """
    Parse config text into validated model and training configs.

    :raises ConfigError: On malformed lines, unknown or repeated keys, bad values
        and configs violating their invariants.
    """
    values: Dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'{source}:{lineno}: expected "key = value", but {raw.strip()!r} found.')
        key, value = (part.strip() for part in line.split('=', 1))
        if key != 'preset' and key not in _MODEL_KEYS and key not in _TRAIN_KEYS:
            raise ConfigError(f'{source}:{lineno}: unknown key {key!r}.')
        if key in values:
            raise ConfigError(f'{source}:{lineno}: key {key!r} given twice.')
        values[key] = value

    model = get_preset(values.pop('preset')) if 'preset' in values else ModelConfig()
    model_updates = {k: _coerce(k, v, _MODEL_KEYS[k].type) for k, v in values.items() if k in _MODEL_KEYS}
    train_updates = {k: _coerce(k, v, _TRAIN_KEYS[k].type) for k, v in values.items() if k in _TRAIN_KEYS}
    return replace(model, **model_updates).validate(), replace(TrainConfig(), **train_updates).validate()


def load_config(path: str) -> Tuple[ModelConfig, TrainConfig]:
    try:
        with open(path, 'r', encoding='utf-8') as f:
            text = f.read()
    except OSError as err:
        raise ConfigError(f'Cannot read config file {path!r}: {err}') from err
    return parse_config(text, source=path)


def format_config(model: ModelConfig, train: Optional[TrainConfig] = None) -> str:
    lines = ['# model']
    lines.extend(f'{key} = {_format_value(value)}' for key, value in asdict(model).items())
    if train is not None:
        lines.append('')
        lines.append('# training')
        lines.extend(f'{key} = {_format_value(value)}' for key, value in asdict(train).items())
    return '\n'.join(lines) + '\n'


def _format_value(value) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    return repr(value) if isinstance(value, float) else str(value)


def save_config(path: str, model: ModelConfig, train: Optional[TrainConfig] = None):
    with open(path, 'w', encoding='utf-8') as f:
        f.write(format_config(model, train))
    logging.info(f'Config saved to {path!r}.')
