from dataclasses import dataclass

from ..errors import DimensionError
from ..fft import rfft2
from ..tensor import Tensor, abs_, complex_abs, mean


def _check_pair(pred: Tensor, target: Tensor):
    if pred.shape != target.shape:
        raise DimensionError(f'Prediction {pred.shape!r} and target {target.shape!r} differ in shape.')


def l1_loss(pred: Tensor, target: Tensor) -> Tensor:
    _check_pair(pred, target)
    return mean(abs_(pred - target))


def freq_loss(pred: Tensor, target: Tensor) -> Tensor:
    """
    Mean complex modulus of the half-plane spectrum of ``pred - target``, which by
    linearity equals ``|F(pred) - F(target)|`` averaged over bins and channels.
    """
    _check_pair(pred, target)
    spectrum = rfft2(pred - target)
    return mean(complex_abs(spectrum.re, spectrum.im))


def total_loss(pred: Tensor, target: Tensor, lambda_f: float) -> Tensor:
    return compute_losses(pred, target, lambda_f).total


@dataclass
class LossTerms:
    total: Tensor
    l1: Tensor
    freq: Tensor

    def as_floats(self):
        return self.total.item(), self.l1.item(), self.freq.item()


def compute_losses(pred: Tensor, target: Tensor, lambda_f: float) -> LossTerms:
    if lambda_f < 0:
        raise ValueError(f'Frequency loss weight must be non-negative, but {lambda_f!r} found.')
    l1 = l1_loss(pred, target)
    if lambda_f == 0:
        freq = freq_loss(pred.detach(), target.detach())
        return LossTerms(l1, l1, freq)
    freq = freq_loss(pred, target)
    return LossTerms(l1 + freq * float(lambda_f), l1, freq)
