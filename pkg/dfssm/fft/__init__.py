from .spectrum import spectrum_image, amplitude_spectrum, angular_energy_histogram, dominant_orientation, \
    angular_distance, center_shift, frequency_grid, GRAY_WEIGHTS
from .transform import fft, ifft, rfft, irfft, fft2, ifft2, rfft2_array, irfft2_array, hermitian_extend, \
    column_weights, ComplexSpectrum, rfft2, irfft2, fft_flops, is_power_of_two, next_power_of_two
