from .parallel import parallel_call
from .seeding import rng_stream, STREAMS
