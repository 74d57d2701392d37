"""Non-negative orthogonal matching pursuit with exact embedded nearest-neighbour selection."""

from ._kernels import BACKEND
from .core import Dictionary, distance, normalize_columns, read_enn1, write_enn1
from .datagen import gen_mixtures, gen_planted_dictionary, gen_random_dictionary, gen_swiss_roll
from .embedding import (
    Embedding,
    embed,
    embed_dictionary,
    fit_pca,
    learn_delta,
    load_embedding,
    mixture_distortion_study,
    pair_distortion,
    random_projection,
)
from .nnsearch import SearchContext, brute_force_nn, enn_init, enn_select, unn_next
from .pursuit import SparseCode, fnnomp_baseline, fnnomp_enn

__version__ = "0.1.0"
