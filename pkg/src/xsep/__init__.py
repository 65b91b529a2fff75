"""xsep: X-ray image separation for double-sided paintings.

Separates a single mixed X-ray acquisition into two per-side components,
guided by visual photographs of each side, via multi-scale coupled
dictionary learning and budget-partitioned greedy pursuit. Includes an MCA
baseline and SSIM/PSNR evaluation.
"""

from .dictlearn import (
    CoupledDictionaryTriple,
    LearnConfig,
    TrainingSet,
    coupled_sparse_coding,
    sample_training_patches,
    train,
)
from .metrics import SsimParams, mse_psnr, ssim
from .numerics import least_squares, normalize_columns, odct_dictionary
from .patching import build_pyramid, collapse_pyramid, extract_patches, overlap_add
from .separation import SeparationConfig, mca_separate, separate_image, separate_patch
from .sparse import BudgetPartition, SparseCode, budgeted_omp, omp

__version__ = "0.1.0"
