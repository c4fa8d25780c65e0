"""Cross-polytope locality-sensitive hashing for angular distance.

Four hash families (dense Gaussian, fast subsampled-Hadamard + Gaussian
lift, pseudo-rotation, and discrete low-randomness), an (R, c) near
neighbor index, and a Monte Carlo collision-probability lab.
"""

from .discrete_gaussian import (
    DiscreteGaussian,
    build_discrete_gaussian,
    inverse_normal_cdf,
    normal_cdf,
)
from .errors import (
    CplshError,
    DegenerateInputError,
    DimensionError,
    FileFormatError,
    InsufficientTrialsError,
    ParameterError,
)
from .families import (
    HashFamilyConfig,
    HashValue,
    Hasher,
    nearest_vertex,
    parse_hash_value,
    sample_hasher,
    serialize_hash_value,
)
from .index import (
    Dataset,
    IndexParams,
    LshIndex,
    QueryResult,
    build_index,
    query_index,
    suggest_params,
    tables_for_recall,
)
from .lab import (
    CollisionEstimate,
    ConvergencePoint,
    ExperimentConfig,
    SensitivityEstimate,
    collision_curve,
    convergence_experiment,
    estimate_collision,
    estimate_rho,
    pair_at_distance,
    theory_ln_inv_p,
    theory_rho,
    wilson_interval,
)
from .ledger import RandomnessLedger, ledger_csv, ledger_report
from .sparse_jl import SparseJl, apply_sparse_jl, build_sparse_jl, smallest_prime_at_least
from .transforms import (
    DenseGaussian,
    FastJlTransform,
    RademacherDiagonal,
    RowSubset,
    apply_fjlt,
    fwht_in_place,
    pad_to_pow2,
    sample_dense_gaussian,
    sample_fjlt,
)
from .vectors_io import read_vectors, write_vectors

__version__ = "0.1.0"
