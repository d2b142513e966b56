"""Configuration settings for the graph-transformer verification lab."""
import os
from dotenv import load_dotenv

load_dotenv()

# Run Configuration
DEFAULT_SEED = os.getenv('GRTL_SEED')  # None when unset; randomized CLI runs then require --seed
LOG_LEVEL = os.getenv('GRTL_LOG_LEVEL', 'WARNING').upper()
WORKERS = int(os.getenv('GRTL_WORKERS', 1))

# Numerics
MAX_LOGIT = 700.0
EXACT_INT_LIMIT = 2 ** 53
SOFTMAX_SUM_TOL = 1e-12

# Gadget networks
EXPLICIT_NET_MAX_N = 32

# Power construction
POWER_EPS = 1e-9

# Sparse two-cycle construction / RIP embedding
RIP_ALPHA = float(os.getenv('GRTL_RIP_ALPHA', 4.0))
RIP_MAX_RESAMPLES = 5
RIP_MARGIN = 0.5
RIP_GRAM_COND_LIMIT = 1e12
SPARSE_OFF_SUPPORT_LIMIT = 0.6  # non-mutual pair scores must stay <= 1 + limit
SPARSE_TAIL = 1e-6
DUMMY_QUERY_WEIGHT = 7.0 / 4.0

# Subgraph counting
SUBGRAPH_MAX_K = 5
ORACLE_MAX_PATTERN = 8
SUBGRAPH_TAIL = 1e-6

# Corpus generation
CORPUS_MAX_RESAMPLES = 100
ER_CONNECTED_FACTOR = 2.0      # p = factor * ln(n) / n
ER_DISCONNECTED_FACTOR = 0.4
RGG_CONNECTED_FACTOR = 2.0     # r = factor * sqrt(ln(n) / (pi * n))
RGG_DISCONNECTED_FACTOR = 0.4
BA_ATTACHMENTS = 2
BA_DISCONNECTED_COMPONENTS = 2
SBM_BLOCKS = 2
SBM_P_INTRA = 0.5
SBM_P_INTER = 0.05
COUNTING_EDGE_PROB = 0.1
SPLIT_FRACTIONS = (0.8, 0.1, 0.1)

# Tokenization
LAPLACIAN_SOLVER = os.getenv('GRTL_LAPLACIAN_SOLVER', 'lapack')
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100
EIGEN_CLUSTER_TOL = 1e-9

# Reports
CHART_WIDTH_INCHES = 7.0
CHART_HEIGHT_INCHES = 4.0
